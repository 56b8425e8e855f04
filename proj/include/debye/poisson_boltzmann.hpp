#pragma once

// Nonlinear Poisson-Boltzmann constraint on the torus:
//   eps * phi'' = exp(phi) - n
// and its eps = 0 limit phi = ln n.

#include <optional>
#include <stdexcept>
#include <string>

#include "debye/spectral_grid.hpp"

namespace debye {

struct PBSolveOptions {
  double tol = 1e-12;  // L2 norm of the dealiased residual
  int max_newton_iters = 50;
  double damping_min = 1.0 / 16.0;

  void validate() const;
};

struct PBSolution {
  Field phi;
  double residual_l2 = 0.0;
  int iterations = 0;
};

class PBConvergenceError : public std::runtime_error {
 public:
  PBConvergenceError(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// F(phi) = eps phi'' - exp(phi) + n, evaluated pointwise and dealiased.
Field pb_residual(const Field& phi, const Field& n, double eps);

/// Damped Newton iteration with a dense Cholesky solve of
/// diag(exp(phi_k)) - eps D2 at every step. At least one Newton correction is
/// applied, even when the initial guess already meets the tolerance.
PBSolution solve_phi(const Field& n, double eps, const PBSolveOptions& opts = {},
                     const std::optional<Field>& phi_init = std::nullopt);

/// Pointwise ln n.
Field solve_phi_limit(const Field& n);

}  // namespace debye
