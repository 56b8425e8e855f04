#pragma once

#include <utility>

#include "debye/spectral_grid.hpp"

namespace debye {

/// Smooth, strictly positive data shared by the Euler-Poisson and limit flows.
struct InitParams {
  double n_base = 1.0;  // background density
  double n_amp = 0.1;
  double u_amp = 0.1;
  int mode = 1;
  double phase_u = 0.0;
  /// Sum of modes mode, 2 mode, 3 mode weighted 1/k^2 (normalized so the
  /// amplitude bound is unchanged) instead of the single mode.
  bool multi_mode = false;

  /// Requires n_base > 0, |n_amp| < n_base and mode >= 1.
  void validate() const;
  /// Guaranteed lower bound of the initial density, n_base - |n_amp|.
  double density_floor() const noexcept;
};

struct InitialData {
  Field n0;
  Field u0;
};

InitialData make_initial(const InitParams& p, const Grid& g);

}  // namespace debye
