#include "debye/poisson_boltzmann.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace debye {

void PBSolveOptions::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("pb tol must be positive");
  if (max_newton_iters < 1) throw std::invalid_argument("pb max_newton_iters must be >= 1");
  if (!(damping_min > 0.0 && damping_min <= 1.0)) throw std::invalid_argument("pb damping_min must lie in (0, 1]");
}

namespace {

// Dense spectral second-derivative matrix, built column by column from the
// same transform path as derivative(), so both stay consistent.
const Eigen::MatrixXd& second_derivative_matrix(const Grid& g) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const Eigen::MatrixXd>> cache;

  std::lock_guard lock(mutex);
  auto& slot = cache[g.size()];
  if (!slot) {
    const auto n = static_cast<Eigen::Index>(g.size());
    auto d2 = std::make_shared<Eigen::MatrixXd>(n, n);
    Field unit(g);
    for (Eigen::Index j = 0; j < n; ++j) {
      unit[static_cast<std::size_t>(j)] = 1.0;
      const Field col = derivative(unit, 2);
      for (Eigen::Index i = 0; i < n; ++i) (*d2)(i, j) = col[static_cast<std::size_t>(i)];
      unit[static_cast<std::size_t>(j)] = 0.0;
    }
    // Exactly symmetric in exact arithmetic (real, even circulant symbol).
    *d2 = 0.5 * (*d2 + d2->transpose());
    slot = std::move(d2);
  }
  return *slot;
}

void require_positive_density(const Field& n, const char* op) {
  if (!n.all_finite()) throw std::domain_error(std::string(op) + ": density has non-finite entries");
  if (!(n.min() > 0.0))
    throw std::domain_error(std::string(op) + ": density must be strictly positive (min = " + std::to_string(n.min()) +
                            ")");
}

}  // namespace

Field pb_residual(const Field& phi, const Field& n, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("pb_residual: eps must be non-negative");
  Field r = n - phi.map([](double v) { return std::exp(v); });
  if (eps > 0.0) r += eps * derivative(phi, 2);
  return dealias(r);
}

PBSolution solve_phi(const Field& n, double eps, const PBSolveOptions& opts, const std::optional<Field>& phi_init) {
  opts.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("solve_phi: eps must be positive (use solve_phi_limit for eps = 0)");
  require_positive_density(n, "solve_phi");
  if (phi_init && !(phi_init->grid() == n.grid())) throw std::invalid_argument("solve_phi: initial guess grid mismatch");

  const Grid& g = n.grid();
  const auto size = static_cast<Eigen::Index>(g.size());
  const Eigen::MatrixXd& d2 = second_derivative_matrix(g);

  Field phi = phi_init ? *phi_init : solve_phi_limit(n);
  Field res = pb_residual(phi, n, eps);
  double res_l2 = l2_norm(res);

  Eigen::MatrixXd jac(size, size);
  Eigen::LLT<Eigen::MatrixXd> llt(size);
  for (int iter = 1; iter <= opts.max_newton_iters; ++iter) {
    // Newton: (eps D2 - diag(e^phi)) delta = -F, i.e. (diag(e^phi) - eps D2) delta = F,
    // whose matrix is symmetric positive definite.
    jac.noalias() = -eps * d2;
    for (Eigen::Index i = 0; i < size; ++i) jac(i, i) += std::exp(phi[static_cast<std::size_t>(i)]);
    llt.compute(jac);
    if (llt.info() != Eigen::Success)
      throw PBConvergenceError("solve_phi: Newton matrix is not positive definite", res_l2, iter);

    const Eigen::Map<const Eigen::VectorXd> rhs(res.values().data(), size);
    const Eigen::VectorXd delta = llt.solve(rhs);

    double lambda = 1.0;
    for (;;) {
      Field trial = phi;
      for (Eigen::Index i = 0; i < size; ++i) trial[static_cast<std::size_t>(i)] += lambda * delta(i);
      Field trial_res = pb_residual(trial, n, eps);
      const double trial_l2 = l2_norm(trial_res);
      if (trial_l2 < res_l2 || trial_l2 <= opts.tol) {
        phi = std::move(trial);
        res = std::move(trial_res);
        res_l2 = trial_l2;
        break;
      }
      lambda *= 0.5;
      if (lambda < opts.damping_min)
        throw PBConvergenceError("solve_phi: line search failed to reduce the residual (residual " +
                                     std::to_string(res_l2) + ")",
                                 res_l2, iter);
    }
    if (res_l2 <= opts.tol) return PBSolution{std::move(phi), res_l2, iter};
  }
  throw PBConvergenceError("solve_phi: no convergence after " + std::to_string(opts.max_newton_iters) +
                               " Newton iterations (residual " + std::to_string(res_l2) + ")",
                           res_l2, opts.max_newton_iters);
}

Field solve_phi_limit(const Field& n) {
  require_positive_density(n, "solve_phi_limit");
  return n.map([](double v) { return std::log(v); });
}

}  // namespace debye
