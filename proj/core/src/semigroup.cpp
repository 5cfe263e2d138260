#include "dsstab/semigroup.hpp"

#include <cmath>
#include <stdexcept>

namespace dsstab {
namespace {

void require_nonnegative_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("evolution time must be finite and >= 0");
}

}  // namespace

double phi_function(int k, double z) {
  if (k < 0 || k > 3) throw std::invalid_argument("phi_function supports k = 0..3");
  if (std::abs(z) < 1.0) {
    // Σ z^m/(m+k)!; 25 terms reach double precision for |z| < 1.
    double factorial = 1.0;
    for (int i = 2; i <= k; ++i) factorial *= i;
    double term = 1.0 / factorial;
    double sum = term;
    for (int m = 1; m < 25; ++m) {
      term *= z / static_cast<double>(m + k);
      sum += term;
    }
    return sum;
  }
  double phi = std::exp(z);
  double inv_factorial = 1.0;
  for (int j = 0; j < k; ++j) {
    phi = (phi - inv_factorial) / z;
    inv_factorial /= static_cast<double>(j + 1);
  }
  return phi;
}

SymmetricPropagator::SymmetricPropagator(const Eigen::MatrixXd& generator) {
  if (generator.rows() != generator.cols()) throw std::invalid_argument("generator must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(generator);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition of the generator failed");
  lambda_ = es.eigenvalues();
  q_ = es.eigenvectors();
}

Eigen::VectorXd SymmetricPropagator::apply(double t, const Eigen::VectorXd& v) const {
  require_nonnegative_time(t);
  const Eigen::VectorXd decay = (lambda_ * t).array().exp();
  return q_ * decay.cwiseProduct(q_.transpose() * v);
}

Eigen::MatrixXd SymmetricPropagator::matrix(double t) const {
  require_nonnegative_time(t);
  const Eigen::VectorXd decay = (lambda_ * t).array().exp();
  return q_ * decay.asDiagonal() * q_.transpose();
}

ModalVector diag_semigroup_apply(double t, const ModalVector& v) {
  require_nonnegative_time(t);
  const Eigen::VectorXd decay = (-t * dirichlet_eigenvalues(v.order())).array().exp();
  return ModalVector(decay.cwiseProduct(v.coefficients()));
}

ModalVector perturbed_semigroup_apply(const SpectralDiffusionModel& model, double t, const ModalVector& v) {
  require_nonnegative_time(t);
  if (v.order() != model.order()) throw std::invalid_argument("state order differs from model order");
  if (model.is_diagonal()) return diag_semigroup_apply(t, v);
  return ModalVector(SymmetricPropagator(model.generator()).apply(t, v.coefficients()));
}

Eigen::VectorXd perturbed_mode_bound(const SpectralDiffusionModel& model, double t, const ModalVector& v) {
  require_nonnegative_time(t);
  const Eigen::VectorXd alpha = dirichlet_eigenvalues(model.order());
  const Eigen::VectorXd decay = (-t * alpha).array().exp();
  const double g_inf = model.potential().sup_norm();
  const double x = v.norm();
  return (decay.array() * x + g_inf * (1.0 - decay.array()) / alpha.array() * x).matrix();
}

GridFunction transport_semigroup_apply(const TransportModel& model, double t, const GridFunction& u) {
  require_nonnegative_time(t);
  const std::size_t n = u.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (t >= 1.0) return GridFunction(std::move(out));
  const double decay = std::exp(-model.alpha() * t);
  const double tol = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = u.node(i) + t;
    if (s <= 1.0 + tol) out[static_cast<Eigen::Index>(i)] = decay * u(s);
  }
  return GridFunction(std::move(out));
}

ModalVector control_apply(const ModalVector& v) {
  return ModalVector(dirichlet_eigenvalues(v.order()).cwiseSqrt().cwiseProduct(v.coefficients()));
}

ModalVector yosida_control_apply(double lambda, const ModalVector& v) {
  if (!(lambda > 0.0)) throw std::invalid_argument("Yosida parameter lambda must be > 0");
  const Eigen::VectorXd alpha = dirichlet_eigenvalues(v.order());
  const Eigen::VectorXd multiplier = (lambda * alpha.array().sqrt() / (lambda + alpha.array())).matrix();
  return ModalVector(multiplier.cwiseProduct(v.coefficients()));
}

}  // namespace dsstab
