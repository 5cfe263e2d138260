#include "dsstab/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace dsstab {
namespace {

double top_scaled_eigenvalue(const GridFunction& g, std::size_t order) {
  const Eigen::MatrixXd coupling = potential_coupling(g, order);
  const Eigen::VectorXd inv_sqrt = dirichlet_eigenvalues(order).array().rsqrt();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * coupling * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen solver failed in contraction check");
  return es.eigenvalues().maxCoeff();
}

// FNV-1a over a canonical text rendering.
class Fingerprint {
 public:
  void add(const char* tag) { mix(tag); }
  void add(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    mix(buf);
  }
  void add(std::size_t v) { add(static_cast<double>(v)); }
  void add(const Eigen::VectorXd& v) {
    add(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) add(v[i]);
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  void mix(const char* s) {
    for (; *s; ++s) {
      state_ ^= static_cast<unsigned char>(*s);
      state_ *= 1099511628211ULL;
    }
  }
  std::uint64_t state_ = 14695981039346656037ULL;
};

}  // namespace

Eigen::MatrixXd potential_coupling(const GridFunction& g, std::size_t order) {
  if (g.size() < 2 * order + 1) throw std::invalid_argument("grid too coarse for requested number of modes");
  const Eigen::MatrixXd phi = sine_basis(g.size(), order);
  const Eigen::VectorXd wg = trapezoid_weights(g.size()).cwiseProduct(g.values());
  Eigen::MatrixXd coupling = phi.transpose() * wg.asDiagonal() * phi;
  // Symmetric up to rounding; make it exact.
  return 0.5 * (coupling + coupling.transpose());
}

ContractionReport contraction_condition_check(const GridFunction& g, std::size_t order) {
  if (!g.values().allFinite()) throw std::invalid_argument("potential must be finite on the grid");
  ContractionReport r;
  r.mu_max = top_scaled_eigenvalue(g, order);
  r.margin = 1.0 - r.mu_max;
  r.ok = r.margin >= -kContractionTolerance;
  if (g.size() >= 4 * order + 1) {
    r.mu_max_refined = top_scaled_eigenvalue(g, 2 * order);
    r.tail_change = std::abs(r.mu_max_refined - r.mu_max) / std::max(std::abs(r.mu_max), 1.0);
  } else {
    r.mu_max_refined = std::numeric_limits<double>::quiet_NaN();
    r.tail_change = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

SpectralDiffusionModel::SpectralDiffusionModel(GridFunction potential, std::size_t order, double rho)
    : order_(order), g_(std::move(potential)), rho_(rho) {
  if (order == 0) throw std::invalid_argument("model needs at least one mode");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("feedback gain rho must be finite and >= 0");
  coupling_ = potential_coupling(g_, order_);
  contraction_ = contraction_condition_check(g_, order_);
  diagonal_ = g_.sup_norm() == 0.0;
}

Eigen::MatrixXd SpectralDiffusionModel::generator() const {
  Eigen::MatrixXd a = coupling_;
  a.diagonal() -= dirichlet_eigenvalues(order_);
  return a;
}

Eigen::MatrixXd SpectralDiffusionModel::control() const {
  return dirichlet_eigenvalues(order_).cwiseSqrt().asDiagonal();
}

Eigen::MatrixXd SpectralDiffusionModel::closed_loop_generator() const {
  Eigen::MatrixXd a = generator();
  a.diagonal() -= rho_ * dirichlet_eigenvalues(order_).cwiseSqrt();
  return a;
}

SpectralDiffusionModel SpectralDiffusionModel::with_rho(double rho) const {
  SpectralDiffusionModel copy = *this;
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("feedback gain rho must be finite and >= 0");
  copy.rho_ = rho;
  return copy;
}

TransportModel::TransportModel(GridFunction h, GridFunction f, double alpha, double epsilon)
    : h_(std::move(h)), f_(std::move(f)), alpha_(alpha), epsilon_(epsilon) {
  if (h_.size() != f_.size()) throw std::invalid_argument("h and f must share a grid");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("decay coefficient alpha must be > 0");
  if (!(h_.min() > 0.0)) throw std::invalid_argument("h must be bounded below by a positive constant");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite and >= 0");
}

double TransportModel::psi(const GridFunction& x) const { return inner_product(f_, x); }

TransportModel TransportModel::with_epsilon(double epsilon) const {
  return TransportModel(h_, f_, alpha_, epsilon);
}

std::string model_hash(const SpectralDiffusionModel& model) {
  Fingerprint fp;
  fp.add("heat;");
  fp.add(model.order());
  fp.add(model.potential().values());
  fp.add(model.rho());
  return fp.hex();
}

std::string model_hash(const TransportModel& model) {
  Fingerprint fp;
  fp.add("transport;");
  fp.add(model.alpha());
  fp.add(model.h().values());
  fp.add(model.f().values());
  fp.add(model.epsilon());
  return fp.hex();
}

}  // namespace dsstab
