#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "dsstab/certificates.hpp"
#include "dsstab/semigroup.hpp"

namespace dsstab {
namespace {

void require_positive_horizon(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon T must be > 0");
}

// Eigenmodes with |λ|T above this produce ratios of order e^{2|λ|T}; they
// never limit the minimum and would overflow the quadratic form.
constexpr double kMaxExponent = 300.0;

}  // namespace

double heat_control_adjoint_norm() { return 1.0; }

ObservabilityEstimate estimate_observability_delta(const SpectralDiffusionModel& model, double T,
                                                   const EnsembleSpec& ensemble) {
  require_positive_horizon(T);
  if (model.is_diagonal()) {
    const Eigen::VectorXd alpha = dirichlet_eigenvalues(model.order());
    ObservabilityEstimate out{std::numeric_limits<double>::infinity(), Provenance::analytic, 1};
    for (Eigen::Index j = 0; j < alpha.size(); ++j) {
      const double r = std::expm1(2.0 * alpha[j] * T) / (2.0 * std::sqrt(alpha[j]));
      if (r < out.delta) {
        out.delta = r;
        out.limiting_index = static_cast<std::size_t>(j + 1);
      }
    }
    return out;
  }

  // With z = Qᵀx and w = e^{ΛT} z the ratio becomes wᵀ N w / ‖w‖² where
  // N_ik = (QᵀBQ)_ik T φ₁(−(λ_i+λ_k)T).
  const SymmetricPropagator prop(model.generator());
  const Eigen::VectorXd& lambda = prop.eigenvalues();
  const Eigen::MatrixXd bt = prop.eigenvectors().transpose() * model.control() * prop.eigenvectors();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda[i]) * T <= kMaxExponent) keep.push_back(i);
  }
  if (keep.empty()) throw std::runtime_error("observability estimate: every mode decays too fast to resolve");
  const auto k = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd n(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      const double s = lambda[keep[a]] + lambda[keep[b]];
      n(a, b) = bt(keep[a], keep[b]) * T * phi_function(1, -s * T);
    }
  }
  n = 0.5 * (n + n.transpose()).eval();

  ObservabilityEstimate out{std::numeric_limits<double>::infinity(), Provenance::estimate, 0};
  auto offer = [&](const Eigen::VectorXd& w, std::size_t index) {
    const double r = w.dot(n * w) / w.squaredNorm();
    if (std::isfinite(r) && r < out.delta) {
      out.delta = r;
      out.limiting_index = index;
    }
  };

  std::size_t index = 0;
  if (ensemble.structured) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(n);
    offer(es.eigenvectors().col(0), index++);
    for (Eigen::Index a = 0; a < k; ++a) offer(Eigen::VectorXd::Unit(k, a), index++);
  }
  std::mt19937_64 rng(ensemble.seed);
  std::normal_distribution<double> normal;
  for (std::size_t r = 0; r < ensemble.random_members; ++r, ++index) {
    Eigen::VectorXd w(k);
    for (Eigen::Index a = 0; a < k; ++a) w[a] = normal(rng) / static_cast<double>(a + 1);
    offer(w, index);
  }
  if (index == 0) throw std::invalid_argument("empty ensemble");
  return out;
}

ObservabilityEstimate estimate_observability_delta(const TransportModel& model, double T) {
  require_positive_horizon(T);
  if (T >= 1.0) {
    throw std::invalid_argument("transport observability needs T < 1: the semigroup vanishes for t >= 1");
  }
  // δ(s) = e^{2αT} ∫₀ᵀ h(s−t) e^{−2αt} dt for s ∈ [T, 1]; points s < T carry
  // no weight on the right-hand side.
  const std::size_t n = model.size();
  const double alpha = model.alpha();
  constexpr std::size_t kSteps = 2048;  // composite Simpson, even
  const double dt = T / static_cast<double>(kSteps);
  ObservabilityEstimate out{std::numeric_limits<double>::infinity(), Provenance::analytic, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double s = GridFunction::node(n, i);
    if (s < T - 1e-12) continue;
    double acc = 0.0;
    for (std::size_t m = 0; m <= kSteps; ++m) {
      const double t = dt * static_cast<double>(m);
      const double w = (m == 0 || m == kSteps) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
      acc += w * model.h()(s - t) * std::exp(-2.0 * alpha * t);
    }
    const double d = std::exp(2.0 * alpha * T) * acc * dt / 3.0;
    if (d < out.delta) {
      out.delta = d;
      out.limiting_index = i;
    }
  }
  return out;
}

}  // namespace dsstab
