#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsstab/certificates.hpp"
#include "dsstab/semigroup.hpp"

namespace dsstab {
namespace {

void require_horizon(double T, double p) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon T must be > 0");
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must satisfy 1 < p < inf");
}

void require_members(const EnsembleSpec& e) {
  if (e.random_members == 0 && !e.structured) throw std::invalid_argument("empty ensemble");
  if (e.random_members > 0 && e.pieces == 0) throw std::invalid_argument("ensemble pieces must be >= 1");
}

struct Best {
  double value = 0.0;
  std::string label;
  std::size_t count = 0;

  void offer(double output_norm, double input_norm, const std::string& label_) {
    ++count;
    if (!(input_norm > 0.0)) return;
    const double r = output_norm / input_norm;
    if (std::isfinite(r) && r > value) {
      value = r;
      label = label_;
    }
  }
};

// Modal variant: everything reduces to scalar integrals in the eigenbasis of
// the generator.
class ModalConvolution {
 public:
  ModalConvolution(const Eigen::MatrixXd& generator, const Eigen::MatrixXd& control, double T)
      : prop_(generator), qt_b_(prop_.eigenvectors().transpose() * control), T_(T) {}

  const Eigen::VectorXd& lambda() const { return prop_.eigenvalues(); }
  const Eigen::MatrixXd& q() const { return prop_.eigenvectors(); }
  Eigen::Index dim() const { return prop_.dimension(); }

  // ‖∫₀ᵀ e^{A(T−s)} B e^{β(T−s)} v ds‖.
  double exponential_output(double beta, const Eigen::VectorXd& v) const {
    Eigen::VectorXd w(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) w[i] = T_ * phi_function(1, (lambda()[i] + beta) * T_);
    return w.cwiseProduct(qt_b_ * v).norm();
  }

  // Piecewise-constant input v_k on [kT/P, (k+1)T/P).
  double piecewise_output(const std::vector<Eigen::VectorXd>& pieces) const {
    const auto P = static_cast<double>(pieces.size());
    const double h = T_ / P;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim());
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const double t_end = h * static_cast<double>(k + 1);
      const Eigen::VectorXd bv = qt_b_ * pieces[k];
      for (Eigen::Index i = 0; i < dim(); ++i) {
        const double l = lambda()[i];
        acc[i] += std::exp(l * (T_ - t_end)) * h * phi_function(1, l * h) * bv[i];
      }
    }
    return acc.norm();
  }

 private:
  SymmetricPropagator prop_;
  Eigen::MatrixXd qt_b_;
  double T_;
};

// (∫₀ᵀ e^{pβ(T−s)} ds)^{1/p}.
double exponential_lp_weight(double beta, double T, double p) {
  return std::pow(T * phi_function(1, p * beta * T), 1.0 / p);
}

double piecewise_lp_norm(const std::vector<double>& piece_norms, double T, double p) {
  const double h = T / static_cast<double>(piece_norms.size());
  double s = 0.0;
  for (double n : piece_norms) s += h * std::pow(n, p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

AdmissibilityEstimate estimate_admissibility_M(const Eigen::MatrixXd& generator, const Eigen::MatrixXd& control,
                                               double T, double p, const EnsembleSpec& ensemble) {
  require_horizon(T, p);
  require_members(ensemble);
  if (generator.rows() != control.rows()) throw std::invalid_argument("generator and control sizes differ");
  const ModalConvolution conv(generator, control, T);
  const Eigen::Index n = conv.dim();
  const Eigen::Index m = control.cols();
  const double q_exp = p / (p - 1.0);
  Best best;

  if (ensemble.structured) {
    const Eigen::VectorXd alpha = dirichlet_eigenvalues(static_cast<std::size_t>(std::max<Eigen::Index>(m, 1)));
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::VectorXd e = Eigen::VectorXd::Unit(m, j);
      const std::string tag = std::to_string(j + 1);
      best.offer(conv.exponential_output(0.0, e), exponential_lp_weight(0.0, T, p), "constant:" + tag);
      for (double beta : {-alpha[j], -(q_exp - 1.0) * alpha[j]}) {
        best.offer(conv.exponential_output(beta, e), exponential_lp_weight(beta, T, p), "matched:" + tag);
      }
    }
    if (m == n) {
      // Eigenvectors of the generator, time-matched to their own eigenvalue.
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd v = conv.q().col(i);
        const double l = conv.lambda()[i];
        const std::string tag = std::to_string(i);
        best.offer(conv.exponential_output(0.0, v), exponential_lp_weight(0.0, T, p), "eigen-constant:" + tag);
        for (double beta : {l, (q_exp - 1.0) * l}) {
          best.offer(conv.exponential_output(beta, v), exponential_lp_weight(beta, T, p), "eigen-matched:" + tag);
        }
      }
    }
  }

  std::mt19937_64 rng(ensemble.seed);
  std::normal_distribution<double> normal;
  for (std::size_t r = 0; r < ensemble.random_members; ++r) {
    std::vector<Eigen::VectorXd> pieces(ensemble.pieces);
    std::vector<double> norms(ensemble.pieces);
    for (std::size_t k = 0; k < ensemble.pieces; ++k) {
      Eigen::VectorXd v(m);
      for (Eigen::Index j = 0; j < m; ++j) v[j] = normal(rng) / static_cast<double>(j + 1);
      norms[k] = v.norm();
      pieces[k] = std::move(v);
    }
    best.offer(conv.piecewise_output(pieces), piecewise_lp_norm(norms, T, p), "random:" + std::to_string(r));
  }

  return {best.value, best.count, best.label};
}

AdmissibilityEstimate estimate_admissibility_M(const SpectralDiffusionModel& model, double T, double p,
                                               const EnsembleSpec& ensemble) {
  return estimate_admissibility_M(model.generator(), model.control(), T, p, ensemble);
}

namespace {

// Five-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr double kGaussX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
constexpr double kGaussW[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};

// y = ∫₀ᵀ S₋₁(T−s) B u(s) ds for B x = h x − ψ(x) A₋₁θ and u piecewise
// constant in time. With g_T(ζ) = ∫ e^{−α(T−s)} 1{ζ+T−s ≤ 1} ψ(u(s)) ds the
// θ-part equals −A g_T = −g_T' + α g_T.
GridFunction transport_convolution(const TransportModel& model, double T, const std::vector<GridFunction>& pieces) {
  const std::size_t n = model.size();
  const double alpha = model.alpha();
  const double h = T / static_cast<double>(pieces.size());
  std::vector<GridFunction> hu;
  std::vector<double> psi;
  hu.reserve(pieces.size());
  for (const auto& u : pieces) {
    hu.emplace_back(model.h().values().cwiseProduct(u.values()));
    psi.push_back(model.psi(u));
  }

  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double zeta = GridFunction::node(n, i);
    const double s_min = zeta + T - 1.0;  // S(T−s) keeps ζ only for s ≥ s_min
    double bounded = 0.0;
    double g = 0.0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const double a = std::max(h * static_cast<double>(k), s_min);
      const double b = h * static_cast<double>(k + 1);
      if (!(b > a)) continue;
      const double mid = 0.5 * (a + b);
      const double half = 0.5 * (b - a);
      for (int q = 0; q < 5; ++q) {
        const double s = mid + half * kGaussX[q];
        bounded += half * kGaussW[q] * std::exp(-alpha * (T - s)) * hu[k](zeta + T - s);
      }
      g += psi[k] * (std::exp(-alpha * (T - b)) - std::exp(-alpha * (T - a))) / alpha;
    }
    double inflow = 0.0;
    if (s_min > 0.0) {
      const auto k = std::min(pieces.size() - 1, static_cast<std::size_t>(s_min / h));
      inflow = std::exp(-alpha * (1.0 - zeta)) * psi[k];
    }
    y[static_cast<Eigen::Index>(i)] = bounded + inflow + alpha * g;
  }
  return GridFunction(std::move(y));
}

}  // namespace

AdmissibilityEstimate estimate_admissibility_M(const TransportModel& model, double T, double p,
                                               const EnsembleSpec& ensemble) {
  require_horizon(T, p);
  require_members(ensemble);
  const std::size_t n = model.size();
  const std::size_t P = std::max<std::size_t>(ensemble.pieces, 1);
  Best best;

  auto constant_member = [&](const GridFunction& u, const std::string& label) {
    const std::vector<GridFunction> pieces(P, u);
    best.offer(transport_convolution(model, T, pieces).norm(), std::pow(T, 1.0 / p) * u.norm(), label);
  };

  constexpr std::size_t kSines = 8;
  if (ensemble.structured) {
    constant_member(GridFunction::constant(n, 1.0), "constant:one");
    if (model.f().norm() > 0.0) constant_member(model.f(), "constant:f");
    for (std::size_t j = 1; j <= kSines; ++j) {
      constant_member(GridFunction::sample(n, [j](double z) { return std::sqrt(2.0) * std::sin(j * kPi * z); }),
                      "constant:sine" + std::to_string(j));
    }
  }

  const Eigen::MatrixXd basis = sine_basis(n, kSines);
  std::mt19937_64 rng(ensemble.seed);
  std::normal_distribution<double> normal;
  for (std::size_t r = 0; r < ensemble.random_members; ++r) {
    std::vector<GridFunction> pieces;
    std::vector<double> norms;
    for (std::size_t k = 0; k < P; ++k) {
      Eigen::VectorXd c(static_cast<Eigen::Index>(kSines));
      for (auto& v : c) v = normal(rng);
      Eigen::VectorXd values = basis * c;
      values.array() += normal(rng);
      pieces.emplace_back(std::move(values));
      norms.push_back(pieces.back().norm());
    }
    best.offer(transport_convolution(model, T, pieces).norm(), piecewise_lp_norm(norms, T, p),
               "random:" + std::to_string(r));
  }
  return {best.value, best.count, best.label};
}

}  // namespace dsstab
