#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "dsstab/certificates.hpp"

namespace dsstab {

GridFunction enforce_inflow_condition(const TransportModel& model, GridFunction x) {
  const std::size_t n = model.size();
  if (x.size() != n) throw std::invalid_argument("state grid differs from model grid");
  const Eigen::VectorXd wf = trapezoid_weights(n).cwiseProduct(model.f().values());
  const auto last = static_cast<Eigen::Index>(n - 1);
  const double eps = model.epsilon();
  Eigen::VectorXd v = x.values();
  v[last] = -eps * wf.head(last).dot(v.head(last)) / (1.0 + eps * wf[last]);
  return GridFunction(std::move(v));
}

DissipativitySample dissipativity_sample(const TransportModel& model, const GridFunction& x) {
  if (x.size() != model.size()) throw std::invalid_argument("state grid differs from model grid");
  const Eigen::VectorXd& v = x.values();
  const double dz = x.spacing();
  double derivative_term = 0.0;
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) {
    derivative_term += (v[i + 1] - v[i]) / dz * 0.5 * (v[i] + v[i + 1]) * dz;
  }
  const double norm_sq = x.norm() * x.norm();
  const double f_norm = model.f().norm();
  const double eps = model.epsilon();
  DissipativitySample s;
  s.norm_sq = norm_sq;
  s.value = derivative_term - model.alpha() * norm_sq;
  s.bound = (eps * eps * f_norm * f_norm / 2.0 - model.alpha()) * norm_sq - 0.5 * v[0] * v[0];
  return s;
}

namespace {

std::vector<GridFunction> decomposition_ensemble(const TransportModel& model, const EnsembleSpec& ensemble) {
  const std::size_t n = model.size();
  std::vector<GridFunction> raw;
  if (ensemble.structured) {
    raw.push_back(GridFunction::constant(n, 1.0));
    raw.push_back(model.f());
    raw.push_back(GridFunction::sample(n, [](double z) { return 1.0 - z; }));
  }
  std::mt19937_64 rng(ensemble.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t r = 0; r < ensemble.random_members; ++r) {
    switch (r % 3) {
      case 0: {  // iid nodal noise
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (auto& x : v) x = normal(rng);
        raw.emplace_back(std::move(v));
        break;
      }
      case 1: {  // constant offset plus a few cosines
        const double offset = normal(rng);
        double c[4];
        for (double& ci : c) ci = normal(rng);
        raw.push_back(GridFunction::sample(n, [&](double z) {
          double v = offset;
          for (int k = 0; k < 4; ++k) v += c[k] * std::cos((k + 1) * kPi * z);
          return v;
        }));
        break;
      }
      default: {  // f-aligned ramp: large ψ relative to ‖x‖
        const double slope = unit(rng);
        const double scale = normal(rng);
        Eigen::VectorXd v = model.f().values();
        for (std::size_t i = 0; i < n; ++i) {
          v[static_cast<Eigen::Index>(i)] *= scale * (1.0 - slope * GridFunction::node(n, i));
        }
        raw.emplace_back(std::move(v));
        break;
      }
    }
  }
  if (raw.empty()) throw std::invalid_argument("empty ensemble");
  return raw;
}

void check_constraint(const TransportModel& model, const GridFunction& x) {
  const double b = x[x.size() - 1];
  const double target = -model.epsilon() * model.psi(x);
  if (std::abs(b - target) > 1e-12 * std::max({1.0, std::abs(b), x.sup_norm()})) {
    throw std::logic_error("ensemble member violates x(1) = -epsilon psi(x)");
  }
}

}  // namespace

DecompositionReport check_decomposition(const TransportModel& model, const EnsembleSpec& ensemble) {
  DecompositionReport rep;
  rep.epsilon = model.epsilon();
  rep.xb_norm = model.h().max();
  const double f_norm = model.f().norm();
  if (!(f_norm > 0.0)) throw std::invalid_argument("psi must be a non-null functional (f != 0)");
  rep.epsilon_max = std::sqrt(2.0 * model.alpha()) / f_norm;
  rep.within_threshold = rep.epsilon <= rep.epsilon_max;

  const std::vector<GridFunction> raw = decomposition_ensemble(model, ensemble);
  rep.samples = raw.size();
  rep.dissipative = true;
  rep.bound_holds = true;
  rep.worst_ratio = -std::numeric_limits<double>::infinity();
  const TransportModel half = model.with_epsilon(0.5 * model.epsilon());
  rep.dissipative_half_epsilon = true;

  for (std::size_t k = 0; k < raw.size(); ++k) {
    const GridFunction x = enforce_inflow_condition(model, raw[k]);
    check_constraint(model, x);
    const DissipativitySample s = dissipativity_sample(model, x);
    if (!(s.norm_sq > 0.0)) continue;
    const double tol = 1e-12 * s.norm_sq;
    if (s.value > s.bound + tol) rep.bound_holds = false;
    const double ratio = s.value / s.norm_sq;
    if (ratio > rep.worst_ratio) rep.worst_ratio = ratio;
    if (s.value > tol && rep.dissipative) {
      rep.dissipative = false;
      rep.witness = k;
      rep.witness_state = x;
    }
    const GridFunction xh = enforce_inflow_condition(half, raw[k]);
    check_constraint(half, xh);
    const DissipativitySample sh = dissipativity_sample(half, xh);
    if (sh.value > 1e-12 * sh.norm_sq) rep.dissipative_half_epsilon = false;
  }
  return rep;
}

BoundaryRegularityReport boundary_regularity_check(const TransportModel& model, const std::vector<double>& times,
                                                   const std::vector<double>& psi_values) {
  if (times.size() != psi_values.size() || times.size() < 2) {
    throw std::invalid_argument("boundary regularity needs matching time and psi samples");
  }
  if (times.front() > 1e-12 || times.back() < 1.0 - 1e-12) {
    throw std::invalid_argument("state path must be sampled on [0, 1]");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("sample times must increase strictly");
  }
  auto psi_at = [&](double r) {
    const auto it = std::upper_bound(times.begin(), times.end(), r);
    if (it == times.begin()) return psi_values.front();
    if (it == times.end()) return psi_values.back();
    const auto k = static_cast<std::size_t>(it - times.begin());
    const double w = (r - times[k - 1]) / (times[k] - times[k - 1]);
    return (1.0 - w) * psi_values[k - 1] + w * psi_values[k];
  };

  const std::size_t n = model.size();
  const double dz = 1.0 / static_cast<double>(n - 1);
  Eigen::VectorXd integrand(static_cast<Eigen::Index>(n));
  double psi_sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = GridFunction::node(n, i);
    const double v = psi_at(r);
    psi_sup = std::max(psi_sup, std::abs(v));
    integrand[static_cast<Eigen::Index>(i)] = std::exp(-model.alpha() * (1.0 - r)) * v;
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (auto i = static_cast<Eigen::Index>(n) - 2; i >= 0; --i) {
    g[i] = g[i + 1] + 0.5 * dz * (integrand[i] + integrand[i + 1]);
  }

  BoundaryRegularityReport rep;
  rep.g_at_one = g[static_cast<Eigen::Index>(n) - 1];
  double h1 = 0.0;
  for (Eigen::Index i = 0; i + 1 < g.size(); ++i) {
    const double q = (g[i + 1] - g[i]) / dz;
    rep.max_difference_quotient = std::max(rep.max_difference_quotient, std::abs(q));
    h1 += q * q * dz;
  }
  rep.h1_seminorm = std::sqrt(h1);
  rep.g = GridFunction(std::move(g));
  // |g'| = e^{−α(1−ζ)}|ψ(u(ζ))| ≤ sup|ψ∘u|.
  rep.ok = rep.g_at_one == 0.0 && std::isfinite(rep.max_difference_quotient) &&
           rep.max_difference_quotient <= psi_sup * (1.0 + 1e-9) + 1e-300;
  return rep;
}

BoundaryRegularityReport boundary_regularity_check(const TransportModel& model, const Trajectory& path) {
  if (path.kind() != StateKind::grid || !path.has_states()) {
    throw std::invalid_argument("boundary regularity needs a grid trajectory with states");
  }
  std::vector<double> psi;
  psi.reserve(path.size());
  for (const auto& s : path.states()) psi.push_back(model.psi(GridFunction(s)));
  return boundary_regularity_check(model, path.times(), psi);
}

}  // namespace dsstab
