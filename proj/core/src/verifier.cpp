#include "dsstab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "dsstab/closed_loop.hpp"

namespace dsstab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Accumulates lhs_i ≤ rhs_i over samples and keeps the tightest one.
class Tightest {
 public:
  explicit Tightest(std::string name, bool warning_only = false) {
    check_.name = std::move(name);
    check_.warning_only = warning_only;
    check_.slack = kInf;
    check_.slack_factor = kInf;
    check_.passed = true;
  }

  void add(double lhs, double rhs, std::size_t index) {
    const double slack = rhs - lhs;
    const double factor = lhs > 0.0 ? rhs / lhs : kInf;
    const bool ok = slack >= 0.0;
    // Tightest in relative terms; absolute slack breaks ties (e.g. lhs = 0).
    const bool tighter = factor < check_.slack_factor || (factor == check_.slack_factor && slack < check_.slack);
    if (!seen_ || tighter) {
      check_.lhs = lhs;
      check_.rhs = rhs;
      check_.slack = slack;
      check_.slack_factor = factor;
      if (!ok) check_.witness = index;
    }
    seen_ = true;
    check_.passed = check_.passed && ok;
  }

  Check finish(std::string detail) {
    check_.detail = std::move(detail);
    if (!seen_) {
      check_.slack = 0.0;
      check_.detail += check_.detail.empty() ? "vacuous" : " (vacuous)";
    }
    return check_;
  }

 private:
  Check check_;
  bool seen_ = false;
};

double initial_norm(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("trajectory is empty");
  if (traj.times().front() != 0.0) throw std::invalid_argument("trajectory must start at t = 0");
  return traj.norms().front();
}

double admissibility_scale(const StabilityCertificate& cert) { return std::pow(cert.T, 1.0 / cert.p) * cert.M; }

}  // namespace

bool VerificationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok(); });
}

const Check* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

VerificationReport verify_mild_bounds(const Trajectory& traj, const StabilityCertificate& cert,
                                      const Trajectory& open_loop) {
  const double x0 = initial_norm(traj);
  if (open_loop.empty() || open_loop.kind() != traj.kind()) {
    throw std::invalid_argument("mismatched trajectories: open loop missing or of another state kind");
  }
  if (!traj.has_states() || !open_loop.has_states()) {
    throw std::invalid_argument("mild-solution bounds need full states in both trajectories");
  }
  if ((traj.states().front() - open_loop.states().front()).norm() > 1e-12 * std::max(1.0, x0)) {
    throw std::invalid_argument("mismatched trajectories: initial states differ");
  }
  const double rho = traj.gain();
  if (std::abs(rho - cert.rho) > 1e-12 * std::max(1.0, std::abs(rho))) {
    throw std::invalid_argument("mismatched gain: trajectory and certificate disagree on rho");
  }
  const double T = cert.T;
  if (traj.times().back() < 2.0 * T * (1.0 - 1e-12)) throw std::invalid_argument("trajectory must cover [0, 2T]");
  const double a = admissibility_scale(cert);
  if (!(rho * a < 1.0)) throw std::invalid_argument("rho outside the contraction range of the certificate");
  const double gap = 1.0 - rho * a;
  const double m_rho = a / gap * (2.0 + rho * a);

  VerificationReport rep;
  rep.sigma_cert = cert.sigma;

  Tightest lp("lp_bound");
  lp.add(lp_norm(traj, cert.p, 0.0, T), std::pow(T, 1.0 / cert.p) / gap * x0, 0);
  rep.checks.push_back(lp.finish("|x|_{L^p(0,T;X)} <= T^(1/p)/(1 - rho a) |x0|"));

  Tightest conv("convolution_bound");
  if (rho > 0.0) {
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.times()[i];
      if (t < T * (1.0 - 1e-12) || t > 2.0 * T * (1.0 + 1e-12)) continue;
      const std::size_t j = open_loop.find_time(t);
      if (j == open_loop.size()) throw std::invalid_argument("mismatched trajectories: open loop lacks t = " +
                                                             std::to_string(t));
      const double lhs = traj.state_norm(open_loop.states()[j] - traj.states()[i]) / rho;
      conv.add(lhs, m_rho * x0, i);
    }
  }
  rep.checks.push_back(conv.finish(rho > 0.0 ? "|(S(t)x0 - x(t))/rho| <= M_rho |x0| on [T, 2T]"
                                             : "rho = 0: the convolution term vanishes"));

  Tightest point("pointwise_bound");
  const double bound = (1.0 + rho * a / gap) * x0;
  for (std::size_t i = 0; i < traj.size(); ++i) point.add(traj.norms()[i], bound, i);
  rep.checks.push_back(point.finish("|x(t)| <= (1 + rho a/(1 - rho a)) |x0|"));
  return rep;
}

std::optional<double> measured_decay_rate(std::span<const double> times, std::span<const double> norms) {
  if (times.size() != norms.size()) throw std::invalid_argument("times and norms differ in length");
  double n = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(norms[i] > 1e-150) || !std::isfinite(norms[i])) continue;
    const double y = std::log(norms[i]);
    n += 1.0;
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
  }
  if (n < 2.0) return std::nullopt;
  const double denom = n * stt - st * st;
  if (!(denom > 0.0)) return std::nullopt;
  return -(n * sty - st * sy) / denom;
}

std::optional<double> measured_decay_rate(const Trajectory& traj, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("period T must be > 0");
  std::vector<double> t, y;
  for (std::size_t k = 0;; ++k) {
    const double tk = T * static_cast<double>(k);
    if (tk > traj.times().back() * (1.0 + 1e-12)) break;
    const std::size_t i = traj.find_time(tk);
    if (i == traj.size()) continue;
    t.push_back(traj.times()[i]);
    y.push_back(traj.norms()[i]);
  }
  return measured_decay_rate(t, y);
}

VerificationReport verify_decay(const Trajectory& traj, const StabilityCertificate& cert, bool contraction_ok) {
  if (!cert.valid) throw std::invalid_argument("invalid certificate: " + cert.reason);
  const double x0 = initial_norm(traj);
  const double T = cert.T;
  const double horizon = traj.times().back();
  const auto periods = static_cast<std::size_t>(std::floor(horizon / T * (1.0 + 1e-12)));
  if (periods < 3) throw std::invalid_argument("trajectory must cover at least three periods [0, 3T]");

  VerificationReport rep;
  rep.sigma_cert = cert.sigma;

  Tightest env("envelope");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    env.add(traj.norms()[i], cert.K * std::exp(-cert.sigma * traj.times()[i]) * x0, i);
  }
  rep.checks.push_back(env.finish("|x(t)| <= K exp(-sigma t) |x0|"));

  Tightest ratio("period_ratio");
  std::size_t missing = 0;
  for (std::size_t k = 0; k < periods; ++k) {
    const std::size_t i = traj.find_time(T * static_cast<double>(k));
    const std::size_t j = traj.find_time(T * static_cast<double>(k + 1));
    if (i == traj.size() || j == traj.size()) {
      ++missing;
      continue;
    }
    const double den = traj.norms()[i] * traj.norms()[i];
    if (den < 1e-300) continue;
    ratio.add(traj.norms()[j] * traj.norms()[j] / den, cert.C2, k);
  }
  if (missing == periods) throw std::invalid_argument("trajectory has no samples at multiples of T");
  rep.checks.push_back(ratio.finish("|x((k+1)T)|^2 / |x(kT)|^2 <= C2"));

  Tightest mono("monotone", !contraction_ok);
  const double tol = 1e-12 * x0;
  for (std::size_t i = 1; i < traj.size(); ++i) mono.add(traj.norms()[i], traj.norms()[i - 1] + tol, i);
  rep.checks.push_back(mono.finish(contraction_ok ? "|x(t)| nonincreasing"
                                                  : "|x(t)| nonincreasing (warning only: contraction condition fails)"));

  rep.sigma_meas = measured_decay_rate(traj, T);
  Tightest rate("measured_rate");
  if (rep.sigma_meas) rate.add(cert.sigma, *rep.sigma_meas, 0);
  rep.checks.push_back(rate.finish("sigma <= sigma_meas"));
  return rep;
}

double oracle_expm_compare(const SpectralDiffusionModel& model, const ModalVector& x0,
                           std::span<const double> t_samples) {
  if (model.order() > 64) throw std::invalid_argument("dense oracle limited to N <= 64");
  std::vector<double> times(t_samples.begin(), t_samples.end());
  if (times.empty() || times.front() != 0.0) times.insert(times.begin(), 0.0);
  const Trajectory traj = heat_closed_loop_sample(model, x0, times);
  const Eigen::MatrixXd a = model.closed_loop_generator();
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::MatrixXd e = (a * times[i]).exp();
    const Eigen::VectorXd ref = e * x0.coefficients();
    const double err = (traj.states()[i] - ref).norm();
    const double scale = ref.norm();
    worst = std::max(worst, scale > 0.0 ? err / scale : err);
  }
  return worst;
}

nlohmann::json to_json(const Check& c) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j{{"name", c.name},
                   {"status", c.passed ? "PASS" : (c.warning_only ? "WARN" : "FAIL")},
                   {"lhs", num(c.lhs)},
                   {"rhs", num(c.rhs)},
                   {"slack", num(c.slack)},
                   {"slack_factor", num(c.slack_factor)},
                   {"detail", c.detail}};
  j["witness"] = c.witness ? nlohmann::json(*c.witness) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  nlohmann::json j{{"status", r.pass() ? "PASS" : "FAIL"}, {"checks", checks}};
  j["sigma_cert"] = std::isfinite(r.sigma_cert) ? nlohmann::json(r.sigma_cert) : nlohmann::json(nullptr);
  if (r.sigma_meas) {
    j["sigma_meas"] = *r.sigma_meas;
    j["sigma_margin"] = *r.sigma_meas - r.sigma_cert;
  } else {
    j["sigma_meas"] = nullptr;
    j["sigma_margin"] = nullptr;
  }
  return j;
}

}  // namespace dsstab
