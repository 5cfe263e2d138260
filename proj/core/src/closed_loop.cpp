#include "dsstab/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "dsstab/semigroup.hpp"

namespace dsstab {
namespace {

std::size_t output_count(double t_end, double dt_out) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be > 0");
  if (!(dt_out > 0.0) || dt_out > t_end) throw std::invalid_argument("dt_out must lie in (0, t_end]");
  const double ratio = t_end / dt_out;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-9 * ratio) {
    throw std::invalid_argument("dt_out must divide t_end");
  }
  return static_cast<std::size_t>(k);
}

// Graded near t = 0 so the stiffest mode is resolved, uniform afterwards.
std::vector<double> picard_grid(double T, std::size_t steps, double stiffest_rate) {
  if (steps < 2) throw std::invalid_argument("Picard grid needs at least 2 steps");
  const double h_uniform = T / static_cast<double>(steps);
  std::vector<double> t{0.0};
  double h = stiffest_rate > 0.0 ? std::min(h_uniform, 0.05 / stiffest_rate) : h_uniform;
  while (h < h_uniform && t.back() + h < T) {
    t.push_back(t.back() + h);
    h *= 1.15;
  }
  const double remaining = T - t.back();
  const auto n_uniform = static_cast<std::size_t>(std::max(1.0, std::ceil(remaining / h_uniform - 1e-9)));
  const double start = t.back();
  for (std::size_t k = 1; k <= n_uniform; ++k) {
    t.push_back(k == n_uniform ? T : start + remaining * static_cast<double>(k) / static_cast<double>(n_uniform));
  }
  if (t.size() < 3) throw std::invalid_argument("Picard grid too coarse");
  return t;
}

double lp_distance(const std::vector<double>& times, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double p) {
  std::vector<double> norms(times.size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    norms[m] = (a.col(static_cast<Eigen::Index>(m)) - b.col(static_cast<Eigen::Index>(m))).norm();
  }
  return lp_norm(times, norms, p, times.front(), times.back());
}

}  // namespace

Trajectory heat_closed_loop_sample(const SpectralDiffusionModel& model, const ModalVector& x0,
                                   std::span<const double> times) {
  if (x0.order() != model.order()) throw std::invalid_argument("initial state order differs from model order");
  if (times.empty() || times.front() != 0.0) throw std::invalid_argument("sample times must start at 0");
  const SymmetricPropagator closed(model.closed_loop_generator());
  std::optional<SymmetricPropagator> open;

  Trajectory traj(model_hash(model), model.rho(), StateKind::modal);
  const double cutoff = kSwitchingThreshold * x0.norm();
  bool switched = false;
  double t_switch = 0.0;
  Eigen::VectorXd x_switch;
  for (double t : times) {
    Eigen::VectorXd x;
    if (!switched) {
      x = closed.apply(t, x0.coefficients());
      if (x.norm() <= cutoff) {
        switched = true;
        t_switch = t;
        x_switch = x;
      }
    } else {
      if (!open) open.emplace(model.generator());
      x = open->apply(t - t_switch, x_switch);
    }
    traj.append(t, std::move(x));
  }
  return traj;
}

Trajectory heat_closed_loop_solve(const SpectralDiffusionModel& model, const ModalVector& x0, double t_end,
                                  double dt_out) {
  const std::size_t k = output_count(t_end, dt_out);
  std::vector<double> times(k + 1);
  for (std::size_t i = 0; i <= k; ++i) times[i] = t_end * static_cast<double>(i) / static_cast<double>(k);
  return heat_closed_loop_sample(model, x0, times);
}

PicardResult vpf_fixed_point_solve(const SpectralDiffusionModel& model, const ModalVector& x0, double T,
                                   std::size_t iterations, const PicardOptions& options) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be > 0");
  if (x0.order() != model.order()) throw std::invalid_argument("initial state order differs from model order");
  if (iterations == 0) throw std::invalid_argument("at least one Picard iteration is required");

  const SymmetricPropagator open(model.generator());
  const Eigen::VectorXd& lambda = open.eigenvalues();
  const Eigen::MatrixXd& q = open.eigenvectors();
  const Eigen::MatrixXd qt_control = q.transpose() * model.control();

  const std::vector<double> times = picard_grid(T, options.steps, lambda.cwiseAbs().maxCoeff());
  const std::size_t n_times = times.size();
  const Eigen::Index dim = lambda.size();

  // Per-interval exponential weights for ∫_0^h e^{λ(h−τ)} τ^k dτ / h^{k+1}.
  Eigen::MatrixXd e(dim, n_times - 1), f1(dim, n_times - 1), f2(dim, n_times - 1), f3(dim, n_times - 1);
  for (std::size_t m = 0; m + 1 < n_times; ++m) {
    const double h = times[m + 1] - times[m];
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double mu = lambda[i] * h;
      const auto c = static_cast<Eigen::Index>(m);
      e(i, c) = std::exp(mu);
      f1(i, c) = phi_function(1, mu);
      f2(i, c) = phi_function(2, mu);
      f3(i, c) = phi_function(3, mu);
    }
  }

  Eigen::MatrixXd open_loop(dim, static_cast<Eigen::Index>(n_times));
  for (std::size_t m = 0; m < n_times; ++m) {
    open_loop.col(static_cast<Eigen::Index>(m)) = open.apply(times[m], x0.coefficients());
  }

  PicardResult result{Trajectory(model_hash(model), model.rho(), StateKind::modal), {}, {}, 0, false};
  Eigen::MatrixXd x = open_loop;
  Eigen::MatrixXd conv(dim, static_cast<Eigen::Index>(n_times));
  std::size_t growth_streak = 0;

  for (std::size_t it = 0; it < iterations; ++it) {
    const Eigen::MatrixXd w = qt_control * x;
    conv.col(0).setZero();
    for (std::size_t m = 0; m + 1 < n_times; ++m) {
      const auto c = static_cast<Eigen::Index>(m);
      const double h = times[m + 1] - times[m];
      Eigen::VectorXd a1, a2;
      if (m == 0) {
        const double r = (times[2] - times[1]) / h;
        a2 = (w.col(2) - w.col(0) - (1.0 + r) * (w.col(1) - w.col(0))) / ((1.0 + r) * r);
        a1 = w.col(1) - w.col(0) - a2;
      } else {
        const double r = (times[m] - times[m - 1]) / h;
        a2 = (w.col(c - 1) - w.col(c) + r * (w.col(c + 1) - w.col(c))) / (r * (1.0 + r));
        a1 = w.col(c + 1) - w.col(c) - a2;
      }
      conv.col(c + 1) = e.col(c).cwiseProduct(conv.col(c)) +
                        h * (w.col(c).cwiseProduct(f1.col(c)) + a1.cwiseProduct(f2.col(c)) +
                             2.0 * a2.cwiseProduct(f3.col(c)));
    }
    Eigen::MatrixXd next = open_loop - model.rho() * (q * conv);
    const double increment = lp_distance(times, next, x, options.p);
    const double scale = lp_distance(times, next, Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(n_times)), options.p);
    if (!result.increments.empty()) {
      const double prev = result.increments.back();
      result.ratios.push_back(prev > 0.0 ? increment / prev : 0.0);
      growth_streak = increment > prev ? growth_streak + 1 : 0;
    }
    result.increments.push_back(increment);
    x = std::move(next);
    result.iterations = it + 1;
    if (growth_streak >= 3) {
      throw DivergenceError("Picard increments grew for 3 consecutive iterations (rho = " +
                            std::to_string(model.rho()) + " is outside the contraction regime)");
    }
    if (increment <= options.tolerance * scale) {
      result.converged = true;
      break;
    }
  }

  for (std::size_t m = 0; m < n_times; ++m) result.trajectory.append(times[m], x.col(static_cast<Eigen::Index>(m)));
  return result;
}

Trajectory transport_closed_loop_solve(const TransportModel& model, const GridFunction& x0, double t_end,
                                       double dt_out, const TransportOptions& options) {
  if (x0.size() != model.size()) throw std::invalid_argument("initial state grid differs from model grid");
  if (!(options.courant > 0.0) || options.courant > 1.0 + 1e-12) {
    throw std::invalid_argument("CFL violation: courant number must lie in (0, 1]");
  }
  const std::size_t n_out = output_count(t_end, dt_out);
  const std::size_t n = model.size();
  const double dz = 1.0 / static_cast<double>(n - 1);
  const auto sub = static_cast<std::size_t>(std::ceil(dt_out / (options.courant * dz) - 1e-9));
  const double dt = dt_out / static_cast<double>(sub);
  const double nu = dt / dz;
  if (nu > 1.0 + 1e-12) throw std::invalid_argument("CFL violation: dt exceeds the grid spacing");

  const Eigen::VectorXd w = trapezoid_weights(n);
  const Eigen::VectorXd wf = w.cwiseProduct(model.f().values());
  const Eigen::VectorXd reaction = (model.alpha() + model.epsilon() * model.h().values().array()).matrix();
  const double eps = model.epsilon();
  const auto last = static_cast<Eigen::Index>(n - 1);

  Trajectory traj(model_hash(model), eps, StateKind::grid);
  Eigen::VectorXd x = x0.values();
  Eigen::VectorXd next(x.size());
  auto record = [&](double t) {
    if (options.keep_states) {
      traj.append(t, x);
    } else {
      traj.append_norm(t, traj.state_norm(x));
    }
  };
  record(0.0);
  for (std::size_t k = 1; k <= n_out; ++k) {
    for (std::size_t s = 0; s < sub; ++s) {
      next.head(last) = x.head(last) + nu * (x.segment(1, last) - x.head(last)) -
                        dt * reaction.head(last).cwiseProduct(x.head(last));
      // x_b = −ε(Σ_{i<b} w_i f_i x_i + w_b f_b x_b), solved for x_b.
      const double interior = wf.head(last).dot(next.head(last));
      next[last] = -eps * interior / (1.0 + eps * wf[last]);
      x.swap(next);
    }
    record(t_end * static_cast<double>(k) / static_cast<double>(n_out));
  }
  return traj;
}

}  // namespace dsstab
