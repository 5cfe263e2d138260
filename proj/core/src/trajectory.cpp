#include "dsstab/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "dsstab/modal.hpp"

namespace dsstab {

Trajectory::Trajectory(std::string model_id, double gain, StateKind kind)
    : model_id_(std::move(model_id)), gain_(gain), kind_(kind) {}

void Trajectory::push_time(double t) {
  if (times_.empty()) {
    if (t != 0.0) throw std::invalid_argument("trajectory must start at t = 0");
  } else if (!(t > times_.back())) {
    throw std::invalid_argument("trajectory times must increase strictly");
  }
  times_.push_back(t);
}

void Trajectory::append(double t, Eigen::VectorXd state) {
  if (!states_.empty() && state.size() != states_.front().size()) {
    throw std::invalid_argument("trajectory state dimension changed");
  }
  if (states_.size() != times_.size()) throw std::logic_error("cannot mix norm-only and full samples");
  push_time(t);
  norms_.push_back(state_norm(state));
  states_.push_back(std::move(state));
}

void Trajectory::append_norm(double t, double norm) {
  if (!states_.empty()) throw std::logic_error("cannot mix norm-only and full samples");
  push_time(t);
  norms_.push_back(norm);
}

double Trajectory::state_norm(const Eigen::VectorXd& state) const {
  if (kind_ == StateKind::modal) return state.norm();
  const Eigen::VectorXd w = trapezoid_weights(static_cast<std::size_t>(state.size()));
  return std::sqrt((w.array() * state.array().square()).sum());
}

std::size_t Trajectory::find_time(double t) const {
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double spacing = i + 1 < times_.size() ? times_[i + 1] - times_[i] : (i > 0 ? times_[i] - times_[i - 1] : 1.0);
    if (std::abs(times_[i] - t) <= 1e-6 * spacing) return i;
  }
  return times_.size();
}

double lp_norm(const std::vector<double>& times, const std::vector<double>& norms, double p, double a, double b) {
  if (times.size() != norms.size()) throw std::invalid_argument("times and norms differ in length");
  if (!(p >= 1.0)) throw std::invalid_argument("L^p exponent must be >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double t0 = times[i];
    const double t1 = times[i + 1];
    const double slack = 1e-9 * (t1 - t0);
    if (t0 < a - slack || t1 > b + slack) continue;
    acc += 0.5 * (t1 - t0) * (std::pow(norms[i], p) + std::pow(norms[i + 1], p));
  }
  return std::pow(acc, 1.0 / p);
}

double lp_norm(const Trajectory& traj, double p, double a, double b) {
  return lp_norm(traj.times(), traj.norms(), p, a, b);
}

}  // namespace dsstab
