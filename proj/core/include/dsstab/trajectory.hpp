#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dsstab {

enum class StateKind { modal, grid };

/// Time-sampled closed-loop states with their X-norms.
///
/// Modal states are sine coefficients (Euclidean norm); grid states are
/// nodal values on [0,1] (trapezoid L² norm). A trajectory may also be
/// norm-only, e.g. when loaded from a CSV without state columns.
class Trajectory {
 public:
  Trajectory(std::string model_id, double gain, StateKind kind);

  /// Appends a sample. Times must start at 0 and increase strictly.
  void append(double t, Eigen::VectorXd state);
  void append_norm(double t, double norm);

  const std::string& model_id() const { return model_id_; }
  double gain() const { return gain_; }
  StateKind kind() const { return kind_; }

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  bool has_states() const { return !states_.empty(); }

  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::VectorXd>& states() const { return states_; }
  const std::vector<double>& norms() const { return norms_; }

  double state_norm(const Eigen::VectorXd& state) const;

  /// Index of the sample at time t (within a relative tolerance of the
  /// local spacing), or size() when there is none.
  std::size_t find_time(double t) const;

 private:
  void push_time(double t);

  std::string model_id_;
  double gain_;
  StateKind kind_;
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> states_;
  std::vector<double> norms_;
};

/// (∫_a^b ‖x(t)‖^p dt)^{1/p} by the composite trapezoid rule over the samples
/// falling in [a, b].
double lp_norm(const Trajectory& traj, double p, double a, double b);

/// Same rule applied to an explicit sequence of norms on matching times.
double lp_norm(const std::vector<double>& times, const std::vector<double>& norms, double p, double a, double b);

}  // namespace dsstab
