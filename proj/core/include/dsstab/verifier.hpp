#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsstab/certificate.hpp"
#include "dsstab/modal.hpp"
#include "dsstab/models.hpp"
#include "dsstab/trajectory.hpp"

namespace dsstab {

/// One inequality lhs ≤ rhs, evaluated at its tightest sample.
struct Check {
  std::string name;
  bool passed = false;
  /// Failure is reported but does not fail the report.
  bool warning_only = false;
  double lhs = 0.0;
  double rhs = 0.0;
  /// rhs − lhs at the tightest sample.
  double slack = 0.0;
  /// rhs/lhs at the tightest sample (+∞ when lhs = 0).
  double slack_factor = 0.0;
  std::optional<std::size_t> witness;
  std::string detail;

  bool ok() const { return passed || warning_only; }
};

struct VerificationReport {
  std::vector<Check> checks;
  /// Least-squares decay rate of ln‖x(kT)‖; absent when x₀ = 0.
  std::optional<double> sigma_meas;
  double sigma_cert = 0.0;

  bool pass() const;
  const Check* find(const std::string& name) const;
};

/// Bounds on the closed-loop mild solution: (i) ‖x‖_{L^p(0,T;X)} ≤
/// T^{1/p}/(1−ρa)‖x₀‖, (ii) ‖(S(t)x₀ − x(t))/ρ‖ ≤ M_ρ‖x₀‖ on [T,2T] and
/// (iii) ‖x(t)‖ ≤ (1 + ρa/(1−ρa))‖x₀‖, with a = T^{1/p}M. The gain comes from
/// the trajectory and must match the certificate.
VerificationReport verify_mild_bounds(const Trajectory& traj, const StabilityCertificate& cert,
                                      const Trajectory& open_loop);

/// Envelope ‖x(t)‖ ≤ Ke^{−σt}‖x₀‖, per-period ratios ≤ C₂, monotone norms
/// (a warning only when the contraction condition fails) and σ_meas ≥ σ.
VerificationReport verify_decay(const Trajectory& traj, const StabilityCertificate& cert, bool contraction_ok = true);

/// −slope of the least-squares line through (t_k, ln‖x_k‖), skipping
/// norms below 1e−150. Empty when fewer than two usable samples remain.
std::optional<double> measured_decay_rate(std::span<const double> times, std::span<const double> norms);

/// measured_decay_rate over the samples at t = kT.
std::optional<double> measured_decay_rate(const Trajectory& traj, double T);

/// Max relative X-norm error between the closed-loop solver and a dense
/// Padé matrix exponential of (A_N − ρB_N)t applied to x₀.
double oracle_expm_compare(const SpectralDiffusionModel& model, const ModalVector& x0,
                           std::span<const double> t_samples);

nlohmann::json to_json(const Check& check);
nlohmann::json to_json(const VerificationReport& report);

}  // namespace dsstab
