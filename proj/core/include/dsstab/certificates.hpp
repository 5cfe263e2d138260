#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dsstab/certificate.hpp"
#include "dsstab/models.hpp"
#include "dsstab/trajectory.hpp"

namespace dsstab {

/// Sampling plan shared by the estimators. Members are drawn sequentially
/// from one seeded stream, so a larger plan with the same seed contains the
/// smaller one.
struct EnsembleSpec {
  std::size_t random_members = 200;
  /// Pieces of the random piecewise-constant inputs.
  std::size_t pieces = 16;
  std::uint64_t seed = 0;
  /// Include the structured per-mode inputs.
  bool structured = true;
};

struct AdmissibilityEstimate {
  /// Largest sampled ratio ‖∫₀ᵀ S₋₁(T−s)Bu(s)ds‖_X / ‖u‖_{L^p(0,T;X)}: a lower
  /// estimate of the true admissibility constant.
  double M = 0.0;
  std::size_t members = 0;
  /// Which member attained the maximum.
  std::string argmax;
};

/// Admissibility of `control` for the semigroup e^{t·generator} (symmetric
/// generator, modal coordinates).
AdmissibilityEstimate estimate_admissibility_M(const Eigen::MatrixXd& generator, const Eigen::MatrixXd& control,
                                               double T, double p, const EnsembleSpec& ensemble = {});
AdmissibilityEstimate estimate_admissibility_M(const SpectralDiffusionModel& model, double T, double p,
                                               const EnsembleSpec& ensemble = {});
/// B x = h x − ψ(x) A₋₁θ for the transport model; the X₋₁ part is folded
/// back into X through A g_T with g_T ∈ D(A).
AdmissibilityEstimate estimate_admissibility_M(const TransportModel& model, double T, double p,
                                               const EnsembleSpec& ensemble = {});

struct ObservabilityEstimate {
  double delta = 0.0;
  Provenance provenance = Provenance::analytic;
  /// Index of the limiting mode or sample.
  std::size_t limiting_index = 0;
};

/// Largest δ with ∫₀ᵀ ⟨S(t)x, B*S(t)x⟩dt ≥ δ‖S(T)x‖². Analytic for g = 0
/// (min over modes of α_j^{−1/2}(e^{2α_jT} − 1)/2), sampled estimate otherwise.
ObservabilityEstimate estimate_observability_delta(const SpectralDiffusionModel& model, double T,
                                                   const EnsembleSpec& ensemble = {});
/// Same inequality with the bounded part _XB = h·id of the transport
/// control; requires T < 1 because S(T) vanishes for T ≥ 1.
ObservabilityEstimate estimate_observability_delta(const TransportModel& model, double T);

/// ‖B*‖_{L(X₋₁,X)} for B = (−Δ)^{1/2} with the weighted X₋₁ norm: 1.
double heat_control_adjoint_norm();

/// Inputs to the certificate formulas.
struct HypothesisConstants {
  double M = 0.0;
  double delta = 0.0;
  double T = 1.0;
  double p = 2.0;
  /// ‖B*‖ (direct path) or ‖_XB‖ (decomposition path).
  double L = 1.0;
  /// Undetermined positive constant of the direct path.
  double C = 1.0;
  Provenance M_source = Provenance::estimate;
  Provenance delta_source = Provenance::analytic;
  Provenance L_source = Provenance::analytic;
  Provenance C_source = Provenance::config;
};

StabilityCertificate compute_direct_certificate(const HypothesisConstants& h, double rho);
StabilityCertificate compute_decomposition_certificate(const HypothesisConstants& h, double rho);

struct GainSearchResult {
  std::optional<double> rho1;
  /// Bracket (lo, hi) at termination; C₂(lo) < 1 ≤ C₂(hi) when hi < limit.
  double lo = 0.0;
  double hi = 0.0;
  std::size_t bisection_steps = 0;
  std::string diagnostics;
};

using CertificateFunction = std::function<StabilityCertificate(double rho)>;

/// Bisection on (0, 1/(T^{1/p}M)) for the largest ρ with C₂(ρ) < 1. The
/// set {C₂ < 1} is an interval (0, ρ*) because 2ρ(δM_ρ + C₁) is increasing.
GainSearchResult search_rho1(const CertificateFunction& certificate, double M, double T, double p,
                             double tolerance = 1e-10);

/// Same search seeded with the certificate path of the hypothesis constants.
GainSearchResult search_rho1(const HypothesisConstants& h, CertificatePath path, double tolerance = 1e-10);

struct DissipativitySample {
  double value = 0.0;  // ⟨A_m x, x⟩
  double bound = 0.0;  // (ε²‖f‖²/2 − α)‖x‖² − x(0)²/2
  double norm_sq = 0.0;
};

struct DecompositionReport {
  double epsilon = 0.0;
  /// ‖_XB‖ = sup h.
  double xb_norm = 0.0;
  /// (2α)^{1/2}/‖f‖.
  double epsilon_max = 0.0;
  bool within_threshold = false;
  /// ⟨A_m x, x⟩ ≤ 0 on every sample.
  bool dissipative = false;
  /// The upper bound on ⟨A_m x, x⟩ held on every sample.
  bool bound_holds = false;
  /// Dissipativity repeated at ε/2.
  bool dissipative_half_epsilon = false;
  std::size_t samples = 0;
  /// Largest normalized value ⟨A_m x, x⟩/‖x‖² seen.
  double worst_ratio = 0.0;
  std::optional<std::size_t> witness;
  std::optional<GridFunction> witness_state;
  bool pass() const { return dissipative && bound_holds && within_threshold; }
};

/// Checks the admissible range decomposition of the transport control:
/// bounded X-part h·id, dissipativity of the X-part of A₋₁ on the discrete
/// domain {x(1) = −εψ(x)}, and the threshold ε ≤ (2α)^{1/2}/‖f‖.
DecompositionReport check_decomposition(const TransportModel& model, const EnsembleSpec& ensemble = {});

/// ⟨A_m x, x⟩ = ∫ x'x − α‖x‖² with cellwise midpoint derivatives, which
/// integrates by parts exactly to (x(1)² − x(0)²)/2 − α‖x‖².
DissipativitySample dissipativity_sample(const TransportModel& model, const GridFunction& x);

/// Projects arbitrary nodal values onto the discrete domain by solving for x(1).
GridFunction enforce_inflow_condition(const TransportModel& model, GridFunction x);

struct BoundaryRegularityReport {
  /// g(ζ) = ∫_ζ^1 e^{−α(1−r)} ψ(u(r)) dr on the model grid.
  GridFunction g;
  double g_at_one = 0.0;
  /// max |g(ζ_{i+1}) − g(ζ_i)|/Δζ.
  double max_difference_quotient = 0.0;
  /// Discrete H¹ seminorm.
  double h1_seminorm = 0.0;
  bool ok = false;
};

/// Builds g from a state path sampled on [0,1]; ψ(u(r)) is linearly
/// interpolated in time.
BoundaryRegularityReport boundary_regularity_check(const TransportModel& model, const Trajectory& path);
/// Same, from ψ(u(r)) already sampled at increasing times covering [0,1].
BoundaryRegularityReport boundary_regularity_check(const TransportModel& model, const std::vector<double>& times,
                                                   const std::vector<double>& psi_values);

}  // namespace dsstab
