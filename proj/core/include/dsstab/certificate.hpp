#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace dsstab {

/// Where a constant came from.
enum class Provenance {
  analytic,  // closed form or exact formula evaluation
  estimate,  // sampled lower/upper estimate, not a proof
  config,    // supplied by the user
};

enum class CertificatePath {
  direct,         // observability of B* itself
  decomposition,  // observability of the bounded X-part of B
};

std::string to_string(Provenance p);
std::string to_string(CertificatePath p);
Provenance provenance_from_string(const std::string& s);
CertificatePath path_from_string(const std::string& s);

/// Hypothesis constants and every derived constant of an exponential
/// stability certificate ‖x(t)‖ ≤ K e^{−σt} ‖x₀‖.
///
/// On the decomposition path `L` holds ‖_XB‖ and `C` is unused (NaN).
struct StabilityCertificate {
  CertificatePath path = CertificatePath::direct;

  double T = 0.0;
  double p = 2.0;
  double M = 0.0;
  double delta = 0.0;
  double L = 1.0;
  double C = 1.0;
  double rho = 0.0;

  double M_rho = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double K = 0.0;
  double sigma = 0.0;
  std::optional<double> rho1;

  Provenance M_source = Provenance::estimate;
  Provenance delta_source = Provenance::analytic;
  Provenance L_source = Provenance::analytic;
  Provenance C_source = Provenance::config;

  /// True when ρ lies in the contraction range and C₂ ∈ (0,1).
  bool valid = false;
  std::string reason;

  /// T^{1/p} M.
  double admissibility_scale() const;
  /// 1/(T^{1/p} M); +∞ when M = 0.
  double contraction_limit() const;
};

nlohmann::json to_json(const StabilityCertificate& cert);
StabilityCertificate certificate_from_json(const nlohmann::json& j);

}  // namespace dsstab
