#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "dsstab/certificate.hpp"
#include "dsstab/certificates.hpp"
#include "dsstab/trajectory.hpp"

namespace dsstab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> trajectory;
  std::optional<std::string> certificate;
};

/// Hypothesis constants, gain search and the certificate at the chosen gain.
struct CertifyOutcome {
  HypothesisConstants constants;
  AdmissibilityEstimate M_estimate;
  ObservabilityEstimate delta_estimate;
  GainSearchResult search;
  StabilityCertificate certificate;
  std::optional<DecompositionReport> decomposition;
  std::string model_hash;
};

/// Estimates (or takes from the config) M, δ, L and certifies at
/// certify.rho, else the model gain, else rho_fraction·ρ₁.
CertifyOutcome run_certification(const RunConfig& rc);

/// Certificate at an explicit gain from already estimated constants.
StabilityCertificate certificate_at(const RunConfig& rc, const CertifyOutcome& base, double gain);

/// Closed-loop trajectory of the configured model and initial state.
Trajectory run_simulation(const RunConfig& rc, double gain, double t_end, double dt_out);

struct SweepRow {
  double rho = 0.0;
  std::optional<double> C2;
  std::optional<double> sigma_cert;
  std::optional<double> sigma_meas;
  /// Absent when there is no valid certificate to verify against.
  std::optional<bool> pass;
};

/// Rows in the order of the configured gain grid; evaluated on up to
/// DS_STAB_THREADS worker threads.
std::vector<SweepRow> run_sweep(const RunConfig& rc, const CertifyOutcome& base);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

nlohmann::json make_manifest(const RunConfig& rc, const std::string& command, const std::string& model_hash);

int cmd_simulate(const CommandOptions& opts, std::ostream& log);
int cmd_certify(const CommandOptions& opts, std::ostream& log);
int cmd_verify(const CommandOptions& opts, std::ostream& log);
int cmd_sweep(const CommandOptions& opts, std::ostream& log);

/// Parses arguments, dispatches and maps exceptions to exit codes.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dsstab::cli
