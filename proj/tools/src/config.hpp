#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsstab/certificate.hpp"
#include "dsstab/certificates.hpp"
#include "dsstab/modal.hpp"
#include "dsstab/models.hpp"

namespace dsstab::cli {

/// Malformed or out-of-range configuration; the message starts with the
/// dotted field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what) : std::runtime_error(field + ": " + what) {}
};

enum class ModelKind { heat, transport };

struct ModelConfig {
  ModelKind kind = ModelKind::heat;
  std::size_t modes = kDefaultModes;
  std::size_t grid = kDefaultGridSize;
  GridFunction potential;
  std::optional<double> rho;
  double alpha = 0.5;
  GridFunction h;
  GridFunction f;
  std::optional<double> epsilon;
};

struct InitialConfig {
  ModalVector modal;  // heat
  GridFunction grid;  // transport
};

struct SimulateConfig {
  std::optional<double> t_end;
  std::optional<double> dt_out;
  bool states = true;
};

struct CertifyConfig {
  CertificatePath path = CertificatePath::direct;
  double T = 1.0;
  double p = 2.0;
  double C = 1.0;
  std::optional<double> L;
  std::optional<double> M;
  std::optional<double> delta;
  std::optional<double> rho;
  double rho_fraction = 0.5;
  EnsembleSpec ensemble;
};

struct VerifyConfig {
  std::optional<std::string> trajectory;
  std::optional<std::string> certificate;
  std::optional<std::string> manifest;
};

struct SweepConfig {
  std::vector<double> rho_factors;
  std::vector<double> rho_values;
  std::size_t periods = 5;
  std::size_t samples_per_period = 20;
};

/// Fully parsed scenario plus its resolved form: file references and random
/// draws replaced by inline values, so the resolved document reproduces the
/// run on its own.
struct RunConfig {
  ModelConfig model;
  std::optional<InitialConfig> initial;
  SimulateConfig simulate;
  CertifyConfig certify;
  VerifyConfig verify;
  SweepConfig sweep;
  std::uint64_t seed = 0;
  nlohmann::json resolved;
};

/// YAML (or JSON) text to a JSON tree; plain scalars become numbers,
/// booleans or null when they parse as such.
nlohmann::json parse_document(const std::string& text);

/// Parses a scenario. A run manifest (a document with `tool: ds-stab` and a
/// `config` section) is accepted in place of a scenario. Relative file paths
/// resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt);

SpectralDiffusionModel heat_model(const ModelConfig& m, double rho);
TransportModel transport_model(const ModelConfig& m, double epsilon);

/// Default certify horizon: 1 for the heat model, 0.5 for transport (T < 1).
double default_horizon(ModelKind kind);

}  // namespace dsstab::cli
