#include "commands.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "dsstab/closed_loop.hpp"
#include "dsstab/io.hpp"
#include "dsstab/verifier.hpp"

namespace dsstab::cli {
namespace {

using nlohmann::json;

const char* kTool = "ds-stab";

bool is_heat(const RunConfig& rc) { return rc.model.kind == ModelKind::heat; }

double require_gain(const RunConfig& rc) {
  if (is_heat(rc)) {
    if (!rc.model.rho) throw ConfigError("model.rho", "missing required field");
    return *rc.model.rho;
  }
  if (!rc.model.epsilon) throw ConfigError("model.epsilon", "missing required field");
  return *rc.model.epsilon;
}

const InitialConfig& require_initial(const RunConfig& rc) {
  if (!rc.initial) throw ConfigError("initial", "missing required field");
  return *rc.initial;
}

std::string hash_at(const RunConfig& rc, double gain) {
  return is_heat(rc) ? model_hash(heat_model(rc.model, gain)) : model_hash(transport_model(rc.model, gain));
}

std::filesystem::path prepare_out(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("--out", "cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + p.string() + "' failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::filesystem::path& p, const std::string& field) {
  std::ifstream in(p);
  if (!in) throw ConfigError(field, "cannot open '" + p.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

json number_or_null(std::optional<double> v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

json decomposition_json(const DecompositionReport& d) {
  json j{{"status", d.pass() ? "PASS" : "FAIL"},
         {"epsilon", d.epsilon},
         {"XB_norm", d.xb_norm},
         {"epsilon_max", d.epsilon_max},
         {"within_threshold", d.within_threshold},
         {"dissipative", d.dissipative},
         {"bound_holds", d.bound_holds},
         {"dissipative_half_epsilon", d.dissipative_half_epsilon},
         {"samples", d.samples},
         {"worst_ratio", number_or_null(d.worst_ratio)}};
  j["witness"] = d.witness ? json(*d.witness) : json(nullptr);
  return j;
}

std::size_t thread_cap(std::size_t work) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DS_STAB_THREADS"); env && *env) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), v);
    if (ec != std::errc() || *ptr != '\0' || v == 0) {
      throw ConfigError("DS_STAB_THREADS", "expected a positive integer, got '" + std::string(env) + "'");
    }
    n = v;
  }
  return std::max<std::size_t>(1, std::min(n, work));
}

}  // namespace

json make_manifest(const RunConfig& rc, const std::string& command, const std::string& hash) {
  return json{{"tool", kTool},
              {"version", DSSTAB_VERSION},
              {"command", command},
              {"seed", rc.seed},
              {"model_hash", hash},
              {"config", rc.resolved}};
}

Trajectory run_simulation(const RunConfig& rc, double gain, double t_end, double dt_out) {
  const InitialConfig& init = require_initial(rc);
  if (is_heat(rc)) return heat_closed_loop_solve(heat_model(rc.model, gain), init.modal, t_end, dt_out);
  TransportOptions opts;
  opts.keep_states = rc.simulate.states;
  return transport_closed_loop_solve(transport_model(rc.model, gain), init.grid, t_end, dt_out, opts);
}

CertifyOutcome run_certification(const RunConfig& rc) {
  const CertifyConfig& c = rc.certify;
  CertifyOutcome out;
  HypothesisConstants& h = out.constants;
  h.T = c.T;
  h.p = c.p;
  h.C = c.C;
  h.C_source = Provenance::config;

  if (is_heat(rc)) {
    const SpectralDiffusionModel model = heat_model(rc.model, 0.0);
    if (c.M) {
      h.M = *c.M;
      h.M_source = Provenance::config;
    } else {
      out.M_estimate = estimate_admissibility_M(model, c.T, c.p, c.ensemble);
      h.M = out.M_estimate.M;
      h.M_source = Provenance::estimate;
    }
    if (c.delta) {
      h.delta = *c.delta;
      h.delta_source = Provenance::config;
    } else {
      out.delta_estimate = estimate_observability_delta(model, c.T, c.ensemble);
      h.delta = out.delta_estimate.delta;
      h.delta_source = out.delta_estimate.provenance;
    }
    h.L = c.L.value_or(heat_control_adjoint_norm());
    h.L_source = c.L ? Provenance::config : Provenance::analytic;
  } else {
    const TransportModel model = transport_model(rc.model, rc.model.epsilon.value_or(0.0));
    if (c.M) {
      h.M = *c.M;
      h.M_source = Provenance::config;
    } else {
      out.M_estimate = estimate_admissibility_M(model, c.T, c.p, c.ensemble);
      h.M = out.M_estimate.M;
      h.M_source = Provenance::estimate;
    }
    if (c.delta) {
      h.delta = *c.delta;
      h.delta_source = Provenance::config;
    } else {
      out.delta_estimate = estimate_observability_delta(model, c.T);
      h.delta = out.delta_estimate.delta;
      h.delta_source = out.delta_estimate.provenance;
    }
    h.L = c.L.value_or(model.h().max());
    h.L_source = c.L ? Provenance::config : Provenance::analytic;
  }

  out.search = search_rho1(h, c.path);

  double gain = 0.0;
  if (is_heat(rc)) {
    if (c.rho) {
      gain = *c.rho;
    } else if (rc.model.rho) {
      gain = *rc.model.rho;
    } else if (out.search.rho1) {
      gain = c.rho_fraction * *out.search.rho1;
    }
  } else {
    gain = require_gain(rc);
  }
  out.certificate = certificate_at(rc, out, gain);
  if (!is_heat(rc)) out.decomposition = check_decomposition(transport_model(rc.model, gain), c.ensemble);
  if (out.decomposition && !out.decomposition->pass() && out.certificate.valid) {
    out.certificate.valid = false;
    out.certificate.reason = "admissible decomposition check failed at epsilon = " + format_double(gain);
  }
  out.model_hash = hash_at(rc, gain);
  return out;
}

StabilityCertificate certificate_at(const RunConfig& rc, const CertifyOutcome& base, double gain) {
  StabilityCertificate cert = rc.certify.path == CertificatePath::direct
                                  ? compute_direct_certificate(base.constants, gain)
                                  : compute_decomposition_certificate(base.constants, gain);
  cert.rho1 = base.search.rho1;
  if (gain == 0.0 && !base.search.rho1 && !rc.certify.rho) cert.reason = "no certified gain: " + base.search.diagnostics;
  return cert;
}

std::vector<SweepRow> run_sweep(const RunConfig& rc, const CertifyOutcome& base) {
  const SweepConfig& s = rc.sweep;
  std::vector<double> gains;
  if (!s.rho_factors.empty()) {
    if (!base.search.rho1) {
      throw ConfigError("sweep.rho_factors", "no certified gain rho1 to scale (" + base.search.diagnostics +
                                                 "); use sweep.rho_values");
    }
    for (double f : s.rho_factors) gains.push_back(f * *base.search.rho1);
  }
  gains.insert(gains.end(), s.rho_values.begin(), s.rho_values.end());
  if (gains.empty()) throw ConfigError("sweep", "needs rho_factors or rho_values");
  require_initial(rc);

  const double T = rc.certify.T;
  const double t_end = T * static_cast<double>(s.periods);
  const double dt_out = T / static_cast<double>(s.samples_per_period);
  std::vector<SweepRow> rows(gains.size());
  std::vector<std::string> errors(gains.size());

  auto evaluate = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.rho = gains[i];
    StabilityCertificate cert = certificate_at(rc, base, gains[i]);
    if (!is_heat(rc) && cert.valid) {
      if (!check_decomposition(transport_model(rc.model, gains[i]), rc.certify.ensemble).pass()) cert.valid = false;
    }
    const Trajectory traj = run_simulation(rc, gains[i], t_end, dt_out);
    row.sigma_meas = measured_decay_rate(traj, T);
    if (cert.valid) {
      row.C2 = cert.C2;
      row.sigma_cert = cert.sigma;
      const bool contraction = !is_heat(rc) || heat_model(rc.model, gains[i]).contraction_ok();
      row.pass = verify_decay(traj, cert, contraction).pass();
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < gains.size(); i = next++) {
      try {
        evaluate(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = thread_cap(gains.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw std::runtime_error("sweep row rho = " + format_double(gains[i]) + ": " + errors[i]);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  auto cell = [](std::optional<double> v) { return v && std::isfinite(*v) ? format_double(*v) : std::string("none"); };
  out << "rho,C2,sigma_cert,sigma_meas,pass\n";
  for (const auto& r : rows) {
    out << format_double(r.rho) << ',' << cell(r.C2) << ',' << cell(r.sigma_cert) << ',' << cell(r.sigma_meas) << ','
        << (r.pass ? (*r.pass ? "PASS" : "FAIL") : "none") << '\n';
  }
}

int cmd_simulate(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = load_config(opts.config, opts.seed);
  const double gain = require_gain(rc);
  require_initial(rc);
  if (!rc.simulate.t_end) throw ConfigError("simulate.t_end", "missing required field");
  if (!rc.simulate.dt_out) throw ConfigError("simulate.dt_out", "missing required field");
  Trajectory traj = [&] {
    try {
      return run_simulation(rc, gain, *rc.simulate.t_end, *rc.simulate.dt_out);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("simulate", e.what());
    }
  }();

  const auto dir = prepare_out(opts.out);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj, rc.simulate.states);
  write_text(dir / "trajectory.csv", csv.str());
  json manifest = make_manifest(rc, "simulate", traj.model_id());
  manifest["outputs"] = {"trajectory.csv"};
  write_text(dir / "manifest.json", dump(manifest));
  log << "simulate: " << traj.size() << " samples, final norm " << format_double(traj.norms().back()) << " -> "
      << (dir / "trajectory.csv").string() << '\n';
  return kExitOk;
}

int cmd_certify(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = load_config(opts.config, opts.seed);
  const CertifyOutcome r = run_certification(rc);

  json doc = make_manifest(rc, "certify", r.model_hash);
  doc["certificate"] = to_json(r.certificate);
  json est = json::object();
  if (r.constants.M_source == Provenance::estimate) {
    est["M"] = {{"value", r.M_estimate.M},
                {"members", r.M_estimate.members},
                {"argmax", r.M_estimate.argmax},
                {"note", "sampled maximum: a lower estimate of the admissibility constant"}};
  }
  if (r.constants.delta_source != Provenance::config) {
    est["delta"] = {{"value", number_or_null(r.delta_estimate.delta)},
                    {"provenance", to_string(r.delta_estimate.provenance)},
                    {"limiting_index", r.delta_estimate.limiting_index}};
  }
  doc["estimators"] = est;
  doc["gain_search"] = {{"rho1", number_or_null(r.search.rho1)},
                        {"status", r.search.rho1 ? "found" : "none"},
                        {"bracket", {r.search.lo, r.search.hi}},
                        {"bisection_steps", r.search.bisection_steps},
                        {"diagnostics", r.search.diagnostics}};
  if (is_heat(rc)) {
    const ContractionReport cr = heat_model(rc.model, 0.0).contraction();
    doc["contraction"] = {{"ok", cr.ok},
                          {"margin", cr.margin},
                          {"mu_max", cr.mu_max},
                          {"mu_max_refined", number_or_null(cr.mu_max_refined)}};
  }
  if (r.decomposition) doc["decomposition"] = decomposition_json(*r.decomposition);
  if (r.certificate.path == CertificatePath::direct) {
    doc["notes"] = {"C is not determined by the stability argument; it is a configuration input (default 1)"};
  }

  const auto dir = prepare_out(opts.out);
  write_text(dir / "certificate.json", dump(doc));
  log << "certify: rho1 = " << (r.search.rho1 ? format_double(*r.search.rho1) : std::string("none"))
      << ", certificate at rho = " << format_double(r.certificate.rho) << " is "
      << (r.certificate.valid ? "valid" : "invalid (" + r.certificate.reason + ")") << " -> "
      << (dir / "certificate.json").string() << '\n';
  return kExitOk;
}

int cmd_verify(const CommandOptions& opts, std::ostream& log) {
  std::optional<RunConfig> scenario;
  if (!opts.config.empty()) scenario = load_config(opts.config, opts.seed);
  auto pick = [](const std::optional<std::string>& flag, const std::optional<std::string>& from_config,
                 const std::string& field) {
    if (flag) return *flag;
    if (from_config) return *from_config;
    throw ConfigError(field, "missing required field");
  };
  const VerifyConfig vc = scenario ? scenario->verify : VerifyConfig{};
  const std::filesystem::path traj_path = pick(opts.trajectory, vc.trajectory, "verify.trajectory");
  const std::filesystem::path cert_path = pick(opts.certificate, vc.certificate, "verify.certificate");
  const std::filesystem::path manifest_path =
      vc.manifest ? std::filesystem::path(*vc.manifest) : traj_path.parent_path() / "manifest.json";

  const json cert_doc = read_json_file(cert_path, "verify.certificate");
  const json manifest = read_json_file(manifest_path, "verify.manifest");
  if (!cert_doc.contains("certificate") || !cert_doc.contains("model_hash")) {
    throw FormatError("'" + cert_path.string() + "' is not a ds-stab certificate");
  }
  if (!manifest.contains("model_hash") || !manifest.contains("config")) {
    throw FormatError("'" + manifest_path.string() + "' is not a ds-stab manifest");
  }
  const std::string traj_hash = manifest.at("model_hash").get<std::string>();
  const std::string cert_hash = cert_doc.at("model_hash").get<std::string>();
  if (traj_hash != cert_hash) {
    throw ConfigError("verify", "model hash mismatch: trajectory " + traj_hash + " vs certificate " + cert_hash);
  }
  const RunConfig traj_rc = parse_config(manifest, manifest_path.parent_path());
  const double gain = require_gain(traj_rc);
  const StabilityCertificate cert = certificate_from_json(cert_doc.at("certificate"));

  std::ifstream in(traj_path);
  if (!in) throw ConfigError("verify.trajectory", "cannot open '" + traj_path.string() + "'");
  const Trajectory traj = read_trajectory_csv(in, traj_hash, gain);

  json report;
  bool pass = false;
  if (!cert.valid) {
    report = {{"status", "FAIL"}, {"reason", "invalid certificate: " + cert.reason}, {"checks", json::array()}};
  } else {
    const bool contraction = !is_heat(traj_rc) || heat_model(traj_rc.model, gain).contraction_ok();
    VerificationReport rep = verify_decay(traj, cert, contraction);
    if (is_heat(traj_rc) && traj.has_states() && traj.times().back() >= 2.0 * cert.T * (1.0 - 1e-12)) {
      const Trajectory open = heat_closed_loop_sample(heat_model(traj_rc.model, 0.0),
                                                      ModalVector(traj.states().front()), traj.times());
      const VerificationReport mild = verify_mild_bounds(traj, cert, open);
      rep.checks.insert(rep.checks.end(), mild.checks.begin(), mild.checks.end());
    }
    report = to_json(rep);
    pass = rep.pass();
  }
  report["model_hash"] = traj_hash;
  report["trajectory"] = traj_path.string();
  report["certificate"] = cert_path.string();
  report["tool"] = kTool;
  report["version"] = DSSTAB_VERSION;

  const auto dir = prepare_out(opts.out);
  write_text(dir / "verification.json", dump(report));
  log << "verify: " << (pass ? "PASS" : "FAIL") << " -> " << (dir / "verification.json").string() << '\n';
  return pass ? kExitOk : kExitFail;
}

int cmd_sweep(const CommandOptions& opts, std::ostream& log) {
  const RunConfig rc = load_config(opts.config, opts.seed);
  const CertifyOutcome base = run_certification(rc);
  const std::vector<SweepRow> rows = run_sweep(rc, base);

  const auto dir = prepare_out(opts.out);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_text(dir / "sweep.csv", csv.str());
  json manifest = make_manifest(rc, "sweep", hash_at(rc, 0.0));
  manifest["rho1"] = number_or_null(base.search.rho1);
  manifest["outputs"] = {"sweep.csv"};
  write_text(dir / "manifest.json", dump(manifest));
  std::size_t passed = 0;
  for (const auto& r : rows) passed += r.pass.value_or(false) ? 1 : 0;
  log << "sweep: " << rows.size() << " rows, " << passed << " PASS -> " << (dir / "sweep.csv").string() << '\n';
  return kExitOk;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Switching-feedback stabilization: simulate, certify and verify"};
  app.set_version_flag("--version", std::string(DSSTAB_VERSION));
  app.require_subcommand(1);
  CommandOptions opts;
  std::string config, outdir = ".";
  std::uint64_t seed = 0;
  std::string trajectory, certificate;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config, "scenario file (YAML or JSON, a manifest also works)");
    if (config_required) c->required();
    sub->add_option("--out", outdir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "ensemble and random-input seed (overrides the config)");
  };
  auto* simulate = app.add_subcommand("simulate", "closed-loop trajectory and run manifest");
  auto* certify = app.add_subcommand("certify", "hypothesis constants, rho1 and the stability certificate");
  auto* verify = app.add_subcommand("verify", "check a trajectory against a certificate");
  auto* sweep = app.add_subcommand("sweep", "certified and measured decay over a gain grid");
  add_common(simulate, true);
  add_common(certify, true);
  add_common(verify, false);
  add_common(sweep, true);
  verify->add_option("--trajectory", trajectory, "trajectory CSV (overrides verify.trajectory)");
  verify->add_option("--certificate", certificate, "certificate JSON (overrides verify.certificate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  opts.config = config;
  opts.out = outdir;
  for (auto* sub : {simulate, certify, verify, sweep}) {
    if (sub->count("--seed") > 0) opts.seed = seed;
  }
  if (!trajectory.empty()) opts.trajectory = trajectory;
  if (!certificate.empty()) opts.certificate = certificate;

  try {
    if (*simulate) return cmd_simulate(opts, out);
    if (*certify) return cmd_certify(opts, out);
    if (*verify) return cmd_verify(opts, out);
    return cmd_sweep(opts, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace dsstab::cli
