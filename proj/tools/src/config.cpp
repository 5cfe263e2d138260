#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dsstab/io.hpp"

namespace dsstab::cli {
namespace {

using nlohmann::json;

json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s == "null" || s == "~" || s.empty()) return nullptr;
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s.find_first_not_of("+-0123456789") == std::string::npos && s.find_first_of("0123456789") != std::string::npos) {
    std::int64_t v = 0;
    const char* b = s.data() + (s[0] == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  }
  double d = 0.0;
  const char* b = s.data() + (s[0] == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), d);
  if (ec == std::errc() && ptr == s.data() + s.size()) return d;
  return s;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return out;
    }
  }
  return nullptr;
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_null() && !node_->is_object()) throw ConfigError(path_, "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_->is_object() && node_->contains(key) && !node_->at(key).is_null(); }
  const json& raw(const std::string& key) const { return node_->at(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  Section child(const std::string& key) const { return Section(has(key) ? &raw(key) : nullptr, path(key)); }

  std::optional<double> number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path(key), "must be finite");
    return d;
  }

  double require_number(const std::string& key) const {
    auto v = number(key);
    if (!v) throw ConfigError(path(key), "missing required field");
    return *v;
  }

  std::optional<std::size_t> count(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const json& v = raw(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(path(key), "expected a nonnegative integer");
    }
    return static_cast<std::size_t>(v.get<std::int64_t>());
  }

  std::optional<std::string> text(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    if (!raw(key).is_string()) throw ConfigError(path(key), "expected a string");
    return raw(key).get<std::string>();
  }

  std::optional<bool> flag(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    if (!raw(key).is_boolean()) throw ConfigError(path(key), "expected true or false");
    return raw(key).get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected a list of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const json* node_;
  std::string path_;
};

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path q(p);
  return q.is_absolute() ? q : base / q;
}

std::ifstream open_input(const std::filesystem::path& p, const std::string& field) {
  std::ifstream in(p);
  if (!in) throw ConfigError(field, "cannot open '" + p.string() + "'");
  return in;
}

json to_list(const Eigen::VectorXd& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Eigen::VectorXd from_list(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a nonempty list of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(field + "[" + std::to_string(i) + "]", "expected a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

GridFunction sine_series(const Eigen::VectorXd& c, std::size_t n) {
  return GridFunction(sine_basis(n, static_cast<std::size_t>(c.size())) * c);
}

struct Resolved {
  GridFunction f;
  json spec;
};

// Scalar, {constant}, {values}, {csv}, {modes}, {polynomial} or
// {random_modes: {count, scale}}.
Resolved resolve_function(const json& spec, const std::string& field, std::size_t n,
                          const std::filesystem::path& base, std::uint64_t seed) {
  if (spec.is_number()) return {GridFunction::constant(n, spec.get<double>()), spec};
  if (!spec.is_object() || spec.size() != 1) {
    throw ConfigError(field, "expected a number or a one-key mapping (constant, values, csv, modes, polynomial, "
                             "random_modes)");
  }
  const std::string key = spec.begin().key();
  const json& v = spec.begin().value();
  const std::string sub = join(field, key);
  if (key == "constant") {
    if (!v.is_number()) throw ConfigError(sub, "expected a number");
    return {GridFunction::constant(n, v.get<double>()), spec};
  }
  if (key == "values") {
    Eigen::VectorXd values = from_list(v, sub);
    if (static_cast<std::size_t>(values.size()) != n) {
      throw ConfigError(sub, "expected " + std::to_string(n) + " grid values, got " + std::to_string(values.size()));
    }
    return {GridFunction(std::move(values)), spec};
  }
  if (key == "csv") {
    if (!v.is_string()) throw ConfigError(sub, "expected a file path");
    auto in = open_input(resolve_path(base, v.get<std::string>()), sub);
    GridFunction g;
    try {
      g = read_grid_csv(in);
    } catch (const FormatError& e) {
      throw ConfigError(sub, e.what());
    }
    if (g.size() != n) throw ConfigError(sub, "grid has " + std::to_string(g.size()) + " nodes, model grid has " +
                                                  std::to_string(n));
    return {g, json{{"values", to_list(g.values())}}};
  }
  if (key == "modes") return {sine_series(from_list(v, sub), n), spec};
  if (key == "polynomial") {
    const Eigen::VectorXd c = from_list(v, sub);
    return {GridFunction::sample(n,
                                 [&c](double z) {
                                   double acc = 0.0;
                                   for (Eigen::Index k = c.size() - 1; k >= 0; --k) acc = acc * z + c[k];
                                   return acc;
                                 }),
            spec};
  }
  if (key == "random_modes") {
    const Section s(&v, sub);
    const std::size_t count = s.count("count").value_or(8);
    const double scale = s.number("scale").value_or(1.0);
    if (count == 0) throw ConfigError(join(sub, "count"), "must be >= 1");
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal;
    Eigen::VectorXd c(static_cast<Eigen::Index>(count));
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = scale * normal(rng) / static_cast<double>(j + 1);
    return {sine_series(c, n), json{{"modes", to_list(c)}}};
  }
  throw ConfigError(sub, "unknown function kind '" + key + "'");
}

std::optional<std::size_t> parse_mode_preset(const json& spec, const std::string& field) {
  if (!spec.is_string()) return std::nullopt;
  const std::string s = spec.get<std::string>();
  if (s.rfind("mode:", 0) != 0) throw ConfigError(field, "unknown preset '" + s + "' (expected mode:<j>)");
  std::size_t j = 0;
  const auto [ptr, ec] = std::from_chars(s.data() + 5, s.data() + s.size(), j);
  if (ec != std::errc() || ptr != s.data() + s.size() || j == 0) {
    throw ConfigError(field, "malformed preset '" + s + "' (expected mode:<j> with j >= 1)");
  }
  return j;
}

void positive(double v, const std::string& field) {
  if (!(v > 0.0)) throw ConfigError(field, "must be > 0");
}

}  // namespace

nlohmann::json parse_document(const std::string& text) {
  try {
    return yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("malformed configuration: ") + e.what());
  }
}

double default_horizon(ModelKind kind) { return kind == ModelKind::heat ? 1.0 : 0.5; }

RunConfig parse_config(const nlohmann::json& input, const std::filesystem::path& base_dir,
                       std::optional<std::uint64_t> seed_override) {
  const json* root = &input;
  if (input.is_object() && input.contains("tool") && input.contains("config")) root = &input.at("config");
  if (!root->is_object()) throw ConfigError("<document>", "expected a mapping at the top level");
  const Section top(root, "");
  RunConfig rc;

  if (seed_override) {
    rc.seed = *seed_override;
  } else if (top.has("seed")) {
    const json& s = top.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "expected a nonnegative integer");
    }
    rc.seed = s.get<std::uint64_t>();
  }
  json resolved = json::object();
  resolved["seed"] = rc.seed;

  // model
  const Section model = top.child("model");
  if (!top.has("model")) throw ConfigError("model", "missing required section");
  ModelConfig& m = rc.model;
  const std::string kind = model.text("kind").value_or("heat");
  json rm = json::object();
  rm["kind"] = kind;
  if (kind == "heat") {
    m.kind = ModelKind::heat;
    m.modes = model.count("modes").value_or(kDefaultModes);
    if (m.modes == 0) throw ConfigError(model.path("modes"), "must be >= 1");
    m.grid = model.count("grid").value_or(std::max<std::size_t>(kDefaultGridSize, 2 * m.modes + 1));
    if (m.grid < 2 * m.modes + 1) {
      throw ConfigError(model.path("grid"), "must be >= 2*modes+1 = " + std::to_string(2 * m.modes + 1));
    }
    const json g_spec = model.has("potential") ? model.raw("potential") : json(0.0);
    Resolved g = resolve_function(g_spec, model.path("potential"), m.grid, base_dir, rc.seed);
    m.potential = g.f;
    m.rho = model.number("rho");
    if (m.rho && *m.rho < 0.0) throw ConfigError(model.path("rho"), "must be >= 0");
    rm["modes"] = m.modes;
    rm["grid"] = m.grid;
    rm["potential"] = g.spec;
    if (m.rho) rm["rho"] = *m.rho;
  } else if (kind == "transport") {
    m.kind = ModelKind::transport;
    m.grid = model.count("grid").value_or(kDefaultGridSize);
    if (m.grid < 3) throw ConfigError(model.path("grid"), "must be >= 3");
    m.alpha = model.number("alpha").value_or(0.5);
    positive(m.alpha, model.path("alpha"));
    const json h_spec = model.has("h") ? model.raw("h") : json(1.0);
    const json f_spec = model.has("f") ? model.raw("f") : json(1.0);
    Resolved h = resolve_function(h_spec, model.path("h"), m.grid, base_dir, rc.seed);
    Resolved f = resolve_function(f_spec, model.path("f"), m.grid, base_dir, rc.seed + 1);
    if (!(h.f.min() > 0.0)) throw ConfigError(model.path("h"), "must be bounded below by a positive constant");
    if (!(f.f.norm() > 0.0)) throw ConfigError(model.path("f"), "must be nonzero (psi is a non-null functional)");
    m.h = h.f;
    m.f = f.f;
    m.epsilon = model.number("epsilon");
    if (!m.epsilon) m.epsilon = model.number("rho");
    if (m.epsilon && *m.epsilon < 0.0) throw ConfigError(model.path("epsilon"), "must be >= 0");
    rm["grid"] = m.grid;
    rm["alpha"] = m.alpha;
    rm["h"] = h.spec;
    rm["f"] = f.spec;
    if (m.epsilon) rm["epsilon"] = *m.epsilon;
  } else {
    throw ConfigError(model.path("kind"), "unknown model kind '" + kind + "' (expected heat or transport)");
  }
  resolved["model"] = rm;

  // initial
  if (top.has("initial")) {
    const json& spec = top.raw("initial");
    InitialConfig init;
    json ri;
    if (const auto j = parse_mode_preset(spec, "initial")) {
      if (m.kind == ModelKind::heat) {
        if (*j > m.modes) throw ConfigError("initial", "mode index exceeds model.modes");
        init.modal = ModalVector::basis(m.modes, *j);
      } else {
        const double jj = static_cast<double>(*j);
        init.grid = GridFunction::sample(m.grid, [jj](double z) { return std::sqrt(2.0) * std::sin(jj * kPi * z); });
      }
      ri = spec;
    } else if (spec.is_object() && spec.size() == 1 && (spec.contains("modal") || spec.contains("modal_csv"))) {
      if (m.kind != ModelKind::heat) throw ConfigError("initial", "modal initial states need model.kind = heat");
      Eigen::VectorXd c;
      if (spec.contains("modal")) {
        c = from_list(spec.at("modal"), "initial.modal");
      } else {
        if (!spec.at("modal_csv").is_string()) throw ConfigError("initial.modal_csv", "expected a file path");
        auto in = open_input(resolve_path(base_dir, spec.at("modal_csv").get<std::string>()), "initial.modal_csv");
        try {
          c = read_modal_csv(in).coefficients();
        } catch (const FormatError& e) {
          throw ConfigError("initial.modal_csv", e.what());
        }
      }
      if (static_cast<std::size_t>(c.size()) != m.modes) {
        throw ConfigError("initial", "expected " + std::to_string(m.modes) + " modal coefficients, got " +
                                         std::to_string(c.size()));
      }
      init.modal = ModalVector(c);
      ri = json{{"modal", to_list(c)}};
    } else {
      json fspec = spec;
      if (spec.is_object() && spec.size() == 1 && spec.contains("grid_csv")) fspec = json{{"csv", spec.at("grid_csv")}};
      Resolved r = resolve_function(fspec, "initial", m.grid, base_dir, rc.seed + 2);
      if (m.kind == ModelKind::heat) {
        init.modal = grid_to_modal(r.f, m.modes);
        ri = json{{"modal", to_list(init.modal.coefficients())}};
      } else {
        init.grid = r.f;
        ri = r.spec;
      }
    }
    rc.initial = std::move(init);
    resolved["initial"] = ri;
  }

  // simulate
  const Section sim = top.child("simulate");
  rc.simulate.t_end = sim.number("t_end");
  rc.simulate.dt_out = sim.number("dt_out");
  rc.simulate.states = sim.flag("states").value_or(true);
  if (rc.simulate.t_end) positive(*rc.simulate.t_end, sim.path("t_end"));
  if (rc.simulate.dt_out) positive(*rc.simulate.dt_out, sim.path("dt_out"));
  json rs = json::object();
  if (rc.simulate.t_end) rs["t_end"] = *rc.simulate.t_end;
  if (rc.simulate.dt_out) rs["dt_out"] = *rc.simulate.dt_out;
  rs["states"] = rc.simulate.states;
  resolved["simulate"] = rs;

  // certify
  const Section cert = top.child("certify");
  CertifyConfig& c = rc.certify;
  const std::string default_path = m.kind == ModelKind::heat ? "direct" : "decomposition";
  const std::string path = cert.text("path").value_or(default_path);
  if (path == "direct") {
    c.path = CertificatePath::direct;
  } else if (path == "decomposition") {
    c.path = CertificatePath::decomposition;
  } else {
    throw ConfigError(cert.path("path"), "unknown path '" + path + "' (expected direct or decomposition)");
  }
  if (m.kind == ModelKind::transport && c.path != CertificatePath::decomposition) {
    throw ConfigError(cert.path("path"), "the transport model is certified through the decomposition path");
  }
  c.T = cert.number("T").value_or(default_horizon(m.kind));
  positive(c.T, cert.path("T"));
  if (m.kind == ModelKind::transport && c.T >= 1.0) {
    throw ConfigError(cert.path("T"), "must be < 1 for the transport model (the semigroup vanishes at t = 1)");
  }
  c.p = cert.number("p").value_or(2.0);
  if (!(c.p > 1.0)) throw ConfigError(cert.path("p"), "must satisfy 1 < p < inf");
  c.C = cert.number("C").value_or(1.0);
  positive(c.C, cert.path("C"));
  c.L = cert.number("L");
  c.M = cert.number("M");
  c.delta = cert.number("delta");
  c.rho = cert.number("rho");
  c.rho_fraction = cert.number("rho_fraction").value_or(0.5);
  if (c.L && *c.L < 0.0) throw ConfigError(cert.path("L"), "must be >= 0");
  if (c.M && *c.M < 0.0) throw ConfigError(cert.path("M"), "must be >= 0");
  if (c.delta && *c.delta < 0.0) throw ConfigError(cert.path("delta"), "must be >= 0");
  if (c.rho && *c.rho < 0.0) throw ConfigError(cert.path("rho"), "must be >= 0");
  if (!(c.rho_fraction > 0.0 && c.rho_fraction < 1.0)) {
    throw ConfigError(cert.path("rho_fraction"), "must lie in (0, 1)");
  }
  const Section ens = cert.child("ensemble");
  c.ensemble.random_members = ens.count("members").value_or(200);
  c.ensemble.pieces = ens.count("pieces").value_or(16);
  if (c.ensemble.pieces == 0) throw ConfigError(ens.path("pieces"), "must be >= 1");
  c.ensemble.seed = rc.seed;
  json rcert{{"path", path},
             {"T", c.T},
             {"p", c.p},
             {"rho_fraction", c.rho_fraction},
             {"ensemble", {{"members", c.ensemble.random_members}, {"pieces", c.ensemble.pieces}}}};
  if (c.path == CertificatePath::direct) rcert["C"] = c.C;
  if (c.L) rcert["L"] = *c.L;
  if (c.M) rcert["M"] = *c.M;
  if (c.delta) rcert["delta"] = *c.delta;
  if (c.rho) rcert["rho"] = *c.rho;
  resolved["certify"] = rcert;

  // verify
  const Section ver = top.child("verify");
  rc.verify.trajectory = ver.text("trajectory");
  rc.verify.certificate = ver.text("certificate");
  rc.verify.manifest = ver.text("manifest");
  auto absolutize = [&](std::optional<std::string>& p) {
    if (p) p = resolve_path(base_dir, *p).string();
  };
  absolutize(rc.verify.trajectory);
  absolutize(rc.verify.certificate);
  absolutize(rc.verify.manifest);
  json rv = json::object();
  if (rc.verify.trajectory) rv["trajectory"] = *rc.verify.trajectory;
  if (rc.verify.certificate) rv["certificate"] = *rc.verify.certificate;
  if (rc.verify.manifest) rv["manifest"] = *rc.verify.manifest;
  if (!rv.empty()) resolved["verify"] = rv;

  // sweep
  const Section sw = top.child("sweep");
  rc.sweep.rho_factors = sw.numbers("rho_factors");
  rc.sweep.rho_values = sw.numbers("rho_values");
  rc.sweep.periods = sw.count("periods").value_or(5);
  rc.sweep.samples_per_period = sw.count("samples_per_period").value_or(20);
  if (rc.sweep.periods < 3) throw ConfigError(sw.path("periods"), "must be >= 3");
  if (rc.sweep.samples_per_period == 0) throw ConfigError(sw.path("samples_per_period"), "must be >= 1");
  for (std::size_t i = 0; i < rc.sweep.rho_factors.size(); ++i) {
    if (!(rc.sweep.rho_factors[i] >= 0.0)) {
      throw ConfigError(sw.path("rho_factors") + "[" + std::to_string(i) + "]", "must be >= 0");
    }
  }
  for (std::size_t i = 0; i < rc.sweep.rho_values.size(); ++i) {
    if (!(rc.sweep.rho_values[i] >= 0.0)) {
      throw ConfigError(sw.path("rho_values") + "[" + std::to_string(i) + "]", "must be >= 0");
    }
  }
  if (top.has("sweep")) {
    json rsw{{"periods", rc.sweep.periods}, {"samples_per_period", rc.sweep.samples_per_period}};
    if (!rc.sweep.rho_factors.empty()) rsw["rho_factors"] = rc.sweep.rho_factors;
    if (!rc.sweep.rho_values.empty()) rsw["rho_values"] = rc.sweep.rho_values;
    resolved["sweep"] = rsw;
  }

  rc.resolved = std::move(resolved);
  return rc;
}

RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(parse_document(ss.str()), path.parent_path(), seed_override);
}

SpectralDiffusionModel heat_model(const ModelConfig& m, double rho) {
  return SpectralDiffusionModel(m.potential, m.modes, rho);
}

TransportModel transport_model(const ModelConfig& m, double epsilon) { return TransportModel(m.h, m.f, m.alpha, epsilon); }

}  // namespace dsstab::cli
