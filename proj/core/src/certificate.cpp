#include "dsstab/certificate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dsstab {
namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json constant(double value, Provenance source, const char* formula) {
  return json{{"value", number(value)}, {"provenance", to_string(source)}, {"formula", formula}};
}

double value_of(const json& j, const char* key) { return read_number(j.at(key).at("value")); }

Provenance source_of(const json& j, const char* key) {
  return provenance_from_string(j.at(key).at("provenance").get<std::string>());
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::estimate: return "estimate";
    case Provenance::config: return "config";
  }
  return "unknown";
}

std::string to_string(CertificatePath p) {
  return p == CertificatePath::direct ? "direct" : "decomposition";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "analytic") return Provenance::analytic;
  if (s == "estimate") return Provenance::estimate;
  if (s == "config") return Provenance::config;
  throw std::invalid_argument("unknown provenance tag '" + s + "'");
}

CertificatePath path_from_string(const std::string& s) {
  if (s == "direct") return CertificatePath::direct;
  if (s == "decomposition") return CertificatePath::decomposition;
  throw std::invalid_argument("unknown certificate path '" + s + "'");
}

double StabilityCertificate::admissibility_scale() const { return std::pow(T, 1.0 / p) * M; }

double StabilityCertificate::contraction_limit() const {
  const double a = admissibility_scale();
  return a > 0.0 ? 1.0 / a : std::numeric_limits<double>::infinity();
}

json to_json(const StabilityCertificate& c) {
  const bool direct = c.path == CertificatePath::direct;
  json constants{
      {"T", constant(c.T, Provenance::config, "observation horizon")},
      {"p", constant(c.p, Provenance::config, "admissibility exponent, 1 < p < inf")},
      {"M", constant(c.M, c.M_source, "|int_0^T S(T-s) B u(s) ds|_X <= M |u|_{L^p(0,T;X)}")},
      {"delta", constant(c.delta, c.delta_source,
                         direct ? "int_0^T Re<S(t)x, B* S(t)x> dt >= delta |S(T)x|^2"
                                : "int_0^T Re<XB S(t)x, S(t)x> dt >= delta |S(T)x|^2")},
      {"L", constant(c.L, c.L_source, direct ? "L = |B*|_{L(X_-1, X)}" : "L = |XB|_{L(X)}")},
      {"rho", constant(c.rho, Provenance::config, "feedback gain")},
      {"M_rho", constant(c.M_rho, Provenance::analytic, "M_rho = M T^(1/p) / (1 - rho T^(1/p) M) * (2 + rho M T^(1/p))")},
      {"C1", constant(c.C1, Provenance::analytic,
                      direct ? "C1 = M C L T^(1+1/p) / (1 - rho T^(1/p) M) * (2 + rho M T^(1/p) / (1 - rho T^(1/p) M))"
                             : "C1 = M T^(1+1/p) / (1 - rho T^(1/p) M) * |XB| * (2 + rho M T^(1/p) / (1 - rho T^(1/p) M))")},
      {"C2", constant(c.C2, Provenance::analytic, "C2 = (2 rho^2 (delta M_rho + C1) + 1) / (1 + rho delta)")},
      {"K", constant(c.K, Provenance::analytic, "K = C2^(-1/2)")},
      {"sigma", constant(c.sigma, Provenance::analytic, "sigma = -ln(C2) / (2 T)")},
  };
  if (direct) {
    constants["C"] = constant(c.C, c.C_source, "unspecified positive constant in the C1 bound; configuration input");
  }
  json j{{"path", to_string(c.path)},
         {"valid", c.valid},
         {"reason", c.reason},
         {"contraction_limit", number(c.contraction_limit())},
         {"constants", constants}};
  if (c.rho1) {
    j["rho1"] = json{{"value", number(*c.rho1)}, {"status", "found"}};
  } else {
    j["rho1"] = json{{"value", nullptr}, {"status", "none"}};
  }
  return j;
}

StabilityCertificate certificate_from_json(const json& j) {
  StabilityCertificate c;
  c.path = path_from_string(j.at("path").get<std::string>());
  const json& k = j.at("constants");
  c.T = value_of(k, "T");
  c.p = value_of(k, "p");
  c.M = value_of(k, "M");
  c.M_source = source_of(k, "M");
  c.delta = value_of(k, "delta");
  c.delta_source = source_of(k, "delta");
  c.L = value_of(k, "L");
  c.L_source = source_of(k, "L");
  if (k.contains("C")) {
    c.C = value_of(k, "C");
    c.C_source = source_of(k, "C");
  } else {
    c.C = std::numeric_limits<double>::quiet_NaN();
  }
  c.rho = value_of(k, "rho");
  c.M_rho = value_of(k, "M_rho");
  c.C1 = value_of(k, "C1");
  c.C2 = value_of(k, "C2");
  c.K = value_of(k, "K");
  c.sigma = value_of(k, "sigma");
  c.valid = j.at("valid").get<bool>();
  c.reason = j.value("reason", "");
  if (j.contains("rho1") && !j.at("rho1").at("value").is_null()) c.rho1 = j.at("rho1").at("value").get<double>();
  return c;
}

}  // namespace dsstab
