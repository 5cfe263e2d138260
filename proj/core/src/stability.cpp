#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dsstab/certificates.hpp"

namespace dsstab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_constants(const HypothesisConstants& h, double L) {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!(h.T > 0.0) || !std::isfinite(h.T)) throw std::invalid_argument("T must be > 0");
  if (!(h.p > 1.0) || !std::isfinite(h.p)) throw std::invalid_argument("p must satisfy 1 < p < inf");
  if (!finite_nonneg(h.M)) throw std::invalid_argument("M must be finite and >= 0");
  if (!finite_nonneg(h.delta)) throw std::invalid_argument("delta must be finite and >= 0");
  if (!finite_nonneg(L)) throw std::invalid_argument("L must be finite and >= 0");
}

StabilityCertificate populate(const HypothesisConstants& h, double rho, CertificatePath path) {
  const bool direct = path == CertificatePath::direct;
  require_constants(h, h.L);
  if (direct && (!std::isfinite(h.C) || h.C <= 0.0)) throw std::invalid_argument("C must be finite and > 0");
  if (!std::isfinite(rho)) throw std::invalid_argument("rho must be finite");

  StabilityCertificate c;
  c.path = path;
  c.T = h.T;
  c.p = h.p;
  c.M = h.M;
  c.delta = h.delta;
  c.L = h.L;
  c.C = direct ? h.C : kNaN;
  c.rho = rho;
  c.M_source = h.M_source;
  c.delta_source = h.delta_source;
  c.L_source = h.L_source;
  c.C_source = h.C_source;

  const double t_root = std::pow(h.T, 1.0 / h.p);
  const double a = t_root * h.M;
  if (!(rho > 0.0) || !(rho * a < 1.0)) {
    c.M_rho = c.C1 = c.C2 = c.K = c.sigma = kNaN;
    std::ostringstream os;
    os.precision(17);
    os << "rho = " << rho << " outside the contraction range (0, 1/(T^(1/p) M)) = (0, " << c.contraction_limit()
       << ")";
    c.reason = os.str();
    c.valid = false;
    return c;
  }
  const double gap = 1.0 - rho * a;
  c.M_rho = a / gap * (2.0 + rho * a);
  const double scale = direct ? h.M * h.C * h.L * std::pow(h.T, 1.0 + 1.0 / h.p) / gap
                              : h.M * std::pow(h.T, 1.0 + 1.0 / h.p) / gap * h.L;
  c.C1 = scale * (2.0 + rho * a / gap);
  c.C2 = (2.0 * rho * rho * (c.delta * c.M_rho + c.C1) + 1.0) / (1.0 + rho * c.delta);
  c.K = 1.0 / std::sqrt(c.C2);
  c.sigma = -std::log(c.C2) / (2.0 * c.T);
  c.valid = c.C2 > 0.0 && c.C2 < 1.0;
  if (!c.valid) {
    std::ostringstream os;
    os.precision(17);
    os << "C2 = " << c.C2 << " is not in (0, 1)";
    c.reason = os.str();
  }
  return c;
}

}  // namespace

StabilityCertificate compute_direct_certificate(const HypothesisConstants& h, double rho) {
  return populate(h, rho, CertificatePath::direct);
}

StabilityCertificate compute_decomposition_certificate(const HypothesisConstants& h, double rho) {
  return populate(h, rho, CertificatePath::decomposition);
}

GainSearchResult search_rho1(const CertificateFunction& certificate, double M, double T, double p,
                             double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("bisection tolerance must be > 0");
  GainSearchResult out;
  const double a = std::pow(T, 1.0 / p) * M;
  auto below_one = [&](double rho) {
    const StabilityCertificate c = certificate(rho);
    return c.valid && c.C2 < 1.0;
  };

  double limit = a > 0.0 ? 1.0 / a : std::numeric_limits<double>::infinity();
  if (!std::isfinite(limit)) {
    // M = 0: C₂ < 1 ⇔ 2ρC₁ < δ with C₁ = 0, so any bracket works; cap it.
    limit = 1.0;
    while (below_one(limit) && limit < 1e12) limit *= 2.0;
  }

  // Probe from the left; the admissible set is an interval starting at 0.
  double lo = 0.0;
  double hi = limit;
  bool found = false;
  for (double frac : {1e-12, 1e-9, 1e-6, 1e-3, 1e-2, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    const double rho = frac * limit;
    if (below_one(rho)) {
      lo = rho;
      found = true;
    } else if (found) {
      hi = rho;
      break;
    }
  }
  std::ostringstream diag;
  diag.precision(17);
  if (!found) {
    diag << "C2 >= 1 at every probed gain in (0, " << limit << "); no certified gain";
    out.lo = 0.0;
    out.hi = limit;
    out.diagnostics = diag.str();
    return out;
  }
  while (hi - lo > tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (below_one(mid) ? lo : hi) = mid;
    ++out.bisection_steps;
  }
  out.rho1 = lo;
  out.lo = lo;
  out.hi = hi;
  diag << "bisection on (0, " << limit << ") converged to [" << lo << ", " << hi << "] in " << out.bisection_steps
       << " steps";
  out.diagnostics = diag.str();
  return out;
}

GainSearchResult search_rho1(const HypothesisConstants& h, CertificatePath path, double tolerance) {
  const auto fn = [&h, path](double rho) { return populate(h, rho, path); };
  return search_rho1(fn, h.M, h.T, h.p, tolerance);
}

}  // namespace dsstab
