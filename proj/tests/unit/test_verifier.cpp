#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "dsstab/certificates.hpp"
#include "dsstab/closed_loop.hpp"
#include "dsstab/verifier.hpp"

using namespace dsstab;

namespace {

struct HeatSetup {
  HypothesisConstants constants;
  double rho1 = 0.0;
};

const HeatSetup& heat16() {
  static const HeatSetup s = [] {
    const SpectralDiffusionModel m(GridFunction::constant(257, 0.0), 16, 0.0);
    HeatSetup out;
    out.constants.M = estimate_admissibility_M(m, 1.0, 2.0).M;
    out.constants.delta = estimate_observability_delta(m, 1.0).delta;
    out.rho1 = search_rho1(out.constants, CertificatePath::direct).rho1.value();
    return out;
  }();
  return s;
}

ModalVector mixed_state(std::size_t order, double scale = 1.0) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(order));
  for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = scale * std::cos(1.3 * static_cast<double>(j)) / (1.0 + j);
  return ModalVector(c);
}

Trajectory run(double rho, const ModalVector& x0, double t_end = 5.0, double dt = 0.01) {
  const SpectralDiffusionModel m(GridFunction::constant(257, 0.0), x0.order(), rho);
  return heat_closed_loop_solve(m, x0, t_end, dt);
}

}  // namespace

TEST(Verifier, HalfGainPasses) {
  const auto& s = heat16();
  const double rho = 0.5 * s.rho1;
  const auto cert = compute_direct_certificate(s.constants, rho);
  ASSERT_TRUE(cert.valid);
  const Trajectory traj = run(rho, mixed_state(16));
  const auto rep = verify_decay(traj, cert);
  EXPECT_TRUE(rep.pass());
  ASSERT_TRUE(rep.sigma_meas.has_value());
  EXPECT_GE(*rep.sigma_meas, cert.sigma);
  for (const auto& c : rep.checks) {
    EXPECT_TRUE(c.passed) << c.name;
    EXPECT_GE(c.slack, 0.0) << c.name;
    EXPECT_FALSE(c.witness.has_value()) << c.name;
  }

  const Trajectory open = run(0.0, mixed_state(16), 2.0, 0.01);
  const auto mild = verify_mild_bounds(run(rho, mixed_state(16), 2.0, 0.01), cert, open);
  EXPECT_TRUE(mild.pass());
  for (const auto& c : mild.checks) EXPECT_GE(c.slack_factor, 1.0) << c.name;
  EXPECT_NE(mild.find("lp_bound"), nullptr);
  EXPECT_NE(mild.find("convolution_bound"), nullptr);
  EXPECT_NE(mild.find("pointwise_bound"), nullptr);
}

TEST(Verifier, ZeroGainMildBoundsAreTrivial) {
  auto s = heat16();
  const auto cert = compute_direct_certificate(s.constants, 0.0);
  const Trajectory open = run(0.0, mixed_state(16), 2.0, 0.05);
  const auto rep = verify_mild_bounds(open, cert, open);
  EXPECT_TRUE(rep.pass());
  EXPECT_NE(rep.find("convolution_bound")->detail.find("vacuous"), std::string::npos);
}

TEST(Verifier, ShrunkAdmissibilityConstantStillHolds) {
  // With a contractive closed loop ‖x‖_{L^p(0,T)} ≤ T^{1/p}‖x₀‖ whatever M
  // is, so M/100 cannot break the first bound. The other two are evaluated
  // where the state has already decayed and do not notice either.
  const auto& s = heat16();
  const double rho = 0.5 * s.rho1;
  auto h = s.constants;
  h.M /= 100.0;
  const auto cert = compute_direct_certificate(h, rho);
  const Trajectory traj = run(rho, mixed_state(16), 2.0, 0.01);
  const auto rep = verify_mild_bounds(traj, cert, run(0.0, mixed_state(16), 2.0, 0.01));
  const Check* lp = rep.find("lp_bound");
  EXPECT_TRUE(lp->passed);
  EXPECT_LE(lp->lhs, std::sqrt(cert.T) * traj.norms()[0]);
  EXPECT_TRUE(rep.pass());
}

TEST(Verifier, InflatedRateFailsEnvelope) {
  const auto& s = heat16();
  const double rho = 0.9 * s.rho1;
  auto cert = compute_direct_certificate(s.constants, rho);
  const Trajectory traj = run(rho, mixed_state(16));
  const auto honest = verify_decay(traj, cert);
  ASSERT_TRUE(honest.pass());
  cert.sigma = 2.0 * *honest.sigma_meas;
  const auto rep = verify_decay(traj, cert);
  const Check* env = rep.find("envelope");
  EXPECT_FALSE(env->passed);
  ASSERT_TRUE(env->witness.has_value());
  EXPECT_GT(traj.norms()[*env->witness], cert.K * std::exp(-cert.sigma * traj.times()[*env->witness]) * traj.norms()[0]);
  EXPECT_FALSE(rep.find("measured_rate")->passed);
  EXPECT_FALSE(rep.pass());
}

TEST(Verifier, SingleModeRate) {
  const auto& s = heat16();
  const double rho = 0.5 * s.rho1;
  const auto cert = compute_direct_certificate(s.constants, rho);
  const Trajectory traj = run(rho, ModalVector::basis(16, 1), 2.0, 0.1);
  const auto sigma = measured_decay_rate(traj, 0.1);
  ASSERT_TRUE(sigma.has_value());
  EXPECT_NEAR(*sigma, kPi * kPi + rho * kPi, 1e-9);
  EXPECT_GT(*sigma, cert.sigma);
}

TEST(Verifier, ScaleInvariant) {
  const auto& s = heat16();
  const double rho = 0.25 * s.rho1;
  const auto cert = compute_direct_certificate(s.constants, rho);
  const auto a = verify_decay(run(rho, mixed_state(16)), cert);
  const auto b = verify_decay(run(rho, mixed_state(16, 1e3)), cert);
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    EXPECT_EQ(a.checks[i].passed, b.checks[i].passed);
    EXPECT_NEAR(a.checks[i].slack_factor, b.checks[i].slack_factor, 1e-9 * a.checks[i].slack_factor);
  }
  EXPECT_NEAR(*a.sigma_meas, *b.sigma_meas, 1e-9);
}

TEST(Verifier, ZeroStateIsVacuous) {
  const auto& s = heat16();
  const auto cert = compute_direct_certificate(s.constants, 0.5 * s.rho1);
  const auto rep = verify_decay(run(0.5 * s.rho1, ModalVector::zero(16)), cert);
  EXPECT_TRUE(rep.pass());
  EXPECT_FALSE(rep.sigma_meas.has_value());
}

TEST(Verifier, Preconditions) {
  const auto& s = heat16();
  auto invalid = compute_direct_certificate(s.constants, 10.0 * s.rho1);
  ASSERT_FALSE(invalid.valid);
  EXPECT_THROW(verify_decay(run(0.1, mixed_state(16)), invalid), std::invalid_argument);
  const auto cert = compute_direct_certificate(s.constants, 0.5 * s.rho1);
  EXPECT_THROW(verify_decay(run(0.5 * s.rho1, mixed_state(16), 2.0, 0.1), cert), std::invalid_argument);
  // Gain mismatch between trajectory and certificate.
  EXPECT_THROW(verify_mild_bounds(run(0.01, mixed_state(16), 2.0, 0.1), cert, run(0.0, mixed_state(16), 2.0, 0.1)),
               std::invalid_argument);
}

TEST(Verifier, MonotoneIsWarningWithoutContraction) {
  StabilityCertificate cert;
  cert.valid = true;
  cert.T = 1.0;
  cert.K = 10.0;
  cert.C2 = 1.0;
  cert.sigma = 0.0;
  Trajectory traj("id", 0.1, StateKind::modal);
  const std::vector<double> norms{1.0, 1.2, 0.9, 0.5};
  for (std::size_t k = 0; k < norms.size(); ++k) traj.append(static_cast<double>(k), Eigen::VectorXd::Constant(1, norms[k]));
  const auto strict = verify_decay(traj, cert, true);
  EXPECT_FALSE(strict.find("monotone")->passed);
  EXPECT_EQ(strict.find("monotone")->witness, 1u);
  EXPECT_FALSE(strict.pass());
  const auto lenient = verify_decay(traj, cert, false);
  EXPECT_FALSE(lenient.find("monotone")->passed);
  EXPECT_TRUE(lenient.find("monotone")->ok());
  EXPECT_EQ(to_json(*lenient.find("monotone"))["status"], "WARN");
}

TEST(Verifier, MeasuredRateFit) {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  std::vector<double> y;
  for (double v : t) y.push_back(2.0 * std::exp(-0.7 * v));
  EXPECT_NEAR(*measured_decay_rate(t, y), 0.7, 1e-12);
  EXPECT_FALSE(measured_decay_rate(std::vector<double>{0.0}, std::vector<double>{1.0}).has_value());
  const std::vector<double> zeros{0.0, 0.0, 0.0, 0.0};
  EXPECT_FALSE(measured_decay_rate(t, zeros).has_value());
}

TEST(Verifier, OracleExpmDiagonal) {
  const SpectralDiffusionModel m(GridFunction::constant(257, 0.0), 16, 0.3);
  std::vector<double> times;
  for (int k = 1; k <= 20; ++k) times.push_back(0.1 * k);
  EXPECT_LE(oracle_expm_compare(m, mixed_state(16), times), 1e-10);
}

TEST(Verifier, OracleExpmRandomPotential) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  const auto g = GridFunction::sample(257, [&](double z) { return 3.0 * a + 2.0 * b * std::sin(5.0 * z) + c * z; });
  const SpectralDiffusionModel m(g, 8, 0.7);
  ASSERT_GT(m.contraction().margin, 0.0);
  std::vector<double> times;
  for (int k = 1; k <= 20; ++k) times.push_back(0.05 * k);
  EXPECT_LE(oracle_expm_compare(m, mixed_state(8), times), 1e-8);
  EXPECT_THROW(oracle_expm_compare(SpectralDiffusionModel(GridFunction::constant(257, 0.0), 65, 0.0),
                                   ModalVector::basis(65, 1), times),
               std::invalid_argument);
}

TEST(Verifier, ReportJson) {
  const auto& s = heat16();
  const auto cert = compute_direct_certificate(s.constants, 0.5 * s.rho1);
  const auto j = to_json(verify_decay(run(0.5 * s.rho1, mixed_state(16)), cert));
  EXPECT_EQ(j["status"], "PASS");
  EXPECT_EQ(j["checks"].size(), 4u);
  EXPECT_GT(j["sigma_margin"].get<double>(), 0.0);
}
