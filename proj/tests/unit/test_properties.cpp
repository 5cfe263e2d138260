// Randomized invariants over many seeded instances.

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "dsstab/certificates.hpp"
#include "dsstab/closed_loop.hpp"
#include "dsstab/io.hpp"
#include "dsstab/semigroup.hpp"

using namespace dsstab;

namespace {

constexpr int kCases = 25;

GridFunction random_potential(std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng), k = 1.0 + 4.0 * (u(rng) + 1.0);
  return GridFunction::sample(257, [=](double z) {
    return amplitude * (a + b * std::sin(k * z) + c * z * z);
  });
}

ModalVector random_state(std::mt19937_64& rng, std::size_t order) {
  std::normal_distribution<double> n;
  Eigen::VectorXd c(static_cast<Eigen::Index>(order));
  for (auto& v : c) v = n(rng);
  return ModalVector(c);
}

}  // namespace

TEST(Properties, ContractiveClosedLoopNormNeverGrows) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> gain(0.0, 3.0);
  for (int i = 0; i < kCases; ++i) {
    const SpectralDiffusionModel m(random_potential(rng, 3.0), 12, gain(rng));
    if (!m.contraction_ok()) continue;
    const Trajectory traj = heat_closed_loop_solve(m, random_state(rng, 12), 1.0, 0.02);
    for (std::size_t k = 1; k < traj.size(); ++k) {
      EXPECT_LE(traj.norms()[k], traj.norms()[k - 1] * (1.0 + 1e-12)) << i << " " << k;
    }
  }
}

TEST(Properties, SemigroupLawRandom) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(0.0, 0.5);
  for (int i = 0; i < kCases; ++i) {
    const SpectralDiffusionModel m(random_potential(rng, 8.0), 10, 0.0);
    const ModalVector v = random_state(rng, 10);
    const double s = t(rng), r = t(rng);
    const ModalVector a = perturbed_semigroup_apply(m, s, perturbed_semigroup_apply(m, r, v));
    const ModalVector b = perturbed_semigroup_apply(m, s + r, v);
    EXPECT_LE((a - b).norm(), 1e-11 * std::max(1.0, b.norm())) << i;
  }
}

TEST(Properties, ValidCertificateIsConsistent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int valid = 0;
  for (int i = 0; i < 200; ++i) {
    HypothesisConstants h;
    h.M = 0.1 + 2.0 * u(rng);
    h.delta = std::pow(10.0, -1.0 + 6.0 * u(rng));
    h.T = 0.1 + 2.0 * u(rng);
    h.p = 1.5 + 2.0 * u(rng);
    h.C = 0.5 + u(rng);
    const double limit = 1.0 / (std::pow(h.T, 1.0 / h.p) * h.M);
    const double rho = limit * u(rng);
    for (const auto& c : {compute_direct_certificate(h, rho), compute_decomposition_certificate(h, rho)}) {
      if (!c.valid) {
        EXPECT_FALSE(c.reason.empty());
        continue;
      }
      ++valid;
      EXPECT_GT(c.C2, 0.0);
      EXPECT_LT(c.C2, 1.0);
      EXPECT_GT(c.K, 1.0);
      EXPECT_GT(c.sigma, 0.0);
      // One period of the envelope equals the per-period contraction.
      EXPECT_NEAR(c.K * std::exp(-c.sigma * c.T), 1.0, 1e-12);
      EXPECT_GT(c.M_rho, 2.0 * c.admissibility_scale() * (1.0 - 1e-12));
    }
  }
  EXPECT_GT(valid, 20);
}

TEST(Properties, GainSearchBracketsTheCrossing) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < kCases; ++i) {
    HypothesisConstants h;
    h.M = 0.2 + u(rng);
    h.delta = std::pow(10.0, 4.0 * u(rng));
    h.T = 0.2 + u(rng);
    const auto s = search_rho1(h, CertificatePath::direct);
    if (!s.rho1) continue;
    EXPECT_LT(compute_direct_certificate(h, *s.rho1).C2, 1.0) << i;
    const auto hi = compute_direct_certificate(h, s.hi);
    const double limit = 1.0 / (std::sqrt(h.T) * h.M);
    if (s.hi < limit) EXPECT_TRUE(!hi.valid || hi.C2 >= 1.0) << i;
  }
}

TEST(Properties, DissipativeBelowThreshold) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  for (int i = 0; i < kCases; ++i) {
    const double alpha = 0.1 + u(rng);
    const auto f = GridFunction::sample(129, [c = u(rng)](double z) { return 1.0 + c * z; });
    const double eps_max = std::sqrt(2.0 * alpha) / f.norm();
    const TransportModel m(GridFunction::constant(129, 1.0), f, alpha, 0.95 * eps_max * u(rng));
    Eigen::VectorXd v(129);
    for (auto& x : v) x = n(rng);
    const auto x = enforce_inflow_condition(m, GridFunction(v));
    const auto s = dissipativity_sample(m, x);
    EXPECT_LE(s.value, 1e-12 * s.norm_sq) << i;
    EXPECT_LE(s.value, s.bound + 1e-12 * s.norm_sq) << i;
  }
}

TEST(Properties, TrajectoryCsvRoundTrip) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  for (int i = 0; i < 10; ++i) {
    Trajectory traj("x", 0.0, StateKind::modal);
    double t = 0.0;
    for (int k = 0; k < 5; ++k) {
      traj.append(t, random_state(rng, 4).coefficients() * std::exp(10.0 * n(rng)));
      t += std::abs(n(rng)) + 1e-3;
    }
    std::stringstream ss;
    write_trajectory_csv(ss, traj, true);
    const Trajectory back = read_trajectory_csv(ss, "x", 0.0);
    EXPECT_EQ(back.times(), traj.times());
    EXPECT_EQ(back.norms(), traj.norms());
  }
}
