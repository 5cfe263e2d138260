#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "dsstab/semigroup.hpp"
#include "oracles.hpp"

using namespace dsstab;

namespace {

ModalVector random_modal(std::size_t order, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  Eigen::VectorXd c(static_cast<Eigen::Index>(order));
  for (auto& v : c) v = n(rng);
  return ModalVector(c);
}

}  // namespace

TEST(PhiFunctions, ValuesAtZero) {
  EXPECT_DOUBLE_EQ(phi_function(0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(phi_function(1, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(phi_function(2, 0.0), 0.5);
  EXPECT_NEAR(phi_function(3, 0.0), 1.0 / 6.0, 1e-16);
  EXPECT_THROW(phi_function(4, 0.0), std::invalid_argument);
}

TEST(PhiFunctions, MatchClosedForms) {
  for (double z : {-700.0, -50.0, -3.0, -1e-3, -1e-9, 1e-7, 0.5, 4.0}) {
    const double e = std::exp(z);
    const double f1 = std::expm1(z) / z;
    const double f2 = (f1 - 1.0) / z;
    EXPECT_NEAR(phi_function(0, z), e, 1e-15 * std::max(1.0, e));
    EXPECT_NEAR(phi_function(1, z), f1, 1e-13 * std::max(1.0, f1)) << z;
    if (std::abs(z) > 1e-2) EXPECT_NEAR(phi_function(2, z), f2, 1e-12 * std::max(1.0, f2)) << z;
  }
  // Series regime against three Taylor terms.
  const double z = 1e-6;
  EXPECT_NEAR(phi_function(2, z), 0.5 + z / 6.0 + z * z / 24.0, 1e-16);
  EXPECT_NEAR(phi_function(3, -z), 1.0 / 6.0 - z / 24.0 + z * z / 120.0, 1e-16);
}

TEST(Semigroup, FirstModeDecay) {
  const ModalVector v = diag_semigroup_apply(0.1, ModalVector::basis(4, 1));
  EXPECT_NEAR(v.coefficient(1), 0.37270783885343794, 1e-15);
  EXPECT_DOUBLE_EQ(v.coefficient(2), 0.0);
  EXPECT_THROW(diag_semigroup_apply(-1.0, v), std::invalid_argument);
}

TEST(Semigroup, PropagatorMatchesTaylorOracle) {
  std::mt19937 rng(11);
  std::normal_distribution<double> n;
  Eigen::MatrixXd a(6, 6);
  for (auto& v : a.reshaped()) v = n(rng);
  a = (a + a.transpose()).eval() - 8.0 * Eigen::MatrixXd::Identity(6, 6);
  const SymmetricPropagator prop(a);
  for (double t : {0.0, 0.01, 0.3, 1.7}) {
    const Eigen::MatrixXd ref = oracle::expm_taylor(a * t);
    EXPECT_LT((prop.matrix(t) - ref).norm(), 1e-11 * ref.norm()) << t;
  }
}

TEST(Semigroup, CommutingPerturbation) {
  for (double c : {1.0, 9.0}) {
    const SpectralDiffusionModel m(GridFunction::constant(513, c), 16, 0.0);
    const ModalVector v = random_modal(16, 3);
    for (double t : {0.0, 0.05, 0.4, 2.0}) {
      const ModalVector got = perturbed_semigroup_apply(m, t, v);
      const ModalVector want = std::exp(c * t) * diag_semigroup_apply(t, v);
      EXPECT_LE((got - want).norm(), 1e-6 * want.norm()) << c << " " << t;
    }
  }
}

TEST(Semigroup, SemigroupLaw) {
  const auto g = GridFunction::sample(513, [](double z) { return 4.0 * std::cos(3.0 * z); });
  const SpectralDiffusionModel m(g, 12, 0.0);
  const ModalVector v = random_modal(12, 5);
  const ModalVector split = perturbed_semigroup_apply(m, 0.07, perturbed_semigroup_apply(m, 0.13, v));
  const ModalVector whole = perturbed_semigroup_apply(m, 0.2, v);
  EXPECT_LE((split - whole).norm(), 1e-12 * whole.norm());
  EXPECT_LE((perturbed_semigroup_apply(m, 0.0, v) - v).norm(), 1e-13 * v.norm());
}

TEST(Semigroup, PerturbedModeBound) {
  const auto g = GridFunction::sample(513, [](double z) { return 5.0 * z * (1.0 - z); });
  const SpectralDiffusionModel m(g, 16, 0.0);
  ASSERT_TRUE(m.contraction_ok());
  const ModalVector v = random_modal(16, 9);
  for (double t : {0.01, 0.1, 1.0}) {
    const ModalVector s = perturbed_semigroup_apply(m, t, v);
    const Eigen::VectorXd bound = perturbed_mode_bound(m, t, v);
    for (std::size_t j = 1; j <= 16; ++j) {
      EXPECT_LE(std::abs(s.coefficient(j)), bound[static_cast<Eigen::Index>(j - 1)] * (1.0 + 1e-12));
    }
  }
}

TEST(TransportSemigroup, ShiftAndDecay) {
  const TransportModel m(GridFunction::constant(101, 1.0), GridFunction::constant(101, 1.0), 0.5, 0.0);
  const auto u = GridFunction::sample(101, [](double z) { return std::sin(kPi * z) * std::sin(kPi * z); });
  const GridFunction s = transport_semigroup_apply(m, 0.25, u);
  for (std::size_t i = 0; i < 101; ++i) {
    const double z = s.node(i);
    const double want = z + 0.25 <= 1.0 + 1e-12 ? std::exp(-0.125) * u(z + 0.25) : 0.0;
    EXPECT_NEAR(s[i], want, 1e-14);
  }
  // u vanishes at ζ = 1 so the trapezoid norm cannot gain at the junction.
  for (double t : {0.1, 0.37, 0.9}) {
    EXPECT_LE(transport_semigroup_apply(m, t, u).norm(), std::exp(-0.5 * t) * u.norm() * (1.0 + 1e-12));
  }
}

TEST(TransportSemigroup, NilpotentAfterUnitTime) {
  const TransportModel m(GridFunction::constant(65, 1.0), GridFunction::constant(65, 1.0), 0.5, 0.0);
  const auto u = GridFunction::sample(65, [](double z) { return 1.0 + z; });
  EXPECT_DOUBLE_EQ(transport_semigroup_apply(m, 1.0, u).sup_norm(), 0.0);
  EXPECT_DOUBLE_EQ(transport_semigroup_apply(m, 3.5, u).sup_norm(), 0.0);
  EXPECT_GT(transport_semigroup_apply(m, 0.98, u).sup_norm(), 0.0);
}

TEST(TransportSemigroup, LawOnGridAlignedTimes) {
  const TransportModel m(GridFunction::constant(65, 1.0), GridFunction::constant(65, 1.0), 0.3, 0.0);
  const auto u = GridFunction::sample(65, [](double z) { return std::cos(7.0 * z); });
  const double s = 10.0 / 64.0, t = 21.0 / 64.0;
  const GridFunction a = transport_semigroup_apply(m, s, transport_semigroup_apply(m, t, u));
  const GridFunction b = transport_semigroup_apply(m, s + t, u);
  EXPECT_LT((a.values() - b.values()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Yosida, ConvergesToControl) {
  Eigen::VectorXd c = Eigen::VectorXd::Ones(8);
  const ModalVector v(c);
  const ModalVector bv = control_apply(v);
  EXPECT_NEAR(bv.coefficient(3), 3.0 * kPi, 1e-12);
  double prev = INFINITY;
  for (double lambda : {1e2, 1e4, 1e6, 1e8}) {
    const double err = (yosida_control_apply(lambda, v) - bv).norm_xm1() / bv.norm_xm1();
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LE(prev, 1e-4);
  EXPECT_THROW(yosida_control_apply(0.0, v), std::invalid_argument);
}
