#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "dsstab/certificate.hpp"
#include "dsstab/io.hpp"

using namespace dsstab;

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Io, GridRoundTrip) {
  const auto f = GridFunction::sample(17, [](double z) { return std::exp(z) / 3.0; });
  std::stringstream ss;
  write_grid_csv(ss, f);
  EXPECT_EQ(ss.str().substr(0, 11), "zeta,value\n");
  const GridFunction g = read_grid_csv(ss);
  EXPECT_EQ(g.values(), f.values());
}

TEST(Io, ModalRoundTrip) {
  Eigen::VectorXd c(3);
  c << 0.1, -1.0 / 7.0, 1e-17;
  std::stringstream ss;
  write_modal_csv(ss, ModalVector(c));
  EXPECT_EQ(read_modal_csv(ss).coefficients(), c);
}

TEST(Io, ModalTrajectoryRoundTrip) {
  Trajectory traj("id", 0.5, StateKind::modal);
  traj.append(0.0, Eigen::Vector2d(1.0, 0.3));
  traj.append(0.1, Eigen::Vector2d(0.5, 1.0 / 3.0));
  std::stringstream ss;
  write_trajectory_csv(ss, traj, true);
  const Trajectory back = read_trajectory_csv(ss, "id", 0.5);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.kind(), StateKind::modal);
  EXPECT_EQ(back.states()[1], traj.states()[1]);
  EXPECT_EQ(back.norms(), traj.norms());
  EXPECT_EQ(back.times(), traj.times());
}

TEST(Io, GridTrajectoryNormsOnly) {
  Trajectory traj("id", 0.0, StateKind::grid);
  traj.append(0.0, Eigen::Vector3d(1.0, 2.0, 3.0));
  traj.append(0.5, Eigen::Vector3d(0.0, 1.0, 0.0));
  std::stringstream ss;
  write_trajectory_csv(ss, traj, false);
  const Trajectory back = read_trajectory_csv(ss, "id", 0.0);
  EXPECT_FALSE(back.has_states());
  EXPECT_EQ(back.norms(), traj.norms());
}

TEST(Io, FormatErrors) {
  auto grid = [](const std::string& s) {
    std::istringstream in(s);
    return read_grid_csv(in);
  };
  EXPECT_THROW(grid(""), FormatError);
  EXPECT_THROW(grid("z,v\n0,1\n1,1\n"), FormatError);
  EXPECT_THROW(grid("zeta,value\n0,1\n"), FormatError);
  EXPECT_THROW(grid("zeta,value\n0,1\n0.4,2\n1,1\n"), FormatError);
  EXPECT_THROW(grid("zeta,value\n0,abc\n1,1\n"), FormatError);
  EXPECT_THROW(grid("zeta,value\n0,1,2\n1,1\n"), FormatError);

  std::istringstream modal("j,c_j\n2,1\n");
  EXPECT_THROW(read_modal_csv(modal), FormatError);

  std::istringstream empty_traj("t,norm_X\n");
  EXPECT_THROW(read_trajectory_csv(empty_traj, "id", 0.0), FormatError);
  std::istringstream bad_norm("t,norm_X,c_1\n0,5,1\n");
  EXPECT_THROW(read_trajectory_csv(bad_norm, "id", 0.0), FormatError);
}

TEST(Io, TrajectoryOrdering) {
  Trajectory traj("id", 0.0, StateKind::modal);
  EXPECT_THROW(traj.append(0.5, Eigen::Vector2d(1, 0)), std::invalid_argument);
  traj.append(0.0, Eigen::Vector2d(1, 0));
  EXPECT_THROW(traj.append(0.0, Eigen::Vector2d(1, 0)), std::invalid_argument);
  EXPECT_THROW(traj.append(1.0, Eigen::Vector3d(1, 0, 0)), std::invalid_argument);
  EXPECT_THROW(traj.append_norm(1.0, 1.0), std::logic_error);
}

TEST(Io, LpNormOfConstant) {
  Trajectory traj("id", 0.0, StateKind::modal);
  for (int k = 0; k <= 10; ++k) traj.append(0.1 * k, Eigen::Vector2d(3.0, 4.0));
  EXPECT_NEAR(lp_norm(traj, 2.0, 0.0, 1.0), 5.0, 1e-12);
  EXPECT_NEAR(lp_norm(traj, 1.0, 0.0, 0.5), 2.5, 1e-12);
}

TEST(Io, CertificateJsonRoundTrip) {
  StabilityCertificate c;
  c.path = CertificatePath::decomposition;
  c.T = 0.5;
  c.M = 1.4;
  c.delta = 0.6487212707001282;
  c.L = 1.0;
  c.C = std::numeric_limits<double>::quiet_NaN();
  c.rho = 0.05;
  c.M_rho = 2.1;
  c.C1 = 0.3;
  c.C2 = 0.97;
  c.K = 1.0 / std::sqrt(0.97);
  c.sigma = -std::log(0.97);
  c.rho1 = 0.118;
  c.M_source = Provenance::config;
  c.valid = true;
  const StabilityCertificate back = certificate_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(back.path, c.path);
  EXPECT_EQ(back.M, c.M);
  EXPECT_EQ(back.delta, c.delta);
  EXPECT_TRUE(std::isnan(back.C));
  EXPECT_EQ(back.K, c.K);
  EXPECT_EQ(back.sigma, c.sigma);
  EXPECT_EQ(back.rho1, c.rho1);
  EXPECT_EQ(back.M_source, Provenance::config);
  EXPECT_TRUE(back.valid);
}

TEST(Io, EnumStrings) {
  EXPECT_EQ(provenance_from_string(to_string(Provenance::estimate)), Provenance::estimate);
  EXPECT_EQ(path_from_string(to_string(CertificatePath::direct)), CertificatePath::direct);
  EXPECT_ANY_THROW(path_from_string("sideways"));
}
