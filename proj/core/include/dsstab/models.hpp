#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "dsstab/modal.hpp"

namespace dsstab {

/// Outcome of testing ∫ g y² ≤ ‖y‖²_{H₀¹} on the truncated sine basis.
struct ContractionReport {
  bool ok = false;
  /// 1 − μ_max, where μ_max is the top eigenvalue of α^{-1/2} G α^{-1/2}.
  double margin = 0.0;
  double mu_max = 0.0;
  /// μ_max recomputed with twice as many modes; NaN when the grid cannot resolve 2N.
  double mu_max_refined = 0.0;
  /// |μ_max(2N) − μ_max(N)| / max(|μ_max(N)|, 1).
  double tail_change = 0.0;
};

/// Tolerance applied to the eigenvalue test so the boundary case g ≡ π² passes.
inline constexpr double kContractionTolerance = 1e-10;

/// G_{jk} = ⟨g φ_k, φ_j⟩ by trapezoid quadrature.
Eigen::MatrixXd potential_coupling(const GridFunction& g, std::size_t order);

ContractionReport contraction_condition_check(const GridFunction& g, std::size_t order = kDefaultModes);

/// Heat equation with potential on (0,1) and fractional control B = (−Δ)^{1/2},
/// truncated to `order` sine modes: ċ = (diag(−α) + G − ρ diag(√α)) c.
class SpectralDiffusionModel {
 public:
  SpectralDiffusionModel(GridFunction potential, std::size_t order, double rho);

  std::size_t order() const { return order_; }
  const GridFunction& potential() const { return g_; }
  /// G, symmetric.
  const Eigen::MatrixXd& coupling() const { return coupling_; }
  double rho() const { return rho_; }
  bool contraction_ok() const { return contraction_.ok; }
  const ContractionReport& contraction() const { return contraction_; }
  /// True when g vanishes identically, so every operator is diagonal in φ_j.
  bool is_diagonal() const { return diagonal_; }

  /// A_N = diag(−α_j) + G.
  Eigen::MatrixXd generator() const;
  /// B_N = diag(α_j^{1/2}).
  Eigen::MatrixXd control() const;
  /// A_N − ρ B_N.
  Eigen::MatrixXd closed_loop_generator() const;

  SpectralDiffusionModel with_rho(double rho) const;

 private:
  std::size_t order_;
  GridFunction g_;
  Eigen::MatrixXd coupling_;
  double rho_;
  ContractionReport contraction_;
  bool diagonal_;
};

/// Transport equation x_t = x_ζ − αx − εhx on (0,1) with the nonlocal inflow
/// condition x(1,t) = −ε ψ(x(t)), ψ(x) = ∫ f x.
class TransportModel {
 public:
  TransportModel(GridFunction h, GridFunction f, double alpha, double epsilon);

  std::size_t size() const { return h_.size(); }
  double alpha() const { return alpha_; }
  const GridFunction& h() const { return h_; }
  /// Essential lower bound c of h (grid minimum).
  double lower_bound() const { return h_.min(); }
  const GridFunction& f() const { return f_; }
  double epsilon() const { return epsilon_; }

  /// ψ(x) by trapezoid quadrature.
  double psi(const GridFunction& x) const;

  TransportModel with_epsilon(double epsilon) const;

 private:
  GridFunction h_;
  GridFunction f_;
  double alpha_;
  double epsilon_;
};

/// Stable 64-bit identifier of every parameter that determines a model,
/// gain included.
std::string model_hash(const SpectralDiffusionModel& model);
std::string model_hash(const TransportModel& model);

}  // namespace dsstab
