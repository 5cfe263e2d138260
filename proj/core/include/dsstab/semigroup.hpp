#pragma once

#include <Eigen/Dense>

#include "dsstab/modal.hpp"
#include "dsstab/models.hpp"

namespace dsstab {

/// φ_k(z) = Σ_{m≥0} z^m/(m+k)! for k = 0..3, so φ_0 = e^z and
/// φ_1(z) = (e^z − 1)/z. Accurate near z = 0 and for large negative z.
double phi_function(int k, double z);

/// e^{tA} for a symmetric matrix A, through one eigendecomposition.
class SymmetricPropagator {
 public:
  explicit SymmetricPropagator(const Eigen::MatrixXd& generator);

  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  const Eigen::MatrixXd& eigenvectors() const { return q_; }
  Eigen::Index dimension() const { return lambda_.size(); }

  Eigen::VectorXd apply(double t, const Eigen::VectorXd& v) const;
  Eigen::MatrixXd matrix(double t) const;

 private:
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd q_;
};

/// S₀(t)v for the Dirichlet heat semigroup: c_j ↦ e^{−α_j t} c_j.
ModalVector diag_semigroup_apply(double t, const ModalVector& v);

/// S(t)v for A = Δ + g, i.e. the fixed point of
/// S(t)v = S₀(t)v + ∫₀ᵗ S₀(t−s) g S(s)v ds, computed as e^{t(diag(−α)+G)} v.
ModalVector perturbed_semigroup_apply(const SpectralDiffusionModel& model, double t, const ModalVector& v);

/// Per-mode bound e^{−α_j t}‖v‖ + ‖g‖_∞ (1 − e^{−α_j t})/α_j ‖v‖ on |⟨S(t)v, φ_j⟩|,
/// valid when S(t) is a contraction.
Eigen::VectorXd perturbed_mode_bound(const SpectralDiffusionModel& model, double t, const ModalVector& v);

/// Shift-and-decay transport semigroup: e^{−αt} u(ζ+t) for ζ+t ≤ 1, else 0.
/// Off-grid values use linear interpolation; the result vanishes for t ≥ 1.
GridFunction transport_semigroup_apply(const TransportModel& model, double t, const GridFunction& u);

/// Bv = Σ α_j^{1/2} c_j φ_j.
ModalVector control_apply(const ModalVector& v);

/// Yosida approximant B_λ = λ R(λ, A₋₁) B for g = 0:
/// c_j ↦ λ α_j^{1/2} / (λ + α_j) c_j.
ModalVector yosida_control_apply(double lambda, const ModalVector& v);

}  // namespace dsstab
