#pragma once

#include <cstddef>
#include <numbers>

#include <Eigen/Dense>

namespace dsstab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr std::size_t kDefaultModes = 64;
inline constexpr std::size_t kDefaultGridSize = 513;

/// Dirichlet Laplacian eigenvalue α_j = j²π² on (0,1), j ≥ 1.
double dirichlet_eigenvalue(std::size_t j);

/// (α_1, ..., α_order).
Eigen::VectorXd dirichlet_eigenvalues(std::size_t order);

/// State expressed in the orthonormal sine basis φ_j(ζ) = √2 sin(jπζ).
///
/// Coefficients are stored 0-based (index j-1 holds c_j). The three norms
/// are the X = L², X₁ and X₋₁ norms with diagonal weights α_j, 1 and 1/α_j.
class ModalVector {
 public:
  ModalVector() = default;
  explicit ModalVector(Eigen::VectorXd coefficients);

  static ModalVector zero(std::size_t order);
  /// φ_j as a modal vector of the given order (j is 1-based).
  static ModalVector basis(std::size_t order, std::size_t j);

  std::size_t order() const { return static_cast<std::size_t>(c_.size()); }
  const Eigen::VectorXd& coefficients() const { return c_; }
  /// c_j for 1-based j.
  double coefficient(std::size_t j) const;

  double norm() const;
  double norm_x1() const;
  double norm_xm1() const;

  ModalVector& operator+=(const ModalVector& other);
  ModalVector& operator-=(const ModalVector& other);
  ModalVector& operator*=(double s);

 private:
  Eigen::VectorXd c_;
};

ModalVector operator+(ModalVector a, const ModalVector& b);
ModalVector operator-(ModalVector a, const ModalVector& b);
ModalVector operator*(double s, ModalVector v);

/// Real function sampled on the uniform grid ζ_i = i/(n-1) of [0,1].
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(Eigen::VectorXd values);

  static GridFunction constant(std::size_t n, double value);

  template <typename F>
  static GridFunction sample(std::size_t n, F&& f) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      v[static_cast<Eigen::Index>(i)] = f(node(n, i));
    }
    return GridFunction(std::move(v));
  }

  static double node(std::size_t n, std::size_t i) {
    return static_cast<double>(i) / static_cast<double>(n - 1);
  }

  std::size_t size() const { return static_cast<std::size_t>(v_.size()); }
  double spacing() const { return 1.0 / static_cast<double>(size() - 1); }
  double node(std::size_t i) const { return node(size(), i); }
  const Eigen::VectorXd& values() const { return v_; }
  double operator[](std::size_t i) const { return v_[static_cast<Eigen::Index>(i)]; }

  /// Piecewise-linear interpolant; arguments outside [0,1] are clamped.
  double operator()(double zeta) const;

  /// Trapezoid L² norm.
  double norm() const;
  double sup_norm() const;
  double min() const;
  double max() const;

 private:
  Eigen::VectorXd v_;
};

/// Composite trapezoid weights for an n-point uniform grid on [0,1].
Eigen::VectorXd trapezoid_weights(std::size_t n);

/// ⟨f, g⟩ by the composite trapezoid rule. Grids must match.
double inner_product(const GridFunction& f, const GridFunction& g);

/// n × order matrix with entries φ_j(ζ_i).
Eigen::MatrixXd sine_basis(std::size_t n, std::size_t order);

/// Projects onto φ_1..φ_order by trapezoid quadrature. Requires n ≥ 2·order+1.
ModalVector grid_to_modal(const GridFunction& f, std::size_t order);

/// Evaluates Σ c_j φ_j on an n-point grid.
GridFunction modal_to_grid(const ModalVector& v, std::size_t n);

}  // namespace dsstab
