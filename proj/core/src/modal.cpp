#include "dsstab/modal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsstab {

double dirichlet_eigenvalue(std::size_t j) {
  if (j == 0) throw std::invalid_argument("mode index is 1-based");
  const double jp = static_cast<double>(j) * kPi;
  return jp * jp;
}

Eigen::VectorXd dirichlet_eigenvalues(std::size_t order) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(order));
  for (std::size_t j = 1; j <= order; ++j) a[static_cast<Eigen::Index>(j - 1)] = dirichlet_eigenvalue(j);
  return a;
}

ModalVector::ModalVector(Eigen::VectorXd coefficients) : c_(std::move(coefficients)) {}

ModalVector ModalVector::zero(std::size_t order) {
  return ModalVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order)));
}

ModalVector ModalVector::basis(std::size_t order, std::size_t j) {
  if (j == 0 || j > order) {
    throw std::invalid_argument("basis index " + std::to_string(j) + " outside 1.." + std::to_string(order));
  }
  ModalVector v = zero(order);
  v.c_[static_cast<Eigen::Index>(j - 1)] = 1.0;
  return v;
}

double ModalVector::coefficient(std::size_t j) const {
  if (j == 0 || j > order()) throw std::out_of_range("modal coefficient index");
  return c_[static_cast<Eigen::Index>(j - 1)];
}

double ModalVector::norm() const { return c_.norm(); }

double ModalVector::norm_x1() const {
  return std::sqrt((dirichlet_eigenvalues(order()).array() * c_.array().square()).sum());
}

double ModalVector::norm_xm1() const {
  return std::sqrt((c_.array().square() / dirichlet_eigenvalues(order()).array()).sum());
}

ModalVector& ModalVector::operator+=(const ModalVector& other) {
  if (other.order() != order()) throw std::invalid_argument("modal order mismatch");
  c_ += other.c_;
  return *this;
}

ModalVector& ModalVector::operator-=(const ModalVector& other) {
  if (other.order() != order()) throw std::invalid_argument("modal order mismatch");
  c_ -= other.c_;
  return *this;
}

ModalVector& ModalVector::operator*=(double s) {
  c_ *= s;
  return *this;
}

ModalVector operator+(ModalVector a, const ModalVector& b) { return a += b; }
ModalVector operator-(ModalVector a, const ModalVector& b) { return a -= b; }
ModalVector operator*(double s, ModalVector v) { return v *= s; }

GridFunction::GridFunction(Eigen::VectorXd values) : v_(std::move(values)) {
  if (v_.size() < 2) throw std::invalid_argument("grid function needs at least 2 nodes");
}

GridFunction GridFunction::constant(std::size_t n, double value) {
  if (n < 2) throw std::invalid_argument("grid function needs at least 2 nodes");
  return GridFunction(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), value));
}

double GridFunction::operator()(double zeta) const {
  const double x = std::clamp(zeta, 0.0, 1.0) * static_cast<double>(size() - 1);
  const auto i = std::min(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(size() - 2));
  const double theta = x - static_cast<double>(i);
  return (1.0 - theta) * v_[i] + theta * v_[i + 1];
}

double GridFunction::norm() const { return std::sqrt(inner_product(*this, *this)); }
double GridFunction::sup_norm() const { return v_.cwiseAbs().maxCoeff(); }
double GridFunction::min() const { return v_.minCoeff(); }
double GridFunction::max() const { return v_.maxCoeff(); }

Eigen::VectorXd trapezoid_weights(std::size_t n) {
  if (n < 2) throw std::invalid_argument("trapezoid rule needs at least 2 nodes");
  const double h = 1.0 / static_cast<double>(n - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), h);
  w[0] = 0.5 * h;
  w[static_cast<Eigen::Index>(n - 1)] = 0.5 * h;
  return w;
}

double inner_product(const GridFunction& f, const GridFunction& g) {
  if (f.size() != g.size()) throw std::invalid_argument("grid size mismatch");
  return (trapezoid_weights(f.size()).array() * f.values().array() * g.values().array()).sum();
}

Eigen::MatrixXd sine_basis(std::size_t n, std::size_t order) {
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(order));
  const double s2 = std::sqrt(2.0);
  for (std::size_t j = 1; j <= order; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) =
          s2 * std::sin(static_cast<double>(j) * kPi * GridFunction::node(n, i));
    }
  }
  return phi;
}

ModalVector grid_to_modal(const GridFunction& f, std::size_t order) {
  if (f.size() < 2 * order + 1) {
    throw std::invalid_argument("grid of " + std::to_string(f.size()) + " points is too coarse for " +
                                std::to_string(order) + " modes (need n >= 2N+1)");
  }
  const Eigen::VectorXd weighted = trapezoid_weights(f.size()).cwiseProduct(f.values());
  return ModalVector(sine_basis(f.size(), order).transpose() * weighted);
}

GridFunction modal_to_grid(const ModalVector& v, std::size_t n) {
  return GridFunction(sine_basis(n, v.order()) * v.coefficients());
}

}  // namespace dsstab
