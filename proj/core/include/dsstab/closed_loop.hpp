#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsstab/modal.hpp"
#include "dsstab/models.hpp"
#include "dsstab/trajectory.hpp"

namespace dsstab {

/// ‖x‖_X ≤ threshold·‖x₀‖_X switches the bang-bang control off for good.
inline constexpr double kSwitchingThreshold = 1e-14;

/// Picard iteration stopped because successive distances kept growing.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact solution of ċ = (A_N − ρB_N)c sampled at the given increasing
/// times (times[0] must be 0). Once the norm drops below the switching
/// threshold the control is off and the open-loop semigroup takes over.
Trajectory heat_closed_loop_sample(const SpectralDiffusionModel& model, const ModalVector& x0,
                                   std::span<const double> times);

/// Samples at k·dt_out, k = 0..t_end/dt_out. dt_out must divide t_end.
Trajectory heat_closed_loop_solve(const SpectralDiffusionModel& model, const ModalVector& x0, double t_end,
                                  double dt_out);

struct PicardOptions {
  /// Uniform time steps on [0, T].
  std::size_t steps = 1000;
  /// Exponent of the L^p(0,T;X) distance between iterates.
  double p = 2.0;
  /// Stop once the increment falls below tolerance·‖x‖_{L^p}.
  double tolerance = 1e-13;
};

struct PicardResult {
  Trajectory trajectory;
  /// ‖x^{k+1} − x^k‖_{L^p(0,T;X)} for each performed iteration.
  std::vector<double> increments;
  /// increments[k+1] / increments[k].
  std::vector<double> ratios;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Iterates x ↦ S(·)x₀ − ρ ∫₀^· S₋₁(· − s) B x(s) ds from x⁰ = S(·)x₀.
///
/// The convolution is integrated exactly in the eigenbasis of A_N against a
/// piecewise-quadratic interpolant of Bx, so the iteration is the discrete
/// counterpart of the mild-solution fixed point. Throws DivergenceError when
/// the increments grow three times in a row.
PicardResult vpf_fixed_point_solve(const SpectralDiffusionModel& model, const ModalVector& x0, double T,
                                   std::size_t iterations, const PicardOptions& options = {});

struct TransportOptions {
  /// Δt/Δζ; must lie in (0, 1].
  double courant = 1.0;
  /// Keep full nodal states in the trajectory (norms are always kept).
  bool keep_states = true;
};

/// First-order upwind, explicit Euler discretization of
/// x_t = x_ζ − (α + εh)x with inflow x(1,t) = −εψ(x(t)).
Trajectory transport_closed_loop_solve(const TransportModel& model, const GridFunction& x0, double t_end,
                                       double dt_out, const TransportOptions& options = {});

}  // namespace dsstab
