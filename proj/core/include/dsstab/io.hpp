#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "dsstab/modal.hpp"
#include "dsstab/trajectory.hpp"

namespace dsstab {

/// Malformed or inconsistent data file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double.
std::string format_double(double v);

// GridFunction: header `zeta,value`, one row per node.
void write_grid_csv(std::ostream& out, const GridFunction& f);
GridFunction read_grid_csv(std::istream& in);

// ModalVector: header `j,c_j`, one row per mode.
void write_modal_csv(std::ostream& out, const ModalVector& v);
ModalVector read_modal_csv(std::istream& in);

/// Trajectory: `t,norm_X,c_1..c_N` for modal states, `t,norm_X` for grid
/// states, followed by `u_0..u_{n-1}` when `with_states` is set.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, bool with_states);
Trajectory read_trajectory_csv(std::istream& in, std::string model_id, double gain);

}  // namespace dsstab
