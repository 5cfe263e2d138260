#include "dsstab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace dsstab {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
  return v;
}

std::vector<std::string> read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty file");
  return split(line);
}

void expect_header(const std::vector<std::string>& header, const std::vector<std::string>& expected) {
  if (header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw FormatError("unexpected header, want '" + want + "'");
  }
}

std::vector<std::vector<double>> read_rows(std::istream& in, std::size_t columns) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != columns) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
    }
    std::vector<double> row;
    row.reserve(columns);
    for (const auto& c : cells) row.push_back(parse_double(c, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == v) break;
  }
  return buf;
}

void write_grid_csv(std::ostream& out, const GridFunction& f) {
  out << "zeta,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) out << format_double(f.node(i)) << ',' << format_double(f[i]) << '\n';
}

GridFunction read_grid_csv(std::istream& in) {
  expect_header(read_header(in), {"zeta", "value"});
  const auto rows = read_rows(in, 2);
  if (rows.size() < 2) throw FormatError("grid function needs at least 2 rows");
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expected = GridFunction::node(rows.size(), i);
    if (std::abs(rows[i][0] - expected) > 1e-9) {
      throw FormatError("row " + std::to_string(i) + ": zeta is not on the uniform grid of [0,1]");
    }
    v[static_cast<Eigen::Index>(i)] = rows[i][1];
  }
  return GridFunction(std::move(v));
}

void write_modal_csv(std::ostream& out, const ModalVector& v) {
  out << "j,c_j\n";
  for (std::size_t j = 1; j <= v.order(); ++j) out << j << ',' << format_double(v.coefficient(j)) << '\n';
}

ModalVector read_modal_csv(std::istream& in) {
  expect_header(read_header(in), {"j", "c_j"});
  const auto rows = read_rows(in, 2);
  if (rows.empty()) throw FormatError("modal vector has no rows");
  Eigen::VectorXd c(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i][0] != static_cast<double>(i + 1)) throw FormatError("mode indices must run 1..N in order");
    c[static_cast<Eigen::Index>(i)] = rows[i][1];
  }
  return ModalVector(std::move(c));
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, bool with_states) {
  const bool modal = traj.kind() == StateKind::modal;
  const bool states = traj.has_states() && (modal || with_states);
  const std::size_t dim = states ? static_cast<std::size_t>(traj.states().front().size()) : 0;
  out << "t,norm_X";
  for (std::size_t k = 0; k < dim; ++k) {
    out << (modal ? ",c_" + std::to_string(k + 1) : ",u_" + std::to_string(k));
  }
  out << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(traj.times()[i]) << ',' << format_double(traj.norms()[i]);
    if (states) {
      const auto& s = traj.states()[i];
      for (Eigen::Index k = 0; k < s.size(); ++k) out << ',' << format_double(s[k]);
    }
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in, std::string model_id, double gain) {
  const auto header = read_header(in);
  if (header.size() < 2 || header[0] != "t" || header[1] != "norm_X") {
    throw FormatError("trajectory header must start with 't,norm_X'");
  }
  StateKind kind = StateKind::grid;
  if (header.size() > 2) {
    const bool modal = header[2] == "c_1";
    kind = modal ? StateKind::modal : StateKind::grid;
    for (std::size_t k = 2; k < header.size(); ++k) {
      const std::string want = modal ? "c_" + std::to_string(k - 1) : "u_" + std::to_string(k - 2);
      if (header[k] != want) throw FormatError("unexpected state column '" + header[k] + "'");
    }
  }
  const auto rows = read_rows(in, header.size());
  if (rows.empty()) throw FormatError("trajectory has no samples");
  Trajectory traj(std::move(model_id), gain, kind);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (header.size() > 2) {
      Eigen::VectorXd s(static_cast<Eigen::Index>(r.size() - 2));
      for (std::size_t k = 2; k < r.size(); ++k) s[static_cast<Eigen::Index>(k - 2)] = r[k];
      traj.append(r[0], std::move(s));
      if (traj.norms().back() != r[1]) {
        throw FormatError("row " + std::to_string(i) + ": norm_X does not match the stored state");
      }
    } else {
      traj.append_norm(r[0], r[1]);
    }
  }
  return traj;
}

}  // namespace dsstab
