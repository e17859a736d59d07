#pragma once

// Backend-neutral conic problem description:
//
//   minimize    q'x
//   subject to  b - A x in K
//
// with K a product of zero, nonnegative and PSD cones laid out in row order.
// PSD slacks are triangle-packed (upper triangle, column-major) with
// off-diagonal entries scaled by sqrt(2), matching the usual svec convention.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace peplin::conic {

enum class ConeKind { Zero, NonNegative, PsdTriangle };

struct Cone {
  ConeKind kind;
  int dim;  // rows for Zero/NonNegative, matrix side for PsdTriangle
  int rows() const { return kind == ConeKind::PsdTriangle ? dim * (dim + 1) / 2 : dim; }
};

struct Problem {
  int num_vars = 0;
  std::vector<Eigen::Triplet<double>> a_entries;
  std::vector<double> b;
  std::vector<double> q;
  std::vector<Cone> cones;

  int rows() const { return static_cast<int>(b.size()); }

  // Appends one row; returns its index. Cone bookkeeping is the caller's.
  int add_row(double rhs) {
    b.push_back(rhs);
    return rows() - 1;
  }
  void set_entry(int row, int col, double v) {
    if (v != 0.0) a_entries.emplace_back(row, col, v);
  }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Inaccurate };

struct Solution {
  SolveStatus status = SolveStatus::Inaccurate;
  double objective = 0.0;  // q'x
  Eigen::VectorXd x;       // primal variables
  Eigen::VectorXd z;       // dual variables, one per row
  Eigen::VectorXd s;       // slack b - A x
  int iterations = 0;
  std::string message;
};

struct Settings {
  double tol = 1e-8;
  int max_iter = 500;
  bool verbose = false;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Solution solve(const Problem& problem, const Settings& settings) const = 0;
  virtual std::string name() const = 0;
};

// Process-wide Clarabel backend adapter; reentrant.
const Backend& clarabel_backend();

// svec index of entry (i, j), i <= j, in a triangle-packed side x side block.
inline int svec_index(int i, int j) { return j * (j + 1) / 2 + i; }

// Unpack a triangle-packed vector into a symmetric matrix (svec scaling
// removed).
Eigen::MatrixXd svec_unpack(const Eigen::VectorXd& v, int side);

}  // namespace peplin::conic
