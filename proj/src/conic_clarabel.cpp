#include "peplin/conic.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

extern "C" {
int32_t clarabel_ffi_solve(size_t n, size_t m, const size_t* a_colptr, const size_t* a_rowind,
                           const double* a_nzval, const double* b, const double* q, size_t n_cones,
                           const int32_t* cone_kinds, const size_t* cone_dims, double tol,
                           uint32_t max_iter, int32_t verbose, double* x_out, double* z_out,
                           double* s_out, double* obj_out, uint32_t* iters_out);
}

namespace peplin::conic {

Eigen::MatrixXd svec_unpack(const Eigen::VectorXd& v, int side) {
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd M(side, side);
  int k = 0;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i <= j; ++i, ++k) {
      double val = i == j ? v[k] : v[k] * inv_rt2;
      M(i, j) = val;
      M(j, i) = val;
    }
  }
  return M;
}

namespace {

class ClarabelBackend final : public Backend {
 public:
  std::string name() const override { return "clarabel"; }

  Solution solve(const Problem& problem, const Settings& settings) const override {
    const int n = problem.num_vars;
    const int m = problem.rows();

    int cone_rows = 0;
    for (const Cone& c : problem.cones) cone_rows += c.rows();
    if (cone_rows != m) {
      throw std::invalid_argument("conic: cone sizes do not add up to the row count");
    }

    Eigen::SparseMatrix<double> A(m, n);
    A.setFromTriplets(problem.a_entries.begin(), problem.a_entries.end());
    A.makeCompressed();

    std::vector<size_t> colptr(n + 1);
    std::vector<size_t> rowind(A.nonZeros());
    for (int j = 0; j <= n; ++j) colptr[j] = static_cast<size_t>(A.outerIndexPtr()[j]);
    for (int k = 0; k < A.nonZeros(); ++k) rowind[k] = static_cast<size_t>(A.innerIndexPtr()[k]);

    std::vector<int32_t> kinds;
    std::vector<size_t> dims;
    for (const Cone& c : problem.cones) {
      switch (c.kind) {
        case ConeKind::Zero: kinds.push_back(0); break;
        case ConeKind::NonNegative: kinds.push_back(1); break;
        case ConeKind::PsdTriangle: kinds.push_back(2); break;
      }
      dims.push_back(static_cast<size_t>(c.dim));
    }

    Solution sol;
    sol.x.resize(n);
    sol.z.resize(m);
    sol.s.resize(m);
    double obj = 0.0;
    uint32_t iters = 0;
    int32_t code = clarabel_ffi_solve(
        static_cast<size_t>(n), static_cast<size_t>(m), colptr.data(), rowind.data(),
        A.valuePtr(), problem.b.data(), problem.q.data(), kinds.size(), kinds.data(), dims.data(),
        settings.tol, static_cast<uint32_t>(settings.max_iter), settings.verbose ? 1 : 0,
        sol.x.data(), sol.z.data(), sol.s.data(), &obj, &iters);

    sol.objective = obj;
    sol.iterations = static_cast<int>(iters);
    switch (code) {
      case 0:
        sol.status = SolveStatus::Optimal;
        break;
      case 1:
        sol.status = SolveStatus::Infeasible;
        sol.message = "primal infeasible";
        break;
      case 2:
        sol.status = SolveStatus::Unbounded;
        sol.message = "dual infeasible";
        break;
      case 3:
        sol.status = SolveStatus::Inaccurate;
        sol.message = "reduced accuracy";
        break;
      case 4:
        sol.status = SolveStatus::Inaccurate;
        sol.message = "iteration limit";
        break;
      default:
        sol.status = SolveStatus::Inaccurate;
        sol.message = "solver error";
        break;
    }
    return sol;
  }
};

}  // namespace

const Backend& clarabel_backend() {
  static const ClarabelBackend backend;
  return backend;
}

}  // namespace peplin::conic
