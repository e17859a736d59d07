#pragma once

// Assembly of a trajectory plus class constraints into standard conic form
// (one PSD Gram block per space, zero/nonnegative rows for the scalar
// constraints, one PSD block per LMI) and the solve wrapper.

#include "peplin/conic.hpp"
#include "peplin/methods.hpp"

namespace peplin {

struct PepProblem {
  struct SpaceBlock {
    SpaceId space;
    std::string name;
    int dim = 0;
    int var_offset = 0;  // first variable of the triangle-packed Gram block
  };

  // Variable layout: [Gram blocks | function values | auxiliary scalars].
  std::vector<SpaceBlock> blocks;
  std::vector<std::pair<int, int>> basis_loc;  // basis id -> (block, index)
  int num_fvals = 0;
  int num_aux = 0;
  int fval_offset = 0;
  int aux_offset = 0;
  int num_vars = 0;

  std::vector<ScalarExpr> equalities;    // == 0
  std::vector<ScalarExpr> inequalities;  // <= 0
  std::vector<LmiConstraint> lmis;       // >= 0
  ScalarExpr objective;                  // maximized

  int gram_var(int basis_a, int basis_b) const;
  int fval_var(int fval_id) const { return fval_offset + fval_id; }
  int aux_var(int aux_id) const { return aux_offset + aux_id; }
};

enum class SolveStatus { Optimal, Unbounded, Infeasible, Inaccurate };

std::string status_name(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Inaccurate;
  double value = std::numeric_limits<double>::quiet_NaN();  // maximized objective
  std::vector<Matrix> gram_blocks;  // per PepProblem block
  Vector fvals;
  Vector aux;
  Vector eq_duals;
  Vector ineq_duals;                // one per PepProblem inequality
  std::vector<Matrix> gram_duals;
  std::vector<Matrix> lmi_duals;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::Optimal; }
  double eval(const PepProblem& prob, const ScalarExpr& e) const;
};

// Collects the class constraints of every registered function and operator,
// the trajectory's initial conditions and any extra inequalities, and lays
// out the conic variable space.
PepProblem assemble(const Trajectory& traj, const ScalarExpr& objective,
                    std::span<const ScalarExpr> extra_inequalities = {});

// Solves the assembled problem. Optimal values beyond 1e9 in magnitude are
// reported as Unbounded (solvers differ in certificate reporting).
SolveResult solve(const PepProblem& prob, const conic::Backend& backend,
                  const conic::Settings& settings = {});

struct DualMultipliers {
  Vector equalities;
  Vector inequalities;
  std::vector<Matrix> lmis;
  std::vector<Matrix> grams;
};

// Multipliers of an Optimal result; throws when the solve did not reach
// optimality (e.g. unbounded problems carry no dual certificate).
DualMultipliers dual_multipliers(const SolveResult& result);

}  // namespace peplin
