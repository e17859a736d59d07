#include "peplin/sdp.hpp"

#include <cmath>

namespace peplin {

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Inaccurate: return "inaccurate";
  }
  return "unknown";
}

int PepProblem::gram_var(int basis_a, int basis_b) const {
  const auto [blk_a, i] = basis_loc.at(basis_a);
  const auto [blk_b, j] = basis_loc.at(basis_b);
  if (blk_a != blk_b) {
    throw std::invalid_argument("PepProblem: Gram entry references two different spaces");
  }
  const SpaceBlock& blk = blocks[blk_a];
  return blk.var_offset + conic::svec_index(std::min(i, j), std::max(i, j));
}

double SolveResult::eval(const PepProblem& prob, const ScalarExpr& e) const {
  double out = e.constant_term();
  for (const auto& [key, c] : e.gram_terms()) {
    const auto [blk, i] = prob.basis_loc.at(key.a);
    const auto [blk2, j] = prob.basis_loc.at(key.b);
    if (blk != blk2) throw std::invalid_argument("SolveResult: cross-space Gram entry");
    out += c * gram_blocks.at(blk)(i, j);
  }
  for (const auto& [id, c] : e.fval_terms()) out += c * fvals[id];
  for (const auto& [id, c] : e.aux_terms()) out += c * aux[id];
  return out;
}

PepProblem assemble(const Trajectory& traj, const ScalarExpr& objective,
                    std::span<const ScalarExpr> extra_inequalities) {
  PepProblem prob;

  // Variable layout: triangle-packed Gram per non-empty space.
  prob.basis_loc.assign(traj.ws.num_basis(), {-1, -1});
  int offset = 0;
  for (int s = 0; s < traj.ws.num_spaces(); ++s) {
    SpaceId space{s};
    int dim = traj.ws.space_dim(space);
    if (dim == 0) continue;
    PepProblem::SpaceBlock blk;
    blk.space = space;
    blk.name = traj.ws.space_name(space);
    blk.dim = dim;
    blk.var_offset = offset;
    offset += dim * (dim + 1) / 2;
    prob.blocks.push_back(std::move(blk));
  }
  for (int id = 0; id < traj.ws.num_basis(); ++id) {
    const BasisVector& b = traj.ws.basis(id);
    for (int k = 0; k < static_cast<int>(prob.blocks.size()); ++k) {
      if (prob.blocks[k].space == b.space) {
        prob.basis_loc[id] = {k, b.index};
        break;
      }
    }
  }
  prob.num_fvals = traj.ws.num_fvals();
  prob.num_aux = traj.ws.num_aux();
  prob.fval_offset = offset;
  prob.aux_offset = offset + prob.num_fvals;
  prob.num_vars = prob.aux_offset + prob.num_aux;

  // Class constraints.
  for (const RegisteredFunction& f : traj.functions) {
    ClassConstraintSet set = function_class_conditions(f.spec, f.points);
    prob.equalities.insert(prob.equalities.end(), set.equalities.begin(), set.equalities.end());
    prob.inequalities.insert(prob.inequalities.end(), set.inequalities.begin(),
                             set.inequalities.end());
    prob.lmis.insert(prob.lmis.end(), set.lmis.begin(), set.lmis.end());
  }
  for (const RegisteredOperator& op : traj.operators) {
    ClassConstraintSet set =
        operator_class_conditions(op.spec, op.l_squared, op.forward, op.adjoint);
    prob.equalities.insert(prob.equalities.end(), set.equalities.begin(), set.equalities.end());
    prob.inequalities.insert(prob.inequalities.end(), set.inequalities.begin(),
                             set.inequalities.end());
    prob.lmis.insert(prob.lmis.end(), set.lmis.begin(), set.lmis.end());
  }

  prob.inequalities.insert(prob.inequalities.end(), traj.initial_conditions.begin(),
                           traj.initial_conditions.end());
  prob.inequalities.insert(prob.inequalities.end(), traj.side_constraints.begin(),
                           traj.side_constraints.end());
  prob.inequalities.insert(prob.inequalities.end(), extra_inequalities.begin(),
                           extra_inequalities.end());
  prob.objective = objective;
  return prob;
}

namespace {

constexpr double kUnboundedValue = 1e9;

void expr_into_row(const PepProblem& prob, const ScalarExpr& e, int row, double scale,
                   conic::Problem& cp) {
  for (const auto& [key, c] : e.gram_terms()) {
    cp.set_entry(row, prob.gram_var(key.a, key.b), scale * c);
  }
  for (const auto& [id, c] : e.fval_terms()) cp.set_entry(row, prob.fval_var(id), scale * c);
  for (const auto& [id, c] : e.aux_terms()) cp.set_entry(row, prob.aux_var(id), scale * c);
}

}  // namespace

SolveResult solve(const PepProblem& prob, const conic::Backend& backend,
                  const conic::Settings& settings) {
  const double rt2 = std::sqrt(2.0);
  conic::Problem cp;
  cp.num_vars = prob.num_vars;
  cp.q.assign(prob.num_vars, 0.0);

  // Objective: maximize <=> minimize the negation.
  for (const auto& [key, c] : prob.objective.gram_terms()) {
    cp.q[prob.gram_var(key.a, key.b)] -= c;
  }
  for (const auto& [id, c] : prob.objective.fval_terms()) cp.q[prob.fval_var(id)] -= c;
  for (const auto& [id, c] : prob.objective.aux_terms()) cp.q[prob.aux_var(id)] -= c;

  // Zero cone: equalities, written as b - A x = -expr.
  for (const ScalarExpr& e : prob.equalities) {
    int row = cp.add_row(-e.constant_term());
    expr_into_row(prob, e, row, 1.0, cp);
  }
  if (!prob.equalities.empty()) {
    cp.cones.push_back({conic::ConeKind::Zero, static_cast<int>(prob.equalities.size())});
  }

  // Nonnegative cone: inequalities expr <= 0, then aux >= 0.
  for (const ScalarExpr& e : prob.inequalities) {
    int row = cp.add_row(-e.constant_term());
    expr_into_row(prob, e, row, 1.0, cp);
  }
  for (int a = 0; a < prob.num_aux; ++a) {
    int row = cp.add_row(0.0);
    cp.set_entry(row, prob.aux_var(a), -1.0);
  }
  const int n_nonneg = static_cast<int>(prob.inequalities.size()) + prob.num_aux;
  if (n_nonneg > 0) cp.cones.push_back({conic::ConeKind::NonNegative, n_nonneg});

  // PSD cones: the Gram block of every space, s = svec(G).
  std::vector<int> gram_row_start;
  for (const PepProblem::SpaceBlock& blk : prob.blocks) {
    gram_row_start.push_back(cp.rows());
    for (int j = 0; j < blk.dim; ++j) {
      for (int i = 0; i <= j; ++i) {
        int row = cp.add_row(0.0);
        double scale = i == j ? 1.0 : rt2;
        cp.set_entry(row, blk.var_offset + conic::svec_index(i, j), -scale);
      }
    }
    cp.cones.push_back({conic::ConeKind::PsdTriangle, blk.dim});
  }

  // PSD cones: LMI blocks, s = svec(matrix expression).
  std::vector<int> lmi_row_start;
  for (const LmiConstraint& lmi : prob.lmis) {
    lmi_row_start.push_back(cp.rows());
    for (int j = 0; j < lmi.side; ++j) {
      for (int i = 0; i <= j; ++i) {
        double scale = i == j ? 1.0 : rt2;
        const ScalarExpr& e = lmi.at(i, j);
        int row = cp.add_row(scale * e.constant_term());
        expr_into_row(prob, e, row, -scale, cp);
      }
    }
    cp.cones.push_back({conic::ConeKind::PsdTriangle, lmi.side});
  }

  conic::Solution sol = backend.solve(cp, settings);

  // PEPs whose value grows quadratically along a feasible path are unbounded
  // without an improving ray, so solvers cannot certify them and stall with
  // a diverging objective. A stall at a suspiciously large value triggers a
  // re-solve with a guard row (objective <= 1e9, its own trailing cone so
  // the dual layout of the main rows is unchanged); saturating the guard or
  // producing a certificate there means Unbounded.
  constexpr double kSuspectValue = 1e3;
  if (sol.status == conic::SolveStatus::Inaccurate &&
      std::abs(-sol.objective + prob.objective.constant_term()) > kSuspectValue) {
    int row = cp.add_row(kUnboundedValue - prob.objective.constant_term());
    expr_into_row(prob, prob.objective, row, 1.0, cp);
    cp.cones.push_back({conic::ConeKind::NonNegative, 1});
    sol = backend.solve(cp, settings);
    double guarded_value = -sol.objective + prob.objective.constant_term();
    if (sol.status != conic::SolveStatus::Infeasible && guarded_value > 0.5 * kUnboundedValue) {
      sol.status = conic::SolveStatus::Unbounded;
      sol.message = "objective reached the unboundedness guard";
    }
  }

  SolveResult res;
  res.iterations = sol.iterations;
  res.message = sol.message;
  switch (sol.status) {
    case conic::SolveStatus::Optimal: res.status = SolveStatus::Optimal; break;
    case conic::SolveStatus::Unbounded: res.status = SolveStatus::Unbounded; break;
    case conic::SolveStatus::Infeasible: res.status = SolveStatus::Infeasible; break;
    case conic::SolveStatus::Inaccurate: res.status = SolveStatus::Inaccurate; break;
  }
  if (res.status == SolveStatus::Infeasible || res.status == SolveStatus::Unbounded) {
    return res;
  }

  // Extract solution values.
  res.fvals.resize(prob.num_fvals);
  for (int i = 0; i < prob.num_fvals; ++i) res.fvals[i] = sol.x[prob.fval_offset + i];
  res.aux.resize(prob.num_aux);
  for (int i = 0; i < prob.num_aux; ++i) res.aux[i] = sol.x[prob.aux_offset + i];
  for (const PepProblem::SpaceBlock& blk : prob.blocks) {
    Matrix G(blk.dim, blk.dim);
    for (int j = 0; j < blk.dim; ++j) {
      for (int i = 0; i <= j; ++i) {
        double v = sol.x[blk.var_offset + conic::svec_index(i, j)];
        G(i, j) = v;
        G(j, i) = v;
      }
    }
    res.gram_blocks.push_back(std::move(G));
  }
  res.value = res.eval(prob, prob.objective);

  // Duals, cone by cone in emission order (the guard row is dropped).
  int row = 0;
  const int m_eq = static_cast<int>(prob.equalities.size());
  res.eq_duals = sol.z.segment(row, m_eq);
  row += m_eq;
  res.ineq_duals = sol.z.segment(row, n_nonneg - prob.num_aux);
  row += n_nonneg;
  for (const PepProblem::SpaceBlock& blk : prob.blocks) {
    int len = blk.dim * (blk.dim + 1) / 2;
    res.gram_duals.push_back(conic::svec_unpack(sol.z.segment(row, len), blk.dim));
    row += len;
  }
  for (const LmiConstraint& lmi : prob.lmis) {
    int len = lmi.side * (lmi.side + 1) / 2;
    res.lmi_duals.push_back(conic::svec_unpack(sol.z.segment(row, len), lmi.side));
    row += len;
  }

  if (res.value > kUnboundedValue) {
    res.status = SolveStatus::Unbounded;
    res.message = "objective exceeded the unboundedness threshold";
  }
  return res;
}

DualMultipliers dual_multipliers(const SolveResult& result) {
  if (!result.optimal()) {
    throw std::runtime_error("dual_multipliers: no dual certificate (status " +
                             status_name(result.status) + ")");
  }
  DualMultipliers out;
  out.equalities = result.eq_duals;
  out.inequalities = result.ineq_duals;
  out.lmis = result.lmi_duals;
  out.grams = result.gram_duals;
  return out;
}

}  // namespace peplin
