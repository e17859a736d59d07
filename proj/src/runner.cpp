#include "peplin/runner.hpp"

#include <cmath>

namespace peplin {

namespace {

double operator_bound(const OperatorClassSpec& spec) {
  if (const auto* gen = std::get_if<OperatorGeneralBounded>(&spec)) return gen->L;
  if (const auto* sym = std::get_if<OperatorSymmetric>(&spec)) return sym->L;
  throw std::invalid_argument("smoothness_constant: unsupported operator class");
}

// Class parameters divided by their smoothness/norm scale.
GmObjective normalized_objective(const GmObjective& objective) {
  if (const auto* plain = std::get_if<PlainObjective>(&objective)) {
    if (const auto* s = std::get_if<SmoothStronglyConvex>(&plain->fclass)) {
      return PlainObjective{SmoothStronglyConvex{s->mu / s->L, 1.0}};
    }
    const auto& q = std::get<Quadratic>(plain->fclass);
    return PlainObjective{Quadratic{q.mu / q.L, 1.0}};
  }
  const auto& comp = std::get<ComposedObjective>(objective);
  SmoothStronglyConvex g{comp.gclass.mu / comp.gclass.L, 1.0};
  if (std::holds_alternative<OperatorGeneralBounded>(comp.mclass)) {
    return ComposedObjective{g, OperatorGeneralBounded{1.0}};
  }
  const auto& sym = std::get<OperatorSymmetric>(comp.mclass);
  return ComposedObjective{g, OperatorSymmetric{sym.mu / sym.L, 1.0}};
}

double criterion_scale(Criterion crit, double L_F, double R) {
  switch (crit) {
    case Criterion::ObjectiveGapLast:
    case Criterion::ObjectiveGapAverage:
    case Criterion::ObjectiveGapBest:
      return L_F * R * R;
    case Criterion::DistanceLast:
      return R * R;
    case Criterion::GradNormLast:
      return L_F * L_F * R * R;
  }
  return 1.0;
}

// Solves max gap_k s.t. gap_k <= gap_i for each candidate k and keeps the
// largest value; exact treatment of the best-iterate criterion.
void solve_best_iterate(Trajectory& traj, const conic::Backend& backend,
                        const conic::Settings& settings, RunResult& out) {
  std::vector<ScalarExpr> gaps = traj.gaps_1_to_N();
  out.status = SolveStatus::Inaccurate;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(gaps.size()); ++k) {
    std::vector<ScalarExpr> extra;
    for (int i = 0; i < static_cast<int>(gaps.size()); ++i) {
      if (i != k) extra.push_back(gaps[k] - gaps[i]);
    }
    PepProblem prob = assemble(traj, gaps[k], extra);
    SolveResult res = solve(prob, backend, settings);
    if (res.status == SolveStatus::Unbounded || res.status == SolveStatus::Infeasible) {
      out.status = res.status;
      out.prob = std::move(prob);
      out.result = std::move(res);
      return;
    }
    if (res.value > best) {
      best = res.value;
      out.best_index = k + 1;
      out.status = res.status;
      out.prob = std::move(prob);
      out.result = std::move(res);
    }
  }
}

void run_criterion(Trajectory& traj, Criterion crit, const conic::Backend& backend,
                   const conic::Settings& settings, RunResult& out) {
  if (crit == Criterion::ObjectiveGapBest) {
    solve_best_iterate(traj, backend, settings, out);
  } else {
    ScalarExpr objective = attach_criterion(traj, crit);
    out.prob = assemble(traj, objective);
    out.result = solve(out.prob, backend, settings);
    out.status = out.result.status;
  }
  out.traj = std::move(traj);
  if (out.status == SolveStatus::Optimal || out.status == SolveStatus::Inaccurate) {
    out.value = out.scale * out.result.value;
  }
}

}  // namespace

double smoothness_constant(const GmObjective& objective) {
  if (const auto* plain = std::get_if<PlainObjective>(&objective)) {
    if (const auto* s = std::get_if<SmoothStronglyConvex>(&plain->fclass)) {
      if (std::isinf(s->L)) {
        throw std::invalid_argument("smoothness_constant: class is not smooth");
      }
      return s->L;
    }
    if (const auto* q = std::get_if<Quadratic>(&plain->fclass)) return q->L;
    throw std::invalid_argument("smoothness_constant: class is not smooth");
  }
  const auto& comp = std::get<ComposedObjective>(objective);
  double LM = operator_bound(comp.mclass);
  return comp.gclass.L * LM * LM;
}

RunResult solve_gm(const GmProblem& problem, const conic::Backend& backend,
                   const conic::Settings& settings, bool normalize) {
  const double L_F = smoothness_constant(problem.objective);
  RunResult out;
  Trajectory traj;
  if (normalize) {
    out.scale = criterion_scale(problem.criterion, L_F, problem.R);
    traj = build_gradient_method(normalized_objective(problem.objective), problem.h, problem.N,
                                 1.0);
  } else {
    out.scale = 1.0;
    traj = build_gradient_method(problem.objective, problem.h / L_F, problem.N, problem.R);
  }
  run_criterion(traj, problem.criterion, backend, settings, out);
  return out;
}

RunResult solve_cp(const CpProblem& problem, const conic::Backend& backend,
                   const conic::Settings& settings) {
  auto convex_class = [](double S) -> FunctionClassSpec {
    if (std::isinf(S)) return Convex{};
    return ConvexBoundedSubgradient{S};
  };
  RunResult out;
  Trajectory traj = build_chambolle_pock(convex_class(problem.S_f), convex_class(problem.S_g),
                                         OperatorGeneralBounded{problem.L_M}, problem.tau,
                                         problem.sigma, problem.N, problem.R_x, problem.R_u);
  run_criterion(traj, problem.criterion, backend, settings, out);
  return out;
}

}  // namespace peplin
