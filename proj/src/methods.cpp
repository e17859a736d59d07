#include "peplin/methods.hpp"

#include <cmath>

namespace peplin {

std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::ObjectiveGapLast: return "gap_last";
    case Criterion::ObjectiveGapAverage: return "gap_avg";
    case Criterion::ObjectiveGapBest: return "gap_best";
    case Criterion::DistanceLast: return "dist_last";
    case Criterion::GradNormLast: return "gradnorm_last";
  }
  return "unknown";
}

bool RegisteredOperator::single_list() const {
  return std::holds_alternative<OperatorSymmetric>(spec) ||
         std::holds_alternative<OperatorSkewSymmetric>(spec);
}

int Trajectory::add_function(std::string name, FunctionClassSpec spec) {
  functions.push_back({std::move(name), spec, {}});
  return static_cast<int>(functions.size()) - 1;
}

int Trajectory::add_operator(std::string name, OperatorClassSpec spec, SpaceId in, SpaceId out) {
  RegisteredOperator op;
  op.name = std::move(name);
  op.spec = spec;
  op.in_space = in;
  op.out_space = out;
  if (op.single_list() && in != out) {
    throw std::invalid_argument("add_operator: symmetric/skew operators map a space to itself");
  }
  if (std::holds_alternative<OperatorUnbounded>(spec)) {
    op.l_squared = ws.declare_aux(op.name + ".L2");
  }
  operators.push_back(std::move(op));
  return static_cast<int>(operators.size()) - 1;
}

const FunctionPoint& Trajectory::eval_function(int func, const SymbolicVector& x,
                                               const std::string& tag) {
  RegisteredFunction& f = functions.at(func);
  SymbolicVector g = ws.declare_vector(x.space(), f.name + ".g." + tag);
  return register_function_point(func, x, g, tag);
}

const FunctionPoint& Trajectory::register_function_point(int func, const SymbolicVector& x,
                                                         const SymbolicVector& g,
                                                         const std::string& tag) {
  RegisteredFunction& f = functions.at(func);
  FvalId v = ws.declare_fval(f.name + "." + tag);
  f.points.push_back({x, g, v});
  return f.points.back();
}

namespace {

// Classes whose only member is a fixed multiple of the identity (or zero)
// are substituted symbolically; a pinched-spectrum LMI has no interior and
// derails interior-point solvers.
std::optional<double> pinched_scalar(const OperatorClassSpec& spec) {
  if (const auto* sym = std::get_if<OperatorSymmetric>(&spec)) {
    if (sym->mu == sym->L) return sym->mu;
  }
  if (const auto* gen = std::get_if<OperatorGeneralBounded>(&spec)) {
    if (gen->L == 0.0) return 0.0;
  }
  if (const auto* skew = std::get_if<OperatorSkewSymmetric>(&spec)) {
    if (skew->L == 0.0) return 0.0;
  }
  return std::nullopt;
}

}  // namespace

SymbolicVector Trajectory::apply_forward(int op, const SymbolicVector& x, const std::string& tag) {
  RegisteredOperator& o = operators.at(op);
  if (x.space() != o.in_space) {
    throw std::invalid_argument("apply_forward: input lives in the wrong space");
  }
  if (auto scalar = pinched_scalar(o.spec)) {
    if (*scalar == 0.0) return SymbolicVector::zero(o.out_space);
    return *scalar * x;
  }
  SymbolicVector y = ws.declare_vector(o.out_space, o.name + "." + tag);
  o.forward.push_back({x, y});
  return y;
}

SymbolicVector Trajectory::apply_adjoint(int op, const SymbolicVector& u, const std::string& tag) {
  RegisteredOperator& o = operators.at(op);
  if (u.space() != o.out_space) {
    throw std::invalid_argument("apply_adjoint: input lives in the wrong space");
  }
  if (auto scalar = pinched_scalar(o.spec)) {
    if (*scalar == 0.0) return SymbolicVector::zero(o.in_space);
    return *scalar * u;  // symmetric: M' = M = scalar I
  }
  SymbolicVector v = ws.declare_vector(o.in_space, o.name + "." + tag);
  if (std::holds_alternative<OperatorSymmetric>(o.spec)) {
    // M' = M: record as a forward application.
    o.forward.push_back({u, v});
  } else if (std::holds_alternative<OperatorSkewSymmetric>(o.spec)) {
    // M' = -M: v = M'u means M u = -v.
    o.forward.push_back({u, -v});
  } else {
    o.adjoint.push_back({u, v});
  }
  return v;
}

void Trajectory::register_adjoint_zero(int op, const SymbolicVector& u) {
  RegisteredOperator& o = operators.at(op);
  if (u.space() != o.out_space) {
    throw std::invalid_argument("register_adjoint_zero: input lives in the wrong space");
  }
  if (auto scalar = pinched_scalar(o.spec)) {
    // M = scalar I, so M'u = 0 forces u = 0 unless the scalar vanishes.
    if (*scalar != 0.0) side_constraints.push_back(squared_norm(u));
    return;
  }
  SymbolicVector zero = SymbolicVector::zero(o.in_space);
  if (o.single_list()) {
    o.forward.push_back({u, zero});
  } else {
    o.adjoint.push_back({u, zero});
  }
}

namespace {

ScalarExpr fval_diff(const RegisteredFunction& f, int point, int star_point) {
  return ScalarExpr::fval(f.points.at(point).f) - ScalarExpr::fval(f.points.at(star_point).f);
}

}  // namespace

ScalarExpr Trajectory::objective_gap(int i) {
  if (i < 0 || i >= static_cast<int>(iterates.size())) {
    throw std::invalid_argument("objective_gap: iterate index out of range");
  }
  if (auto* m = std::get_if<GmPlainMeta>(&meta)) {
    return fval_diff(functions[m->f], m->point_at.at(i), m->star_point);
  }
  if (auto* m = std::get_if<GmComposedMeta>(&meta)) {
    return fval_diff(functions[m->g], m->gpoint_at.at(i), m->star_gpoint);
  }
  auto& m = std::get<CpMeta>(meta);
  if (i == 0) {
    throw std::invalid_argument("objective_gap: x_0 carries no prox registration");
  }
  if (auto it = m.gap_at.find(i); it != m.gap_at.end()) return it->second;
  if (m.gpoint_at.find(i) == m.gpoint_at.end()) {
    SymbolicVector y = apply_forward(m.op, iterates[i], "y.crit" + std::to_string(i));
    eval_function(m.g, y, "crit" + std::to_string(i));
    m.gpoint_at[i] = static_cast<int>(functions[m.g].points.size()) - 1;
  }
  ScalarExpr gap = fval_diff(functions[m.f], m.fpoint_at.at(i), m.star_fpoint);
  gap += fval_diff(functions[m.g], m.gpoint_at.at(i), m.star_gpoint);
  m.gap_at[i] = gap;
  return gap;
}

ScalarExpr Trajectory::objective_gap_average() {
  if (avg_gap_) return *avg_gap_;
  const int N = num_steps();
  if (N < 1) throw std::invalid_argument("objective_gap_average: no iterates");
  SymbolicVector xbar = SymbolicVector::zero(iterates[0].space());
  for (int i = 1; i <= N; ++i) xbar += iterates[i];
  xbar *= 1.0 / N;

  if (auto* m = std::get_if<GmPlainMeta>(&meta)) {
    eval_function(m->f, xbar, "avg");
    int p = static_cast<int>(functions[m->f].points.size()) - 1;
    avg_gap_ = fval_diff(functions[m->f], p, m->star_point);
  } else if (auto* m = std::get_if<GmComposedMeta>(&meta)) {
    SymbolicVector ybar = apply_forward(m->op, xbar, "y.avg");
    eval_function(m->g, ybar, "avg");
    int p = static_cast<int>(functions[m->g].points.size()) - 1;
    avg_gap_ = fval_diff(functions[m->g], p, m->star_gpoint);
  } else {
    auto& cp = std::get<CpMeta>(meta);
    eval_function(cp.f, xbar, "avg");
    int pf = static_cast<int>(functions[cp.f].points.size()) - 1;
    SymbolicVector ybar = apply_forward(cp.op, xbar, "y.avg");
    eval_function(cp.g, ybar, "avg");
    int pg = static_cast<int>(functions[cp.g].points.size()) - 1;
    ScalarExpr gap = fval_diff(functions[cp.f], pf, cp.star_fpoint);
    gap += fval_diff(functions[cp.g], pg, cp.star_gpoint);
    avg_gap_ = gap;
  }
  return *avg_gap_;
}

std::vector<ScalarExpr> Trajectory::gaps_1_to_N() {
  std::vector<ScalarExpr> gaps;
  for (int i = 1; i <= num_steps(); ++i) gaps.push_back(objective_gap(i));
  return gaps;
}

ScalarExpr Trajectory::gradient_sqnorm_last() {
  const int N = num_steps();
  if (auto* m = std::get_if<GmPlainMeta>(&meta)) {
    return squared_norm(functions[m->f].points.at(m->point_at.at(N)).g);
  }
  if (auto* m = std::get_if<GmComposedMeta>(&meta)) {
    const SymbolicVector& uN = functions[m->g].points.at(m->gpoint_at.at(N)).g;
    SymbolicVector vN = apply_adjoint(m->op, uN, "v." + std::to_string(N));
    return squared_norm(vN);
  }
  throw std::invalid_argument("gradient_sqnorm_last: not defined for Chambolle-Pock");
}

namespace {

void validate_gm_spec(const GmObjective& objective) {
  if (const auto* plain = std::get_if<PlainObjective>(&objective)) {
    if (std::holds_alternative<Convex>(plain->fclass) ||
        std::holds_alternative<ConvexBoundedSubgradient>(plain->fclass)) {
      throw std::invalid_argument("build_gradient_method: objective class must be smooth");
    }
  } else {
    const auto& comp = std::get<ComposedObjective>(objective);
    if (!std::holds_alternative<OperatorGeneralBounded>(comp.mclass) &&
        !std::holds_alternative<OperatorSymmetric>(comp.mclass)) {
      throw std::invalid_argument(
          "build_gradient_method: composed objective needs a bounded general or symmetric "
          "operator");
    }
  }
}

}  // namespace

Trajectory build_gradient_method(const GmObjective& objective, double step, int N, double R) {
  if (step <= 0.0) throw std::invalid_argument("build_gradient_method: step must be positive");
  if (N < 1) throw std::invalid_argument("build_gradient_method: N must be >= 1");
  if (R <= 0.0) throw std::invalid_argument("build_gradient_method: R must be positive");
  validate_gm_spec(objective);

  Trajectory traj;
  traj.method = GradientMethod{step, N};
  SpaceId primal = traj.ws.add_space("primal");
  SymbolicVector x0 = traj.ws.declare_vector(primal, "x0");
  traj.x_star = traj.ws.declare_vector(primal, "x*");
  traj.initial_conditions.push_back(squared_norm(x0 - traj.x_star) - R * R);
  traj.iterates.push_back(x0);

  if (const auto* plain = std::get_if<PlainObjective>(&objective)) {
    Trajectory::GmPlainMeta meta;
    meta.f = traj.add_function("f", plain->fclass);
    SymbolicVector x = x0;
    for (int i = 0; i < N; ++i) {
      const FunctionPoint& p = traj.eval_function(meta.f, x, std::to_string(i));
      meta.point_at.push_back(static_cast<int>(traj.functions[meta.f].points.size()) - 1);
      x = x - step * p.g;
      traj.iterates.push_back(x);
    }
    traj.eval_function(meta.f, x, std::to_string(N));
    meta.point_at.push_back(static_cast<int>(traj.functions[meta.f].points.size()) - 1);
    traj.register_function_point(meta.f, traj.x_star, SymbolicVector::zero(primal), "*");
    meta.star_point = static_cast<int>(traj.functions[meta.f].points.size()) - 1;
    traj.meta = std::move(meta);
    return traj;
  }

  const auto& comp = std::get<ComposedObjective>(objective);
  const bool symmetric = std::holds_alternative<OperatorSymmetric>(comp.mclass);
  SpaceId image = symmetric ? primal : traj.ws.add_space("image");

  Trajectory::GmComposedMeta meta;
  meta.g = traj.add_function("g", comp.gclass);
  meta.op = traj.add_operator("M", comp.mclass, primal, image);

  // grad F(x) = M' grad g(M x); each evaluation is the chain
  // y = M x, u = grad g(y), v = M' u.
  SymbolicVector x = x0;
  for (int i = 0; i <= N; ++i) {
    SymbolicVector y = traj.apply_forward(meta.op, x, "y." + std::to_string(i));
    const FunctionPoint& p = traj.eval_function(meta.g, y, std::to_string(i));
    meta.gpoint_at.push_back(static_cast<int>(traj.functions[meta.g].points.size()) - 1);
    if (i < N) {
      SymbolicVector v = traj.apply_adjoint(meta.op, p.g, "v." + std::to_string(i));
      x = x - step * v;
      traj.iterates.push_back(x);
    }
  }
  SymbolicVector y_star = traj.apply_forward(meta.op, traj.x_star, "y.*");
  const FunctionPoint& p_star = traj.eval_function(meta.g, y_star, "*");
  meta.star_gpoint = static_cast<int>(traj.functions[meta.g].points.size()) - 1;
  traj.register_adjoint_zero(meta.op, p_star.g);
  traj.meta = std::move(meta);
  return traj;
}

Trajectory build_chambolle_pock(const FunctionClassSpec& fclass, const FunctionClassSpec& gclass,
                                const OperatorGeneralBounded& mclass, double tau, double sigma,
                                int N, double R_x, double R_u) {
  if (tau <= 0.0 || sigma <= 0.0) {
    throw std::invalid_argument("build_chambolle_pock: step parameters must be positive");
  }
  if (N < 1) throw std::invalid_argument("build_chambolle_pock: N must be >= 1");
  auto is_convex_kind = [](const FunctionClassSpec& c) {
    return std::holds_alternative<Convex>(c) ||
           std::holds_alternative<ConvexBoundedSubgradient>(c);
  };
  if (!is_convex_kind(fclass) || !is_convex_kind(gclass)) {
    throw std::invalid_argument(
        "build_chambolle_pock: f and g must be convex (optionally with bounded subgradients)");
  }

  Trajectory traj;
  traj.method = ChambollePock{tau, sigma, N};
  SpaceId primal = traj.ws.add_space("primal");
  SpaceId dual = traj.ws.add_space("dual");

  Trajectory::CpMeta meta;
  meta.f = traj.add_function("f", fclass);
  meta.g = traj.add_function("g", gclass);
  meta.op = traj.add_operator("M", mclass, primal, dual);

  SymbolicVector x0 = traj.ws.declare_vector(primal, "x0");
  traj.x_star = traj.ws.declare_vector(primal, "x*");
  SymbolicVector u0 = traj.ws.declare_vector(dual, "u0");
  traj.u_star = traj.ws.declare_vector(dual, "u*");

  // Saddle point: u* in dg(M x*) and -M'u* in df(x*).
  SymbolicVector y_star = traj.apply_forward(meta.op, traj.x_star, "y.*");
  traj.register_function_point(meta.g, y_star, *traj.u_star, "*");
  meta.star_gpoint = static_cast<int>(traj.functions[meta.g].points.size()) - 1;
  SymbolicVector v_star = traj.apply_adjoint(meta.op, *traj.u_star, "v.*");
  traj.register_function_point(meta.f, traj.x_star, -v_star, "*");
  meta.star_fpoint = static_cast<int>(traj.functions[meta.f].points.size()) - 1;

  traj.initial_conditions.push_back(squared_norm(x0 - traj.x_star) - R_x * R_x);
  traj.initial_conditions.push_back(squared_norm(u0 - *traj.u_star) - R_u * R_u);

  traj.iterates.push_back(x0);
  traj.dual_iterates.push_back(u0);
  meta.fpoint_at.push_back(-1);  // x_0 is not a prox output

  SymbolicVector x = x0;
  SymbolicVector u = u0;
  for (int i = 0; i < N; ++i) {
    const std::string k = std::to_string(i + 1);

    // x_{i+1} = prox_{tau f}(x_i - tau M'u_i):
    // s_{i+1} in df(x_{i+1}) and x_{i+1} = x_i - tau M'u_i - tau s_{i+1}.
    SymbolicVector v = traj.apply_adjoint(meta.op, u, "v." + std::to_string(i));
    SymbolicVector s = traj.ws.declare_vector(primal, "s" + k);
    SymbolicVector x_next = x - tau * v - tau * s;
    traj.register_function_point(meta.f, x_next, s, k);
    meta.fpoint_at.push_back(static_cast<int>(traj.functions[meta.f].points.size()) - 1);

    // u_{i+1} = prox_{sigma g*}(u_i + sigma M(2x_{i+1} - x_i)). By the Moreau
    // identity the output is itself a subgradient of g at
    // q_{i+1} = (w - u_{i+1}) / sigma with w the prox argument.
    SymbolicVector z = traj.apply_forward(meta.op, 2.0 * x_next - x, "z." + std::to_string(i));
    SymbolicVector w = u + sigma * z;
    SymbolicVector u_next = traj.ws.declare_vector(dual, "u" + k);
    SymbolicVector q = (w - u_next) / sigma;
    traj.register_function_point(meta.g, q, u_next, k);

    x = x_next;
    u = u_next;
    traj.iterates.push_back(x);
    traj.dual_iterates.push_back(u);
  }
  traj.meta = std::move(meta);
  return traj;
}

ScalarExpr attach_criterion(Trajectory& traj, Criterion crit) {
  switch (crit) {
    case Criterion::ObjectiveGapLast:
      return traj.objective_gap(traj.num_steps());
    case Criterion::ObjectiveGapAverage:
      return traj.objective_gap_average();
    case Criterion::ObjectiveGapBest:
      throw std::invalid_argument(
          "attach_criterion: the best-iterate criterion is solved as separate problems; use the "
          "runner");
    case Criterion::DistanceLast:
      return squared_norm(traj.iterates.back() - traj.x_star);
    case Criterion::GradNormLast:
      return traj.gradient_sqnorm_last();
  }
  throw std::invalid_argument("attach_criterion: unknown criterion");
}

}  // namespace peplin
