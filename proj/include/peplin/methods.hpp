#pragma once

// Symbolic trajectories of fixed-step first-order methods. Each step either
// declares a fresh basis vector together with its defining registration
// (gradient evaluation, prox step, operator application) or forms an affine
// combination of existing vectors.

#include "peplin/classes.hpp"

#include <variant>

namespace peplin {

struct GradientMethod {
  double step = 1.0;  // absolute step size (normalization h / L_F is the caller's)
  int N = 1;
};

struct ChambollePock {
  double tau = 1.0;
  double sigma = 1.0;
  int N = 1;
};

using MethodSpec = std::variant<GradientMethod, ChambollePock>;

enum class Criterion {
  ObjectiveGapLast,
  ObjectiveGapAverage,
  ObjectiveGapBest,
  DistanceLast,
  GradNormLast,
};

std::string criterion_name(Criterion c);

// F(x) = f(x) with f in the given class.
struct PlainObjective {
  FunctionClassSpec fclass;
};

// F(x) = g(Mx); g smooth (strongly) convex, M general bounded or symmetric.
struct ComposedObjective {
  SmoothStronglyConvex gclass;
  OperatorClassSpec mclass;
};

using GmObjective = std::variant<PlainObjective, ComposedObjective>;

struct RegisteredFunction {
  std::string name;
  FunctionClassSpec spec;
  std::vector<FunctionPoint> points;
};

struct RegisteredOperator {
  std::string name;
  OperatorClassSpec spec;
  SpaceId in_space;
  SpaceId out_space;           // equals in_space for symmetric / skew classes
  std::vector<OperatorPoint> forward;
  std::vector<OperatorPoint> adjoint;  // unused when single_list()
  std::optional<AuxId> l_squared;      // unbounded class only
  bool single_list() const;
};

class Trajectory {
 public:
  Workspace ws;
  std::vector<RegisteredFunction> functions;
  std::vector<RegisteredOperator> operators;
  std::vector<ScalarExpr> initial_conditions;  // expressions <= 0
  std::vector<ScalarExpr> side_constraints;    // expressions <= 0 (optimality etc.)
  std::vector<SymbolicVector> iterates;        // x_0 .. x_N
  SymbolicVector x_star;
  std::vector<SymbolicVector> dual_iterates;   // u_0 .. u_N (Chambolle-Pock)
  std::optional<SymbolicVector> u_star;
  MethodSpec method;

  int num_steps() const { return static_cast<int>(iterates.size()) - 1; }

  int add_function(std::string name, FunctionClassSpec spec);
  int add_operator(std::string name, OperatorClassSpec spec, SpaceId in, SpaceId out);

  // Registers a fresh gradient/subgradient and value at x.
  const FunctionPoint& eval_function(int func, const SymbolicVector& x, const std::string& tag);
  // Same with a prescribed (sub)gradient expression, e.g. a zero gradient at
  // the optimum or a dual iterate acting as subgradient.
  const FunctionPoint& register_function_point(int func, const SymbolicVector& x,
                                               const SymbolicVector& g, const std::string& tag);

  // y = M x (fresh output vector).
  SymbolicVector apply_forward(int op, const SymbolicVector& x, const std::string& tag);
  // v = M' u (fresh output vector; symmetric and skew classes fold this into
  // the single pair list).
  SymbolicVector apply_adjoint(int op, const SymbolicVector& u, const std::string& tag);
  // Registers M' u = 0 (optimality of a composed objective).
  void register_adjoint_zero(int op, const SymbolicVector& u);

  // Objective gap F(x_i) - F(x_star); creates evaluation points on demand
  // and memoizes them. Chambolle-Pock trajectories support i >= 1.
  ScalarExpr objective_gap(int i);
  ScalarExpr objective_gap_average();          // at (1/N) sum_{i=1..N} x_i
  std::vector<ScalarExpr> gaps_1_to_N();       // candidates for the best iterate
  ScalarExpr gradient_sqnorm_last();

  // --- internal bookkeeping, populated by the builders -------------------
  // (no member initializers: the builders fill every field)
  struct GmPlainMeta {
    int f;
    std::vector<int> point_at;  // per iterate, index into functions[f].points
    int star_point;
  };
  struct GmComposedMeta {
    int g;
    int op;
    std::vector<int> gpoint_at;  // per iterate, index into functions[g].points
    int star_gpoint;
  };
  struct CpMeta {
    int f, g, op;
    std::vector<int> fpoint_at;       // per iterate; -1 where absent (x_0)
    std::map<int, int> gpoint_at;     // lazily created g-points per iterate
    int star_fpoint, star_gpoint;
    std::map<int, ScalarExpr> gap_at;  // memoized gaps
  };
  std::variant<GmPlainMeta, GmComposedMeta, CpMeta> meta;

 private:
  std::optional<ScalarExpr> avg_gap_;
};

// Gradient method x_{k+1} = x_k - step * grad F(x_k) for N steps with
// ||x_0 - x*||^2 <= R^2 and grad F(x*) = 0. `step` is the absolute step
// size; the h / L_F normalization happens in the runner.
Trajectory build_gradient_method(const GmObjective& objective, double step, int N, double R);

// Chambolle-Pock on f(x) + g(Mx): primal prox step on f, dual prox step on
// g* expressed through g via the Moreau identity, saddle point encoded by
// 0 in df(x*) + M'u* and u* in dg(Mx*).
Trajectory build_chambolle_pock(const FunctionClassSpec& fclass, const FunctionClassSpec& gclass,
                                const OperatorGeneralBounded& mclass, double tau, double sigma,
                                int N, double R_x, double R_u);

// Expression to maximize for the given criterion. ObjectiveGapBest is
// handled by the runner as separate solves over gaps_1_to_N().
ScalarExpr attach_criterion(Trajectory& traj, Criterion crit);

}  // namespace peplin
