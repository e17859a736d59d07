#pragma once

// Interpolation conditions for function classes and linear-operator classes.
// Each generator maps a list of evaluation points to the exact set of
// equality / inequality / LMI constraints characterizing membership.

#include "peplin/expr.hpp"

#include <limits>
#include <optional>
#include <span>
#include <variant>

namespace peplin {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Class specifications
// ---------------------------------------------------------------------------

// L-smooth mu-strongly convex functions; L = kInf reduces to the merely
// strongly convex (or plain convex) class.
struct SmoothStronglyConvex {
  double mu = 0.0;
  double L = 1.0;
};

struct Convex {};

struct ConvexBoundedSubgradient {
  double S = 1.0;  // bound on subgradient norms; kInf disables the bound
};

// Homogeneous quadratics (1/2) x'Qx with mu I <= Q <= L I.
struct Quadratic {
  double mu = 0.0;
  double L = 1.0;
};

using FunctionClassSpec =
    std::variant<SmoothStronglyConvex, Convex, ConvexBoundedSubgradient, Quadratic>;

struct OperatorGeneralBounded {
  double L = 1.0;  // bound on singular values
};

struct OperatorSymmetric {
  double mu = 0.0;  // eigenvalues confined to [mu, L]
  double L = 1.0;
};

struct OperatorSkewSymmetric {
  double L = 1.0;
};

struct OperatorUnbounded {};  // arbitrary spectrum; introduces an L^2 variable

using OperatorClassSpec = std::variant<OperatorGeneralBounded, OperatorSymmetric,
                                       OperatorSkewSymmetric, OperatorUnbounded>;

// ---------------------------------------------------------------------------
// Evaluation points
// ---------------------------------------------------------------------------

struct FunctionPoint {
  SymbolicVector x;
  SymbolicVector g;
  FvalId f;
};

struct OperatorPoint {
  SymbolicVector in;
  SymbolicVector out;
};

struct ClassConstraintSet {
  std::vector<ScalarExpr> equalities;    // each expression == 0
  std::vector<ScalarExpr> inequalities;  // each expression <= 0
  std::vector<LmiConstraint> lmis;       // each matrix >= 0
  std::vector<AuxId> aux_vars;           // nonnegative scalars introduced

  void append(ClassConstraintSet other);
};

// ---------------------------------------------------------------------------
// Function classes
// ---------------------------------------------------------------------------

// Pairwise conditions for L-smooth mu-strongly convex interpolation.
// mu == L uses the limit form (gradient affine in the iterate); L == kInf
// drops the smoothness part and keeps the strong-convexity lower bound.
ClassConstraintSet smooth_convex_conditions(const SmoothStronglyConvex& spec,
                                            std::span<const FunctionPoint> points);

ClassConstraintSet convex_conditions(std::span<const FunctionPoint> points);

// Convex interpolation plus ||g_i||^2 <= S^2 for every point.
ClassConstraintSet convex_bounded_subgradient_conditions(const ConvexBoundedSubgradient& spec,
                                                         std::span<const FunctionPoint> points);

// Symmetric-operator conditions on (x_i, g_i) plus f_i = <x_i, g_i> / 2.
ClassConstraintSet quadratic_conditions(const Quadratic& spec,
                                        std::span<const FunctionPoint> points);

ClassConstraintSet function_class_conditions(const FunctionClassSpec& spec,
                                             std::span<const FunctionPoint> points);

// ---------------------------------------------------------------------------
// Operator classes
// ---------------------------------------------------------------------------

// Bounded singular values: X'V = Y'U, L^2 X'X - Y'Y >= 0, L^2 U'U - V'V >= 0.
ClassConstraintSet operator_general_conditions(const OperatorGeneralBounded& spec,
                                               std::span<const OperatorPoint> forward,
                                               std::span<const OperatorPoint> adjoint);

// Symmetric with eigenvalues in [mu, L]: X'Y = Y'X and the symmetrized
// (Y - mu X)'(L X - Y) >= 0.
ClassConstraintSet operator_symmetric_conditions(const OperatorSymmetric& spec,
                                                 std::span<const OperatorPoint> pairs);

// Skew-symmetric with bounded singular values: X'Y = -Y'X and
// L^2 X'X - Y'Y >= 0.
ClassConstraintSet operator_skew_conditions(const OperatorSkewSymmetric& spec,
                                            std::span<const OperatorPoint> pairs);

// Arbitrary spectrum. Declares one auxiliary scalar s playing the role of
// L^2 and emits block LMIs [[X'X, Y'Y], [Y'Y, s I]] >= 0 (same for U, V).
ClassConstraintSet operator_unbounded_conditions(Workspace& ws,
                                                 std::span<const OperatorPoint> forward,
                                                 std::span<const OperatorPoint> adjoint);

// Same, with the auxiliary scalar declared up front by the caller.
ClassConstraintSet operator_unbounded_conditions(AuxId l_squared,
                                                 std::span<const OperatorPoint> forward,
                                                 std::span<const OperatorPoint> adjoint);

// Dispatch over operator classes. `l_squared` is consulted only by the
// unbounded class, which requires it.
ClassConstraintSet operator_class_conditions(const OperatorClassSpec& spec,
                                             std::optional<AuxId> l_squared,
                                             std::span<const OperatorPoint> forward,
                                             std::span<const OperatorPoint> adjoint);

}  // namespace peplin
