#include "peplin/classes.hpp"

#include <cmath>

namespace peplin {

void ClassConstraintSet::append(ClassConstraintSet other) {
  auto move_into = [](auto& dst, auto& src) {
    dst.insert(dst.end(), std::make_move_iterator(src.begin()),
               std::make_move_iterator(src.end()));
  };
  move_into(equalities, other.equalities);
  move_into(inequalities, other.inequalities);
  move_into(lmis, other.lmis);
  move_into(aux_vars, other.aux_vars);
}

namespace {

void check_mu_L(double mu, double L) {
  if (std::isnan(mu) || std::isnan(L) || mu > L) {
    throw std::invalid_argument("function class: parameters must satisfy mu <= L");
  }
}

// f_i >= f_j + <g_j, x_i - x_j> + (mu/2) ||x_i - x_j||^2 for all i != j,
// written as expression <= 0.
ClassConstraintSet strongly_convex_lower_bounds(double mu,
                                                std::span<const FunctionPoint> pts) {
  ClassConstraintSet out;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      SymbolicVector dx = pts[i].x - pts[j].x;
      ScalarExpr e = ScalarExpr::fval(pts[j].f) - ScalarExpr::fval(pts[i].f);
      e += inner(pts[j].g, dx);
      if (mu != 0.0) e += (mu / 2.0) * squared_norm(dx);
      out.inequalities.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace

ClassConstraintSet smooth_convex_conditions(const SmoothStronglyConvex& spec,
                                            std::span<const FunctionPoint> points) {
  const double mu = spec.mu;
  const double L = spec.L;
  if (mu < 0.0) throw std::invalid_argument("smooth_convex_conditions: mu must be >= 0");
  check_mu_L(mu, L);

  if (std::isinf(L)) {
    if (std::isinf(mu)) throw std::invalid_argument("smooth_convex_conditions: mu must be finite");
    return strongly_convex_lower_bounds(mu, points);
  }

  ClassConstraintSet out;
  const int n = static_cast<int>(points.size());

  if (mu == L) {
    // F_{L,L} contains exactly the functions (L/2)||x - c||^2 + d: gradients
    // are affine in the point and values follow a quadratic identity.
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        SymbolicVector dx = points[i].x - points[j].x;
        SymbolicVector dg = points[i].g - points[j].g;
        out.equalities.push_back(squared_norm(dg - mu * dx));
        ScalarExpr e = ScalarExpr::fval(points[i].f) - ScalarExpr::fval(points[j].f);
        e -= inner(points[j].g, dx);
        e -= (mu / 2.0) * squared_norm(dx);
        out.equalities.push_back(std::move(e));
      }
    }
    return out;
  }

  // 2 (1 - mu/L) (f_i - f_j - <g_j, x_i - x_j>) >=
  //   (1/L) ||g_i - g_j||^2 + mu ||x_i - x_j||^2
  //   - (2 mu / L) <g_i - g_j, x_i - x_j>
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      SymbolicVector dx = points[i].x - points[j].x;
      SymbolicVector dg = points[i].g - points[j].g;
      ScalarExpr lhs = ScalarExpr::fval(points[i].f) - ScalarExpr::fval(points[j].f);
      lhs -= inner(points[j].g, dx);
      lhs *= 2.0 * (1.0 - mu / L);
      ScalarExpr rhs = (1.0 / L) * squared_norm(dg);
      rhs += mu * squared_norm(dx);
      rhs -= (2.0 * mu / L) * inner(dg, dx);
      out.inequalities.push_back(rhs - lhs);
    }
  }
  return out;
}

ClassConstraintSet convex_conditions(std::span<const FunctionPoint> points) {
  return strongly_convex_lower_bounds(0.0, points);
}

ClassConstraintSet convex_bounded_subgradient_conditions(const ConvexBoundedSubgradient& spec,
                                                         std::span<const FunctionPoint> points) {
  if (spec.S < 0.0) {
    throw std::invalid_argument("convex_bounded_subgradient_conditions: S must be >= 0");
  }
  ClassConstraintSet out = convex_conditions(points);
  if (!std::isinf(spec.S)) {
    for (const FunctionPoint& p : points) {
      out.inequalities.push_back(squared_norm(p.g) - spec.S * spec.S);
    }
  }
  return out;
}

ClassConstraintSet quadratic_conditions(const Quadratic& spec,
                                        std::span<const FunctionPoint> points) {
  if (std::isinf(spec.mu) || std::isinf(spec.L)) {
    throw std::invalid_argument("quadratic_conditions: spectrum bounds must be finite");
  }
  check_mu_L(spec.mu, spec.L);

  std::vector<OperatorPoint> pairs;
  pairs.reserve(points.size());
  for (const FunctionPoint& p : points) pairs.push_back({p.x, p.g});
  ClassConstraintSet out =
      operator_symmetric_conditions({spec.mu, spec.L}, pairs);
  for (const FunctionPoint& p : points) {
    out.equalities.push_back(ScalarExpr::fval(p.f) - 0.5 * inner(p.x, p.g));
  }
  return out;
}

ClassConstraintSet function_class_conditions(const FunctionClassSpec& spec,
                                             std::span<const FunctionPoint> points) {
  return std::visit(
      [&](const auto& s) -> ClassConstraintSet {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SmoothStronglyConvex>) {
          return smooth_convex_conditions(s, points);
        } else if constexpr (std::is_same_v<T, Convex>) {
          return convex_conditions(points);
        } else if constexpr (std::is_same_v<T, ConvexBoundedSubgradient>) {
          return convex_bounded_subgradient_conditions(s, points);
        } else {
          return quadratic_conditions(s, points);
        }
      },
      spec);
}

namespace {

// L^2 A'A - B'B >= 0 over a pair list (A = inputs, B = outputs).
LmiConstraint amplification_lmi(double L, std::span<const OperatorPoint> pairs) {
  const int n = static_cast<int>(pairs.size());
  std::vector<std::vector<ScalarExpr>> rows(n, std::vector<ScalarExpr>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      rows[i][j] = L * L * inner(pairs[i].in, pairs[j].in) - inner(pairs[i].out, pairs[j].out);
    }
  }
  return make_lmi(rows);
}

// X'V = Y'U, entry by entry.
void cross_equalities(ClassConstraintSet& out, std::span<const OperatorPoint> forward,
                      std::span<const OperatorPoint> adjoint) {
  for (const OperatorPoint& f : forward) {
    for (const OperatorPoint& a : adjoint) {
      out.equalities.push_back(inner(f.in, a.out) - inner(f.out, a.in));
    }
  }
}

// [[G_in, G_out], [G_out, s I]] >= 0 for one pair list.
LmiConstraint unbounded_block_lmi(AuxId s, std::span<const OperatorPoint> pairs) {
  const int n = static_cast<int>(pairs.size());
  const int side = 2 * n;
  std::vector<std::vector<ScalarExpr>> rows(side, std::vector<ScalarExpr>(side));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      rows[i][j] = inner(pairs[i].in, pairs[j].in);
      rows[i][n + j] = inner(pairs[i].out, pairs[j].out);
      rows[n + i][j] = inner(pairs[i].out, pairs[j].out);
      rows[n + i][n + j] = i == j ? ScalarExpr::aux(s) : ScalarExpr();
    }
  }
  return make_lmi(rows);
}

}  // namespace

ClassConstraintSet operator_general_conditions(const OperatorGeneralBounded& spec,
                                               std::span<const OperatorPoint> forward,
                                               std::span<const OperatorPoint> adjoint) {
  if (spec.L < 0.0 || std::isinf(spec.L)) {
    throw std::invalid_argument("operator_general_conditions: L must be finite and >= 0");
  }
  ClassConstraintSet out;
  cross_equalities(out, forward, adjoint);
  if (!forward.empty()) out.lmis.push_back(amplification_lmi(spec.L, forward));
  if (!adjoint.empty()) out.lmis.push_back(amplification_lmi(spec.L, adjoint));
  return out;
}

ClassConstraintSet operator_symmetric_conditions(const OperatorSymmetric& spec,
                                                 std::span<const OperatorPoint> pairs) {
  if (spec.mu > spec.L || std::isinf(spec.mu) || std::isinf(spec.L)) {
    throw std::invalid_argument("operator_symmetric_conditions: need finite mu <= L");
  }
  ClassConstraintSet out;
  const int n = static_cast<int>(pairs.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      out.equalities.push_back(inner(pairs[i].in, pairs[j].out) -
                               inner(pairs[j].in, pairs[i].out));
    }
  }
  if (n > 0) {
    // Symmetrized (Y - mu X)'(L X - Y); both forms agree under the equalities.
    std::vector<std::vector<ScalarExpr>> rows(n, std::vector<ScalarExpr>(n));
    for (int i = 0; i < n; ++i) {
      SymbolicVector yi_mu = pairs[i].out - spec.mu * pairs[i].in;
      for (int j = 0; j < n; ++j) {
        SymbolicVector lj_y = spec.L * pairs[j].in - pairs[j].out;
        rows[i][j] = inner(yi_mu, lj_y);
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i < j) {
          ScalarExpr sym = rows[i][j];
          sym += rows[j][i];
          sym *= 0.5;
          rows[i][j] = sym;
          rows[j][i] = sym;
        }
      }
    }
    out.lmis.push_back(make_lmi(rows));
  }
  return out;
}

ClassConstraintSet operator_skew_conditions(const OperatorSkewSymmetric& spec,
                                            std::span<const OperatorPoint> pairs) {
  if (spec.L < 0.0 || std::isinf(spec.L)) {
    throw std::invalid_argument("operator_skew_conditions: L must be finite and >= 0");
  }
  ClassConstraintSet out;
  const int n = static_cast<int>(pairs.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // X'Y = -Y'X; the diagonal forces <x_i, y_i> = 0.
      ScalarExpr e = inner(pairs[i].in, pairs[j].out) + inner(pairs[j].in, pairs[i].out);
      if (i == j) e *= 0.5;
      out.equalities.push_back(std::move(e));
    }
  }
  if (n > 0) out.lmis.push_back(amplification_lmi(spec.L, pairs));
  return out;
}

ClassConstraintSet operator_unbounded_conditions(AuxId l_squared,
                                                 std::span<const OperatorPoint> forward,
                                                 std::span<const OperatorPoint> adjoint) {
  ClassConstraintSet out;
  cross_equalities(out, forward, adjoint);
  if (forward.empty() && adjoint.empty()) return out;
  out.aux_vars.push_back(l_squared);
  if (!forward.empty()) out.lmis.push_back(unbounded_block_lmi(l_squared, forward));
  if (!adjoint.empty()) out.lmis.push_back(unbounded_block_lmi(l_squared, adjoint));
  return out;
}

ClassConstraintSet operator_unbounded_conditions(Workspace& ws,
                                                 std::span<const OperatorPoint> forward,
                                                 std::span<const OperatorPoint> adjoint) {
  if (forward.empty() && adjoint.empty()) return {};
  return operator_unbounded_conditions(ws.declare_aux("L2"), forward, adjoint);
}

ClassConstraintSet operator_class_conditions(const OperatorClassSpec& spec,
                                             std::optional<AuxId> l_squared,
                                             std::span<const OperatorPoint> forward,
                                             std::span<const OperatorPoint> adjoint) {
  return std::visit(
      [&](const auto& s) -> ClassConstraintSet {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, OperatorGeneralBounded>) {
          return operator_general_conditions(s, forward, adjoint);
        } else if constexpr (std::is_same_v<T, OperatorSymmetric>) {
          if (!adjoint.empty()) {
            throw std::invalid_argument(
                "operator_class_conditions: symmetric operators use a single pair list");
          }
          return operator_symmetric_conditions(s, forward);
        } else if constexpr (std::is_same_v<T, OperatorSkewSymmetric>) {
          if (!adjoint.empty()) {
            throw std::invalid_argument(
                "operator_class_conditions: skew operators use a single pair list");
          }
          return operator_skew_conditions(s, forward);
        } else {
          if (forward.empty() && adjoint.empty()) return {};
          if (!l_squared || !l_squared->valid()) {
            throw std::invalid_argument(
                "operator_class_conditions: unbounded class needs a declared L^2 scalar");
          }
          return operator_unbounded_conditions(*l_squared, forward, adjoint);
        }
      },
      spec);
}

}  // namespace peplin
