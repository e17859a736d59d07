#include "doctest.h"

#include "peplin/methods.hpp"

#include <random>

using namespace peplin;

namespace {

double lmi_violation(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  return std::max(0.0, -eig.eigenvalues().minCoeff());
}

double violation(const Assignment& asg, const ClassConstraintSet& set) {
  double worst = 0.0;
  for (const ScalarExpr& e : set.equalities) worst = std::max(worst, std::abs(asg.eval(e)));
  for (const ScalarExpr& e : set.inequalities) worst = std::max(worst, asg.eval(e));
  for (const LmiConstraint& lmi : set.lmis) worst = std::max(worst, lmi_violation(asg.eval(lmi)));
  return worst;
}

// Worst defect over all registered identities of a trajectory under the
// assignment: class conditions, initial conditions and iterate recursions
// are all encoded in the symbolic data.
double trajectory_violation(const Trajectory& traj, const Assignment& asg) {
  double worst = 0.0;
  for (const RegisteredFunction& f : traj.functions) {
    worst = std::max(worst, violation(asg, function_class_conditions(f.spec, f.points)));
  }
  for (const RegisteredOperator& op : traj.operators) {
    worst = std::max(worst, violation(asg, operator_class_conditions(op.spec, op.l_squared,
                                                                     op.forward, op.adjoint)));
  }
  for (const ScalarExpr& e : traj.initial_conditions) worst = std::max(worst, asg.eval(e));
  for (const ScalarExpr& e : traj.side_constraints) worst = std::max(worst, asg.eval(e));
  return worst;
}

int single_basis_id(const SymbolicVector& v) {
  REQUIRE(v.terms().size() == 1);
  REQUIRE(v.terms().begin()->second == 1.0);
  return v.terms().begin()->first;
}

}  // namespace

TEST_CASE("gradient method bookkeeping, plain class") {
  Trajectory traj =
      build_gradient_method(PlainObjective{SmoothStronglyConvex{0.0, 1.0}}, 1.0, 1, 1.0);
  REQUIRE(traj.functions.size() == 1);
  CHECK(traj.functions[0].points.size() == 3);  // x_0, x_1, x*
  CHECK(traj.iterates.size() == 2);
  CHECK(traj.ws.num_basis() == 4);  // x0, x*, g0, g1; the optimal gradient is zero
  CHECK(traj.operators.empty());
  // The last point has a zero gradient: the stationarity of x*.
  CHECK(traj.functions[0].points.back().g.is_zero());
}

TEST_CASE("gradient method bookkeeping, composed class") {
  Trajectory traj = build_gradient_method(
      ComposedObjective{SmoothStronglyConvex{0.1, 1.0}, OperatorGeneralBounded{1.0}}, 1.0, 1,
      1.0);
  REQUIRE(traj.operators.size() == 1);
  const RegisteredOperator& op = traj.operators[0];
  CHECK(op.forward.size() == 3);   // chains at x_0, x_1, x*
  CHECK(op.adjoint.size() == 2);   // v_0 for the step, M'u* = 0 at the optimum
  CHECK(op.adjoint.back().out.is_zero());
  CHECK(traj.functions[0].points.size() == 3);
  CHECK(traj.ws.num_spaces() == 2);
}

TEST_CASE("gradient method bookkeeping, composed symmetric merges the pair lists") {
  Trajectory traj = build_gradient_method(
      ComposedObjective{SmoothStronglyConvex{0.1, 1.0}, OperatorSymmetric{0.0, 1.0}}, 1.0, 1,
      1.0);
  const RegisteredOperator& op = traj.operators[0];
  CHECK(op.forward.size() == 5);  // 3 chains + v_0 + the zero optimality pair
  CHECK(op.adjoint.empty());
  CHECK(traj.ws.num_spaces() == 1);  // symmetric operators act on their own space
}

TEST_CASE("trajectory builders validate their inputs") {
  CHECK_THROWS_AS(
      build_gradient_method(PlainObjective{SmoothStronglyConvex{0.0, 1.0}}, -1.0, 1, 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(build_gradient_method(PlainObjective{Convex{}}, 1.0, 1, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      build_gradient_method(
          ComposedObjective{SmoothStronglyConvex{0.0, 1.0}, OperatorSkewSymmetric{1.0}}, 1.0, 1,
          1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(build_chambolle_pock(SmoothStronglyConvex{0.0, 1.0}, Convex{},
                                       OperatorGeneralBounded{1.0}, 1.0, 1.0, 1, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_chambolle_pock(Convex{}, Convex{}, OperatorGeneralBounded{1.0}, 0.0, 1.0,
                                       1, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("criteria produce the documented expressions") {
  Trajectory traj =
      build_gradient_method(PlainObjective{SmoothStronglyConvex{0.0, 1.0}}, 1.0, 2, 1.0);
  ScalarExpr last = attach_criterion(traj, Criterion::ObjectiveGapLast);
  CHECK(last.fval_terms().size() == 2);  // f_N - f*

  ScalarExpr dist = attach_criterion(traj, Criterion::DistanceLast);
  CHECK(dist.fval_terms().empty());
  CHECK(!dist.gram_terms().empty());

  int points_before = static_cast<int>(traj.functions[0].points.size());
  ScalarExpr avg = attach_criterion(traj, Criterion::ObjectiveGapAverage);
  CHECK(static_cast<int>(traj.functions[0].points.size()) == points_before + 1);
  // Memoized: a second request must not create another point.
  attach_criterion(traj, Criterion::ObjectiveGapAverage);
  CHECK(static_cast<int>(traj.functions[0].points.size()) == points_before + 1);
  CHECK(avg.fval_terms().size() == 2);

  CHECK_THROWS_AS(attach_criterion(traj, Criterion::ObjectiveGapBest), std::invalid_argument);
}

TEST_CASE("chambolle-pock bookkeeping") {
  Trajectory traj = build_chambolle_pock(ConvexBoundedSubgradient{1.0},
                                         ConvexBoundedSubgradient{1.0},
                                         OperatorGeneralBounded{1.0}, 1.0, 1.0, 1, 1.0, 1.0);
  const RegisteredOperator& op = traj.operators[0];
  CHECK(op.forward.size() == 2);  // y* = M x* and z_0 = M (2x_1 - x_0)
  CHECK(op.adjoint.size() == 2);  // v* = M'u* and v_0 = M'u_0
  CHECK(traj.functions[0].points.size() == 2);  // f at x*, x_1
  CHECK(traj.functions[1].points.size() == 2);  // g at y*, q_1
  CHECK(traj.dual_iterates.size() == 2);

  // The last-iterate criterion adds one forward chain and one g point.
  Trajectory copy = traj;
  attach_criterion(copy, Criterion::ObjectiveGapLast);
  CHECK(copy.operators[0].forward.size() == 3);
  CHECK(copy.functions[1].points.size() == 3);
  CHECK_THROWS_AS(attach_criterion(copy, Criterion::GradNormLast), std::invalid_argument);
}

TEST_CASE("replay: gradient method on an explicit quadratic satisfies every identity") {
  std::mt19937 rng(2718);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = 3, N = 4;
  const double mu = 0.2, L = 1.0, h = 0.8;

  // Random quadratic with spectrum inside [mu, L].
  Matrix A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = gauss(rng);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (A + A.transpose()));
  Vector lam = eig.eigenvalues();
  for (int i = 0; i < d; ++i) lam[i] = std::clamp(lam[i], mu + 0.05, L - 0.05);
  Matrix Q = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  Vector b(d);
  for (int i = 0; i < d; ++i) b[i] = gauss(rng);
  Vector xstar = -Q.ldlt().solve(b);

  auto grad = [&](const Vector& x) { return (Q * x + b).eval(); };
  auto val = [&](const Vector& x) { return 0.5 * x.dot(Q * x) + b.dot(x); };

  Vector x0 = xstar + Vector::Ones(d).normalized();
  std::vector<Vector> xs{x0};
  for (int i = 0; i < N; ++i) xs.push_back(xs.back() - h * grad(xs.back()));

  Trajectory traj =
      build_gradient_method(PlainObjective{SmoothStronglyConvex{mu, L}}, h, N, 1.0);
  Assignment asg(traj.ws);
  const auto& pts = traj.functions[0].points;
  REQUIRE(pts.size() == static_cast<size_t>(N + 2));
  asg.set_vector(traj.ws.basis(single_basis_id(traj.iterates[0])), x0);
  asg.set_vector(traj.ws.basis(single_basis_id(traj.x_star)), xstar);
  for (int i = 0; i <= N; ++i) {
    asg.set_vector(traj.ws.basis(single_basis_id(pts[i].g)), grad(xs[i]));
    asg.set_fval(pts[i].f, val(xs[i]));
  }
  asg.set_fval(pts[N + 1].f, val(xstar));

  // Symbolic iterates reproduce the numeric recursion.
  for (int i = 0; i <= N; ++i) {
    CHECK((asg.eval(traj.iterates[i]) - xs[i]).norm() <= 1e-10);
  }
  CHECK(trajectory_violation(traj, asg) <= 1e-10);
  CHECK(asg.eval(traj.objective_gap(N)) ==
        doctest::Approx(val(xs[N]) - val(xstar)).epsilon(1e-12));
}

TEST_CASE("replay: composed gradient method with an explicit operator") {
  std::mt19937 rng(31415);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = 3, N = 3;
  const double mu_g = 0.1, h = 1.1;

  // g(y) = y'Dy/2 + b'y with D spectrum in [mu_g, 1]; M with singular values
  // <= 1 and full rank so a stationary point exists.
  Matrix D = Matrix::Zero(d, d);
  D(0, 0) = mu_g;
  D(1, 1) = 0.6;
  D(2, 2) = 1.0;
  Vector b(d);
  for (int i = 0; i < d; ++i) b[i] = gauss(rng);
  Matrix M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = gauss(rng);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector sv = svd.singularValues();
  for (int i = 0; i < d; ++i) sv[i] = std::clamp(sv[i], 0.2, 1.0);
  M = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();

  auto ggrad = [&](const Vector& y) { return (D * y + b).eval(); };
  auto gval = [&](const Vector& y) { return 0.5 * y.dot(D * y) + b.dot(y); };
  Vector xstar = -(M.transpose() * D * M).ldlt().solve(M.transpose() * b);

  Vector x0 = xstar + Vector::Ones(d).normalized() * 0.9;
  std::vector<Vector> xs{x0};
  for (int i = 0; i < N; ++i) {
    xs.push_back(xs.back() - h * M.transpose() * ggrad(M * xs.back()));
  }

  Trajectory traj = build_gradient_method(
      ComposedObjective{SmoothStronglyConvex{mu_g, 1.0}, OperatorGeneralBounded{1.0}}, h, N,
      1.0);
  Assignment asg(traj.ws);
  asg.set_vector(traj.ws.basis(single_basis_id(traj.iterates[0])), x0);
  asg.set_vector(traj.ws.basis(single_basis_id(traj.x_star)), xstar);

  const RegisteredOperator& op = traj.operators[0];
  const auto& gpts = traj.functions[0].points;
  // Chains at x_0..x_N then x*: forward pair i maps to y_i, g point i to
  // grad g(y_i); adjoint pair i (i < N) to v_i, the last one to M'u* = 0.
  for (int i = 0; i <= N + 1; ++i) {
    Vector x = i <= N ? xs[i] : xstar;
    Vector y = M * x;
    asg.set_vector(traj.ws.basis(single_basis_id(op.forward[i].out)), y);
    asg.set_vector(traj.ws.basis(single_basis_id(gpts[i].g)), ggrad(y));
    asg.set_fval(gpts[i].f, gval(y));
  }
  for (int i = 0; i < N; ++i) {
    asg.set_vector(traj.ws.basis(single_basis_id(op.adjoint[i].out)),
                   M.transpose() * ggrad(M * xs[i]));
  }

  for (int i = 0; i <= N; ++i) {
    CHECK((asg.eval(traj.iterates[i]) - xs[i]).norm() <= 1e-10);
  }
  CHECK(trajectory_violation(traj, asg) <= 1e-9);
  CHECK(asg.eval(traj.objective_gap(N)) ==
        doctest::Approx(gval(M * xs[N]) - gval(M * xstar)).epsilon(1e-10));
}

TEST_CASE("replay: chambolle-pock on explicit norm functions") {
  // f(x) = a ||x||, g(y) = c ||y||: both prox steps have closed forms, the
  // saddle point is (0, 0), subgradient bounds are a and c.
  std::mt19937 rng(999);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = 3, N = 3;
  const double a = 0.7, c = 1.0, tau = 0.9, sigma = 1.1;

  Matrix M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = gauss(rng);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector sv = svd.singularValues();
  for (int i = 0; i < d; ++i) sv[i] = std::min(sv[i], 1.0);
  M = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();

  auto prox_f = [&](const Vector& w) {
    double n = w.norm();
    return n <= tau * a ? Vector(Vector::Zero(d)) : Vector(w * (1.0 - tau * a / n));
  };
  auto project_ball = [&](const Vector& w, double radius) {
    double n = w.norm();
    return n <= radius ? w : Vector(w * (radius / n));
  };

  Vector x0(d), u0(d);
  for (int i = 0; i < d; ++i) x0[i] = 0.4 * gauss(rng);
  for (int i = 0; i < d; ++i) u0[i] = 0.3 * gauss(rng);
  u0 = project_ball(u0, c);  // dual iterates live in the c-ball

  std::vector<Vector> xs{x0}, us{u0}, subgrads_f, zs, qs;
  for (int i = 0; i < N; ++i) {
    Vector w = xs.back() - tau * M.transpose() * us.back();
    Vector x_next = prox_f(w);
    subgrads_f.push_back((w - x_next) / tau);
    Vector z = M * (2.0 * x_next - xs.back());
    Vector wp = us.back() + sigma * z;
    Vector u_next = project_ball(wp, c);
    qs.push_back((wp - u_next) / sigma);
    zs.push_back(z);
    xs.push_back(x_next);
    us.push_back(u_next);
  }

  Trajectory traj =
      build_chambolle_pock(ConvexBoundedSubgradient{a}, ConvexBoundedSubgradient{c},
                           OperatorGeneralBounded{1.0}, tau, sigma, N, 1.0, 2.0 * c);
  attach_criterion(traj, Criterion::ObjectiveGapLast);

  Assignment asg(traj.ws);
  asg.set_vector(traj.ws.basis(single_basis_id(traj.iterates[0])), x0);
  asg.set_vector(traj.ws.basis(single_basis_id(traj.x_star)), Vector::Zero(d));
  asg.set_vector(traj.ws.basis(single_basis_id(traj.dual_iterates[0])), u0);
  asg.set_vector(traj.ws.basis(single_basis_id(*traj.u_star)), Vector::Zero(d));

  const RegisteredOperator& op = traj.operators[0];
  // forward: y* (zero), z_0..z_{N-1}, then the criterion chain at x_N.
  asg.set_vector(traj.ws.basis(single_basis_id(op.forward[0].out)), M * Vector::Zero(d));
  for (int i = 0; i < N; ++i) {
    asg.set_vector(traj.ws.basis(single_basis_id(op.forward[1 + i].out)), zs[i]);
  }
  asg.set_vector(traj.ws.basis(single_basis_id(op.forward[N + 1].out)), M * xs[N]);
  // adjoint: v* then v_0..v_{N-1}.
  asg.set_vector(traj.ws.basis(single_basis_id(op.adjoint[0].out)),
                 M.transpose() * Vector::Zero(d));
  for (int i = 0; i < N; ++i) {
    asg.set_vector(traj.ws.basis(single_basis_id(op.adjoint[1 + i].out)),
                   M.transpose() * us[i]);
  }

  // f points: x* then the prox outputs x_1..x_N.
  const auto& fpts = traj.functions[0].points;
  asg.set_fval(fpts[0].f, 0.0);  // f(x*) = 0; its subgradient -M'u* is affine
  for (int i = 0; i < N; ++i) {
    asg.set_vector(traj.ws.basis(single_basis_id(fpts[1 + i].g)), subgrads_f[i]);
    asg.set_fval(fpts[1 + i].f, a * xs[i + 1].norm());
  }
  // g points: y* then q_1..q_N then the criterion point M x_N.
  const auto& gpts = traj.functions[1].points;
  asg.set_fval(gpts[0].f, 0.0);
  for (int i = 0; i < N; ++i) {
    asg.set_vector(traj.ws.basis(single_basis_id(gpts[1 + i].g)), us[i + 1]);
    asg.set_fval(gpts[1 + i].f, c * qs[i].norm());
  }
  Vector yN = M * xs[N];
  Vector tN = yN.norm() > 1e-12 ? Vector(c * yN / yN.norm()) : Vector(Vector::Zero(d));
  asg.set_vector(traj.ws.basis(single_basis_id(gpts[N + 1].g)), tN);
  asg.set_fval(gpts[N + 1].f, c * yN.norm());

  for (int i = 0; i <= N; ++i) {
    CHECK((asg.eval(traj.iterates[i]) - xs[i]).norm() <= 1e-10);
    CHECK((asg.eval(traj.dual_iterates[i]) - us[i]).norm() <= 1e-10);
  }
  CHECK(trajectory_violation(traj, asg) <= 1e-10);
  double expected_gap = a * xs[N].norm() + c * yN.norm();
  CHECK(asg.eval(traj.objective_gap(N)) == doctest::Approx(expected_gap).epsilon(1e-10));
}
