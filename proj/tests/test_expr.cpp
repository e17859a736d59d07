#include "doctest.h"

#include "peplin/expr.hpp"

#include <random>

using namespace peplin;

TEST_CASE("declare_vector assigns fresh ids per space") {
  Workspace ws;
  SpaceId primal = ws.add_space("primal");
  BasisVector e0 = ws.declare_vector(primal, "x0");
  BasisVector e1 = ws.declare_vector(primal, "x1");
  CHECK(e0.id == 0);
  CHECK(e1.id == 1);
  CHECK(e0.index == 0);
  CHECK(e1.index == 1);
  CHECK(ws.space_dim(primal) == 2);

  SpaceId image = ws.add_space("image");
  BasisVector y = ws.declare_vector(image, "y");
  CHECK(y.id == 2);
  CHECK(y.index == 0);  // Gram blocks are per space

  CHECK_THROWS_AS(ws.declare_vector(SpaceId{7}, "bad"), std::invalid_argument);
  CHECK_THROWS_AS(ws.declare_vector(SpaceId{}, "bad"), std::invalid_argument);
}

TEST_CASE("inner product expands bilinearly") {
  Workspace ws;
  SpaceId s = ws.add_space("s");
  BasisVector e0 = ws.declare_vector(s, "e0");
  BasisVector e1 = ws.declare_vector(s, "e1");

  ScalarExpr self = inner(e0, e0);
  CHECK(self.gram_terms().size() == 1);
  CHECK(self.gram_terms().at(GramKey(0, 0)) == 1.0);

  ScalarExpr mixed = inner(2.0 * SymbolicVector(e0) - e1, SymbolicVector(e1));
  CHECK(mixed.gram_terms().at(GramKey(0, 1)) == 2.0);
  CHECK(mixed.gram_terms().at(GramKey(1, 1)) == -1.0);

  ScalarExpr zero = inner(SymbolicVector::zero(s), SymbolicVector(e0));
  CHECK(zero.gram_terms().empty());
  CHECK(zero.constant_term() == 0.0);

  SpaceId other = ws.add_space("other");
  BasisVector w = ws.declare_vector(other, "w");
  CHECK_THROWS_AS(inner(SymbolicVector(e0), SymbolicVector(w)), std::invalid_argument);
}

TEST_CASE("gram keys are canonically unordered") {
  Workspace ws;
  SpaceId s = ws.add_space("s");
  BasisVector a = ws.declare_vector(s, "a");
  BasisVector b = ws.declare_vector(s, "b");
  ScalarExpr ab = inner(SymbolicVector(a), SymbolicVector(b));
  ScalarExpr ba = inner(SymbolicVector(b), SymbolicVector(a));
  CHECK(ab.approx_equal(ba));
}

TEST_CASE("lmi_block validates shape and symmetry") {
  Workspace ws;
  SpaceId s = ws.add_space("s");
  SymbolicVector x = ws.declare_vector(s, "x");
  SymbolicVector y = ws.declare_vector(s, "y");

  double L = 2.0;
  LmiConstraint one = make_lmi({{L * L * inner(x, x) - inner(y, y)}});
  CHECK(one.side == 1);

  // 2x2 block (Y - mu X)'(L X - Y) for a single pair duplicated.
  double mu = 0.5;
  ScalarExpr d = inner(y - mu * x, L * x - y);
  LmiConstraint two = make_lmi({{d, d}, {d, d}});
  CHECK(two.side == 2);

  std::vector<std::vector<ScalarExpr>> ragged{{d, d, d}, {d, d, d}};
  CHECK_THROWS_AS(make_lmi(ragged), std::invalid_argument);

  std::vector<std::vector<ScalarExpr>> asym{{d, d}, {2.0 * d, d}};
  CHECK_THROWS_AS(make_lmi(asym), std::invalid_argument);
}

TEST_CASE("symbolic evaluation agrees with numeric linear algebra") {
  std::mt19937 rng(20240817);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Workspace ws;
    SpaceId s = ws.add_space("s");
    const int n_basis = 1 + static_cast<int>(rng() % 5);
    const int d = 1 + static_cast<int>(rng() % 10);
    std::vector<BasisVector> basis;
    Matrix P(d, n_basis);
    for (int i = 0; i < n_basis; ++i) {
      basis.push_back(ws.declare_vector(s, "e"));
      for (int r = 0; r < d; ++r) P(r, i) = gauss(rng);
    }
    Assignment asg(ws);
    asg.set_space(s, P);

    auto random_combo = [&]() {
      SymbolicVector v = SymbolicVector::zero(s);
      for (const BasisVector& b : basis) {
        if (rng() % 2 == 0) v += gauss(rng) * SymbolicVector(b);
      }
      return v;
    };
    SymbolicVector u = random_combo();
    SymbolicVector v = random_combo();
    SymbolicVector w = random_combo();
    double alpha = gauss(rng);

    // Bilinearity at the numeric level.
    double lhs = asg.eval(inner(alpha * u + v, w));
    double rhs = alpha * asg.eval(u).dot(asg.eval(w)) + asg.eval(v).dot(asg.eval(w));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    // Symbolic inner product equals the true inner product.
    CHECK(asg.eval(inner(u, v)) ==
          doctest::Approx(asg.eval(u).dot(asg.eval(v))).epsilon(1e-12));

    // The Gram matrix of any assignment is PSD.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(asg.gram(s));
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("scalar expressions combine fvals, aux terms and constants") {
  Workspace ws;
  FvalId f = ws.declare_fval("f0");
  AuxId a = ws.declare_aux("L2");
  ScalarExpr e = 2.0 * ScalarExpr::fval(f) - ScalarExpr::aux(a) + 3.5;
  Assignment asg(ws);
  asg.set_fval(f, 1.25);
  asg.set_aux(a, 4.0);
  CHECK(asg.eval(e) == doctest::Approx(2.5 - 4.0 + 3.5));
}
