#include "peplin/reconstruct.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <fstream>

namespace peplin {

namespace {

Matrix symmetrized(const Matrix& A) { return 0.5 * (A + A.transpose()); }

// f(lambda) applied to the spectrum, with eigenvalues below tol * lambda_max
// treated as zero.
template <typename F>
Matrix spectral_apply(const Matrix& A, double tol, F f) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(A));
  Vector lam = eig.eigenvalues();
  double lmax = lam.size() > 0 ? std::max(0.0, lam.maxCoeff()) : 0.0;
  Vector out = Vector::Zero(lam.size());
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] > tol * lmax) out[i] = f(lam[i]);
  }
  return eig.eigenvectors() * out.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Matrix psd_sqrt(const Matrix& A, double tol) {
  return spectral_apply(A, tol, [](double l) { return std::sqrt(l); });
}

Matrix psd_pinv_sqrt(const Matrix& A, double tol) {
  return spectral_apply(A, tol, [](double l) { return 1.0 / std::sqrt(l); });
}

Matrix psd_clip(const Matrix& A, double tol) {
  return spectral_apply(A, tol, [](double l) { return l; });
}

Matrix factor_gram(const Matrix& G, double rank_tol) {
  if (G.rows() != G.cols()) throw std::invalid_argument("factor_gram: matrix is not square");
  Matrix S = symmetrized(G);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  const Vector& lam = eig.eigenvalues();
  const double trace = std::max(S.trace(), 1e-300);
  if (lam.size() > 0 && lam.minCoeff() < -1e-6 * std::max(1.0, trace)) {
    throw std::invalid_argument("factor_gram: matrix is significantly indefinite");
  }
  double lmax = lam.size() > 0 ? std::max(0.0, lam.maxCoeff()) : 0.0;
  std::vector<int> keep;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] > rank_tol * lmax) keep.push_back(i);
  }
  Matrix P(static_cast<int>(keep.size()), G.cols());
  for (int r = 0; r < static_cast<int>(keep.size()); ++r) {
    P.row(r) = std::sqrt(lam[keep[r]]) * eig.eigenvectors().col(keep[r]).transpose();
  }
  return P;
}

Completion complete_norm_bounded(const Matrix& M1, const Matrix& M2, const Matrix& M3,
                                 InterpolantFlavor flavor, const conic::Backend& backend,
                                 const conic::Settings& settings) {
  const int p = static_cast<int>(M1.rows());   // rows of the top block
  const int q = static_cast<int>(M1.cols());   // cols of the left block
  const int p2 = static_cast<int>(M2.cols());  // cols of W
  const int p3 = static_cast<int>(M3.rows());  // rows of W
  if (M2.rows() != p || M3.cols() != q) {
    throw std::invalid_argument("complete_norm_bounded: inconsistent block shapes");
  }
  const int rows = p + p3;
  const int cols = q + p2;

  Matrix F0 = Matrix::Zero(rows, cols);
  F0.topLeftCorner(p, q) = M1;
  F0.topRightCorner(p, p2) = M2;
  F0.bottomLeftCorner(p3, q) = M3;

  // Entries of W as free variables (full, symmetric or skew pattern).
  struct WEntry {
    int a, b;      // position inside W
    bool mirrored; // also writes (b, a) with the flavor's sign
  };
  std::vector<WEntry> entries;
  if (flavor == InterpolantFlavor::General) {
    for (int a = 0; a < p3; ++a)
      for (int b = 0; b < p2; ++b) entries.push_back({a, b, false});
  } else {
    if (p2 != p3) {
      throw std::invalid_argument("complete_norm_bounded: structured W must be square");
    }
    for (int a = 0; a < p3; ++a) {
      int b0 = flavor == InterpolantFlavor::Symmetric ? a : a + 1;
      for (int b = b0; b < p2; ++b) entries.push_back({a, b, a != b});
    }
  }

  if (entries.empty()) {
    Completion out;
    out.matrix = F0;
    out.norm = F0.size() > 0 ? F0.jacobiSvd().singularValues()[0] : 0.0;
    return out;
  }

  // minimize t  s.t.  [[t I, F(W)], [F(W)', t I]] >= 0.
  const double rt2 = std::sqrt(2.0);
  const double wsign = flavor == InterpolantFlavor::Skew ? -1.0 : 1.0;
  const int side = rows + cols;
  conic::Problem cp;
  cp.num_vars = 1 + static_cast<int>(entries.size());
  cp.q.assign(cp.num_vars, 0.0);
  cp.q[0] = 1.0;

  auto entry_row = [&](int i, int j) { return conic::svec_index(std::min(i, j), std::max(i, j)); };
  cp.b.assign(side * (side + 1) / 2, 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (F0(i, j) != 0.0) cp.b[entry_row(i, rows + j)] = rt2 * F0(i, j);
    }
  }
  for (int d = 0; d < side; ++d) cp.set_entry(entry_row(d, d), 0, -1.0);
  for (int e = 0; e < static_cast<int>(entries.size()); ++e) {
    const WEntry& w = entries[e];
    cp.set_entry(entry_row(p + w.a, rows + q + w.b), 1 + e, -rt2);
    if (w.mirrored) cp.set_entry(entry_row(p + w.b, rows + q + w.a), 1 + e, -rt2 * wsign);
  }
  cp.cones.push_back({conic::ConeKind::PsdTriangle, side});

  conic::Solution sol = backend.solve(cp, settings);
  if (sol.status != conic::SolveStatus::Optimal &&
      sol.status != conic::SolveStatus::Inaccurate) {
    throw std::runtime_error("complete_norm_bounded: completion SDP failed");
  }

  Completion out;
  out.norm = sol.x[0];
  Matrix W = Matrix::Zero(p3, p2);
  for (int e = 0; e < static_cast<int>(entries.size()); ++e) {
    const WEntry& w = entries[e];
    W(w.a, w.b) = sol.x[1 + e];
    if (w.mirrored) W(w.b, w.a) = wsign * sol.x[1 + e];
  }
  out.matrix = F0;
  out.matrix.bottomRightCorner(p3, p2) = W;
  return out;
}

Matrix build_interpolant(const GramBlocks& blocks, double L, InterpolantFlavor flavor,
                         const conic::Backend& backend, const conic::Settings& settings,
                         double tol) {
  const double cut = 1e-9;
  Matrix A1 = psd_clip(blocks.A1, cut);
  Matrix C2 = psd_clip(blocks.C2, cut);
  Matrix A1_pinv_sqrt = psd_pinv_sqrt(A1, cut);
  Matrix C2_pinv_sqrt = psd_pinv_sqrt(C2, cut);
  Matrix A1_pinv = A1_pinv_sqrt * A1_pinv_sqrt;
  Matrix C2_pinv = C2_pinv_sqrt * C2_pinv_sqrt;

  Matrix S1 = psd_clip(blocks.C1 - blocks.B.transpose() * A1_pinv * blocks.B, cut);
  Matrix S2 = psd_clip(blocks.A2 - blocks.B * C2_pinv * blocks.B.transpose(), cut);

  Matrix M1 = C2_pinv_sqrt * blocks.B.transpose() * A1_pinv_sqrt;
  Matrix M2 = C2_pinv_sqrt * psd_sqrt(S1, cut);
  Matrix M3 = psd_sqrt(S2, cut) * A1_pinv_sqrt;

  if (flavor == InterpolantFlavor::Symmetric) {
    M1 = symmetrized(M1);
    M3 = M2.transpose();
  } else if (flavor == InterpolantFlavor::Skew) {
    M1 = 0.5 * (M1 - M1.transpose());
    M3 = -M2.transpose();
  }

  Completion comp = complete_norm_bounded(M1, M2, M3, flavor, backend, settings);
  if (comp.norm > L + tol * (1.0 + L)) {
    throw std::runtime_error("build_interpolant: completion norm " + std::to_string(comp.norm) +
                             " exceeds the class bound " + std::to_string(L) +
                             "; interpolation conditions violated");
  }
  return comp.matrix;
}

namespace {

// Orthogonal Omega minimizing ||Omega A - B||_F (exact when A, B share the
// Gram matrix).
Matrix procrustes(const Matrix& A, const Matrix& B) {
  Eigen::JacobiSVD<Matrix> svd(B * A.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Matrix pad_rows(const Matrix& A, int rows) {
  Matrix out = Matrix::Zero(rows, A.cols());
  out.topRows(A.rows()) = A;
  return out;
}

}  // namespace

Matrix align_interpolant(const Matrix& MR, const GramBlocks& blocks, const Matrix& X,
                         const Matrix& V, const Matrix& Y, const Matrix& U) {
  const int N1 = blocks.n1();
  const int N2 = blocks.n2();
  const int T = N1 + N2;
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(Y.rows());
  const double cut = 1e-9;

  Matrix XR = Matrix::Zero(T, N1);
  XR.topRows(N1) = psd_sqrt(psd_clip(blocks.A1, cut), cut);
  Matrix UR = Matrix::Zero(T, N2);
  UR.topRows(N2) = psd_sqrt(psd_clip(blocks.C2, cut), cut);
  Matrix YR = MR * XR;
  Matrix VR = MR.transpose() * UR;

  const int Dn = std::max(n, T);
  const int Dm = std::max(m, T);

  Matrix P(Dn, N1 + N2), PR(Dn, N1 + N2);
  P << pad_rows(X, Dn), pad_rows(V, Dn);
  PR << pad_rows(XR, Dn), pad_rows(VR, Dn);
  Matrix Q(Dm, N1 + N2), QR(Dm, N1 + N2);
  Q << pad_rows(Y, Dm), pad_rows(U, Dm);
  QR << pad_rows(YR, Dm), pad_rows(UR, Dm);

  Matrix omega_in = procrustes(P, PR);   // PR = omega_in * P
  Matrix omega_out = procrustes(Q, QR);  // QR = omega_out * Q

  Matrix MR_pad = Matrix::Zero(Dm, Dn);
  MR_pad.topLeftCorner(T, T) = MR;
  Matrix M_full = omega_out.transpose() * MR_pad * omega_in;
  return M_full.topLeftCorner(m, n);
}

Matrix interpolate_operator(const Matrix& X, const Matrix& Y, const Matrix& U, const Matrix& V,
                            double L, InterpolantFlavor flavor, const conic::Backend& backend,
                            const conic::Settings& settings) {
  if (X.cols() != Y.cols() || U.cols() != V.cols()) {
    throw std::invalid_argument("interpolate_operator: pair lists have mismatched lengths");
  }
  GramBlocks blocks;
  blocks.A1 = X.transpose() * X;
  blocks.B = X.transpose() * V;
  blocks.C1 = V.transpose() * V;
  blocks.A2 = Y.transpose() * Y;
  blocks.C2 = U.transpose() * U;
  Matrix MR = build_interpolant(blocks, L, flavor, backend, settings);
  return align_interpolant(MR, blocks, X, V, Y, U);
}

Matrix interpolate_symmetric_operator(const Matrix& X, const Matrix& Y, double mu, double L,
                                      const conic::Backend& backend,
                                      const conic::Settings& settings) {
  if (mu > L) throw std::invalid_argument("interpolate_symmetric_operator: mu must be <= L");
  const double shift = 0.5 * (L + mu);
  Matrix Yt = Y - shift * X;
  Matrix Mt = interpolate_operator(X, Yt, X, Yt, 0.5 * (L - mu), InterpolantFlavor::Symmetric,
                                   backend, settings);
  return Mt + shift * Matrix::Identity(Mt.rows(), Mt.cols());
}

namespace {

Matrix columns_of(const Assignment& asg, const std::vector<OperatorPoint>& pts, bool outputs) {
  if (pts.empty()) return Matrix(0, 0);
  Vector first = asg.eval(outputs ? pts[0].out : pts[0].in);
  Matrix M(first.size(), static_cast<int>(pts.size()));
  M.col(0) = first;
  for (int i = 1; i < static_cast<int>(pts.size()); ++i) {
    M.col(i) = asg.eval(outputs ? pts[i].out : pts[i].in);
  }
  return M;
}

double lmi_violation(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  return std::max(0.0, -eig.eigenvalues().minCoeff());
}

double constraint_residual(const Assignment& asg, const ClassConstraintSet& set) {
  double worst = 0.0;
  for (const ScalarExpr& e : set.equalities) worst = std::max(worst, std::abs(asg.eval(e)));
  for (const ScalarExpr& e : set.inequalities) worst = std::max(worst, asg.eval(e));
  for (const LmiConstraint& lmi : set.lmis) worst = std::max(worst, lmi_violation(asg.eval(lmi)));
  return worst;
}

RecoveredOperator reconstruct_operator(const RegisteredOperator& op, const Assignment& asg,
                                       const SolveResult& result, const conic::Backend& backend,
                                       const conic::Settings& settings) {
  RecoveredOperator rec;
  rec.name = op.name;
  rec.X = columns_of(asg, op.forward, false);
  rec.Y = columns_of(asg, op.forward, true);
  rec.U = columns_of(asg, op.adjoint, false);
  rec.V = columns_of(asg, op.adjoint, true);

  if (const auto* sym = std::get_if<OperatorSymmetric>(&op.spec)) {
    rec.M = interpolate_symmetric_operator(rec.X, rec.Y, sym->mu, sym->L, backend, settings);
    rec.norm_bound = std::max(std::abs(sym->mu), std::abs(sym->L));
    rec.structure_residual = (rec.M - rec.M.transpose()).norm();
  } else if (const auto* skew = std::get_if<OperatorSkewSymmetric>(&op.spec)) {
    rec.M = interpolate_operator(rec.X, rec.Y, rec.X, -rec.Y, skew->L, InterpolantFlavor::Skew,
                                 backend, settings);
    rec.norm_bound = skew->L;
    rec.structure_residual = (rec.M + rec.M.transpose()).norm();
  } else {
    double L;
    if (const auto* gen = std::get_if<OperatorGeneralBounded>(&op.spec)) {
      L = gen->L;
    } else {
      L = std::sqrt(std::max(0.0, result.aux[op.l_squared->value]));
    }
    int m = rec.Y.rows() > 0 ? static_cast<int>(rec.Y.rows())
                             : static_cast<int>(rec.U.rows());
    int n = rec.X.rows() > 0 ? static_cast<int>(rec.X.rows())
                             : static_cast<int>(rec.V.rows());
    Matrix X = rec.X.size() > 0 ? rec.X : Matrix(n, 0);
    Matrix Y = rec.Y.size() > 0 ? rec.Y : Matrix(m, 0);
    Matrix U = rec.U.size() > 0 ? rec.U : Matrix(m, 0);
    Matrix V = rec.V.size() > 0 ? rec.V : Matrix(n, 0);
    rec.M = interpolate_operator(X, Y, U, V, L, InterpolantFlavor::General, backend, settings);
    rec.norm_bound = L;
  }

  if (rec.X.size() > 0) rec.residual_forward = (rec.Y - rec.M * rec.X).norm();
  if (rec.U.size() > 0) rec.residual_adjoint = (rec.V - rec.M.transpose() * rec.U).norm();
  return rec;
}

}  // namespace

WorstCaseInstance recover_instance(const RunResult& run, const conic::Backend& backend,
                                   const conic::Settings& settings) {
  if (!run.result.optimal()) {
    throw std::runtime_error("recover_instance: solve status is " +
                             status_name(run.result.status));
  }
  const Trajectory& traj = run.traj;
  const PepProblem& prob = run.prob;
  const SolveResult& result = run.result;

  WorstCaseInstance inst;
  Assignment asg(traj.ws);
  for (int k = 0; k < static_cast<int>(prob.blocks.size()); ++k) {
    Matrix P = factor_gram(result.gram_blocks[k], 1e-9);
    inst.space_points.push_back(P);
    asg.set_space(prob.blocks[k].space, P);
  }
  for (int i = 0; i < prob.num_fvals; ++i) asg.set_fval(FvalId{i}, result.fvals[i]);
  for (int i = 0; i < prob.num_aux; ++i) asg.set_aux(AuxId{i}, result.aux[i]);

  double replay = 0.0;

  for (const RegisteredFunction& f : traj.functions) {
    RecoveredFunction rec;
    rec.name = f.name;
    if (!f.points.empty()) {
      Vector x0 = asg.eval(f.points[0].x);
      rec.points.resize(x0.size(), static_cast<int>(f.points.size()));
      rec.gradients.resize(x0.size(), static_cast<int>(f.points.size()));
      rec.values.resize(static_cast<int>(f.points.size()));
      for (int i = 0; i < static_cast<int>(f.points.size()); ++i) {
        rec.points.col(i) = asg.eval(f.points[i].x);
        rec.gradients.col(i) = asg.eval(f.points[i].g);
        rec.values[i] = result.fvals[f.points[i].f.value];
      }
    }
    rec.interpolation_residual =
        constraint_residual(asg, function_class_conditions(f.spec, f.points));
    if (const auto* quad = std::get_if<Quadratic>(&f.spec)) {
      RecoveredOperator qop;
      qop.name = f.name + ".Q";
      qop.X = rec.points;
      qop.Y = rec.gradients;
      qop.M = interpolate_symmetric_operator(rec.points, rec.gradients, quad->mu, quad->L,
                                             backend, settings);
      qop.norm_bound = std::max(std::abs(quad->mu), std::abs(quad->L));
      qop.structure_residual = (qop.M - qop.M.transpose()).norm();
      qop.residual_forward = (qop.Y - qop.M * qop.X).norm();
      rec.quadratic_form = std::move(qop);
      replay = std::max(replay, rec.quadratic_form->residual_forward);
    }
    replay = std::max(replay, rec.interpolation_residual);
    inst.functions.push_back(std::move(rec));
  }

  for (const RegisteredOperator& op : traj.operators) {
    RecoveredOperator rec = reconstruct_operator(op, asg, result, backend, settings);
    replay = std::max(replay, std::max(rec.residual_forward, rec.residual_adjoint));
    inst.operators.push_back(std::move(rec));
  }

  for (const SymbolicVector& x : traj.iterates) {
    Vector xi = asg.eval(x);
    if (inst.iterate_matrix.size() == 0) {
      inst.iterate_matrix.resize(xi.size(), static_cast<int>(traj.iterates.size()));
    }
    inst.iterates.push_back(xi);
  }
  for (int i = 0; i < static_cast<int>(inst.iterates.size()); ++i) {
    inst.iterate_matrix.col(i) = inst.iterates[i];
  }

  for (const ScalarExpr& e : traj.initial_conditions) {
    replay = std::max(replay, asg.eval(e));
  }

  inst.objective_value = asg.eval(prob.objective);
  inst.replay_residual = replay;
  return inst;
}

namespace {

void write_matrix(std::ostream& os, const std::string& name, const Matrix& M) {
  os << name << " " << M.rows() << " " << M.cols() << "\n";
  os.precision(17);
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      os << M(i, j) << (j + 1 < M.cols() ? " " : "");
    }
    os << "\n";
  }
}

}  // namespace

void export_instance(const WorstCaseInstance& instance, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_instance: cannot open " + path);
  os << std::scientific;
  os << "worst_case_instance\n";
  os << "objective " << instance.objective_value << "\n";
  os << "replay_residual " << instance.replay_residual << "\n";
  write_matrix(os, "iterates", instance.iterate_matrix);
  os << "operators " << instance.operators.size() << "\n";
  for (const RecoveredOperator& op : instance.operators) {
    os << "operator " << op.name << " norm_bound " << op.norm_bound << " residual_forward "
       << op.residual_forward << " residual_adjoint " << op.residual_adjoint << "\n";
    write_matrix(os, "M", op.M);
    write_matrix(os, "X", op.X);
    write_matrix(os, "Y", op.Y);
    write_matrix(os, "U", op.U);
    write_matrix(os, "V", op.V);
  }
  os << "functions " << instance.functions.size() << "\n";
  for (const RecoveredFunction& f : instance.functions) {
    os << "function " << f.name << " interpolation_residual " << f.interpolation_residual
       << "\n";
    write_matrix(os, "points", f.points);
    write_matrix(os, "gradients", f.gradients);
    Matrix vals = f.values.transpose();
    write_matrix(os, "values", vals);
    if (f.quadratic_form) write_matrix(os, "Q", f.quadratic_form->M);
  }
}

}  // namespace peplin
