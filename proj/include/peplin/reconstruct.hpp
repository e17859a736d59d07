#pragma once

// Turns a solved Gram matrix back into concrete vectors and an explicit
// interpolating operator: factor the Gram blocks, build the canonical
// block interpolant, complete its free block by a norm-minimization SDP,
// and align everything through orthogonal transforms.

#include "peplin/runner.hpp"

namespace peplin {

// Symmetric eigendecomposition helpers; eigenvalues below tol * lambda_max
// count as zero.
Matrix psd_sqrt(const Matrix& A, double tol = 1e-9);
Matrix psd_pinv_sqrt(const Matrix& A, double tol = 1e-9);
Matrix psd_clip(const Matrix& A, double tol = 1e-12);

// Factor a PSD matrix G into columns P with P'P = G; the row count is the
// numerical rank. Throws when G is significantly indefinite.
Matrix factor_gram(const Matrix& G, double rank_tol = 1e-9);

// Scalar blocks of the two Gram matrices of (X, V) and (Y, U):
// A1 = X'X, B = X'V = Y'U, C1 = V'V, A2 = Y'Y, C2 = U'U.
struct GramBlocks {
  Matrix A1, B, C1, A2, C2;
  int n1() const { return static_cast<int>(A1.rows()); }
  int n2() const { return static_cast<int>(C2.rows()); }
};

enum class InterpolantFlavor { General, Symmetric, Skew };

// Completion of [[M1, M2], [M3, W]] minimizing the spectral norm over W
// (with the structure the flavor dictates). Returns the completed matrix
// and its certified norm.
struct Completion {
  Matrix matrix;
  double norm = 0.0;
};
Completion complete_norm_bounded(const Matrix& M1, const Matrix& M2, const Matrix& M3,
                                 InterpolantFlavor flavor,
                                 const conic::Backend& backend = conic::clarabel_backend(),
                                 const conic::Settings& settings = {});

// Canonical interpolant M_R acting on the factors [A1^(1/2); 0] and
// [C2^(1/2); 0]. Throws when the completion certifies a norm above
// L (1 + tol) + tol, i.e. when the interpolation conditions fail.
Matrix build_interpolant(const GramBlocks& blocks, double L, InterpolantFlavor flavor,
                         const conic::Backend& backend = conic::clarabel_backend(),
                         const conic::Settings& settings = {}, double tol = 1e-6);

// Orthogonal alignment of the canonical interpolant onto concrete factors
// X (n x N1), V (n x N2), Y (m x N1), U (m x N2) sharing the block Grams.
Matrix align_interpolant(const Matrix& MR, const GramBlocks& blocks, const Matrix& X,
                         const Matrix& V, const Matrix& Y, const Matrix& U);

// One-call reconstruction for explicit data: an M with Y = M X, V = M' U
// and ||M|| <= L (symmetric flavor: in/out stacks coincide, V = Y; skew:
// V = -Y).
Matrix interpolate_operator(const Matrix& X, const Matrix& Y, const Matrix& U, const Matrix& V,
                            double L, InterpolantFlavor flavor,
                            const conic::Backend& backend = conic::clarabel_backend(),
                            const conic::Settings& settings = {});

// Symmetric operator with eigenvalues in [mu, L] through the spectral shift
// Y - (L + mu)/2 X with bound (L - mu)/2.
Matrix interpolate_symmetric_operator(const Matrix& X, const Matrix& Y, double mu, double L,
                                      const conic::Backend& backend = conic::clarabel_backend(),
                                      const conic::Settings& settings = {});

// ---------------------------------------------------------------------------
// Full instance recovery from a solved PEP
// ---------------------------------------------------------------------------

struct RecoveredOperator {
  std::string name;
  Matrix X, Y, U, V;  // concrete operator data (single-list classes leave U, V empty)
  Matrix M;
  double norm_bound = 0.0;   // certified ||M|| (or shifted bound)
  double residual_forward = 0.0;   // ||Y - M X||_F
  double residual_adjoint = 0.0;   // ||V - M' U||_F
  double structure_residual = 0.0; // ||M -+ M'||_F for symmetric/skew
};

struct RecoveredFunction {
  std::string name;
  Matrix points;     // columns x_i
  Matrix gradients;  // columns g_i
  Vector values;
  double interpolation_residual = 0.0;  // worst violation of the class conditions
  std::optional<RecoveredOperator> quadratic_form;  // Q for quadratic classes
};

struct WorstCaseInstance {
  std::vector<Matrix> space_points;  // factor of each Gram block
  std::vector<RecoveredFunction> functions;
  std::vector<RecoveredOperator> operators;
  std::vector<Matrix> iterates;      // concrete x_i as columns? one column each
  Matrix iterate_matrix;             // columns x_0..x_N
  double objective_value = 0.0;      // criterion recomputed from the recovered data
  double replay_residual = 0.0;      // worst defect of any registered identity
};

// Factors the solved Grams, reconstructs every registered operator (and the
// quadratic form of quadratic function classes), certifies interpolation
// residuals and replays the method identities. `objective` should be the
// expression that was maximized.
WorstCaseInstance recover_instance(const RunResult& run,
                                   const conic::Backend& backend = conic::clarabel_backend(),
                                   const conic::Settings& settings = {});

// Writes the instance as a structured text file (17 significant digits).
void export_instance(const WorstCaseInstance& instance, const std::string& path);

}  // namespace peplin
