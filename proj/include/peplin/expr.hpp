#pragma once

// Symbolic algebra over abstract decision vectors. Vectors live in named
// inner-product spaces; only their pairwise inner products (the Gram matrix
// of each space), function values and auxiliary scalars appear in
// expressions, which keeps every constraint semidefinite-representable.

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace peplin {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SpaceId {
  int value = -1;
  bool valid() const { return value >= 0; }
  friend bool operator==(SpaceId a, SpaceId b) { return a.value == b.value; }
  friend bool operator!=(SpaceId a, SpaceId b) { return a.value != b.value; }
  friend bool operator<(SpaceId a, SpaceId b) { return a.value < b.value; }
};

struct FvalId {
  int value = -1;
  bool valid() const { return value >= 0; }
  friend bool operator<(FvalId a, FvalId b) { return a.value < b.value; }
  friend bool operator==(FvalId a, FvalId b) { return a.value == b.value; }
};

struct AuxId {
  int value = -1;
  bool valid() const { return value >= 0; }
  friend bool operator<(AuxId a, AuxId b) { return a.value < b.value; }
  friend bool operator==(AuxId a, AuxId b) { return a.value == b.value; }
};

struct BasisVector {
  int id = -1;      // unique within a Workspace
  SpaceId space;
  int index = -1;   // position inside the space's Gram block
  std::string label;
};

class Workspace;

// Formal linear combination of basis vectors of one space. The zero vector
// of a space is an empty term map.
class SymbolicVector {
 public:
  SymbolicVector() = default;
  explicit SymbolicVector(SpaceId space) : space_(space) {}
  SymbolicVector(const BasisVector& b) : space_(b.space) { terms_[b.id] = 1.0; }

  static SymbolicVector zero(SpaceId space) { return SymbolicVector(space); }

  SpaceId space() const { return space_; }
  const std::map<int, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  SymbolicVector& operator+=(const SymbolicVector& rhs);
  SymbolicVector& operator-=(const SymbolicVector& rhs);
  SymbolicVector& operator*=(double a);

  friend SymbolicVector operator+(SymbolicVector a, const SymbolicVector& b) { return a += b; }
  friend SymbolicVector operator-(SymbolicVector a, const SymbolicVector& b) { return a -= b; }
  friend SymbolicVector operator*(double a, SymbolicVector v) { return v *= a; }
  friend SymbolicVector operator*(SymbolicVector v, double a) { return v *= a; }
  friend SymbolicVector operator/(SymbolicVector v, double a) { return v *= (1.0 / a); }
  friend SymbolicVector operator-(SymbolicVector v) { return v *= -1.0; }

 private:
  void check_space(const SymbolicVector& rhs) const;
  SpaceId space_;
  std::map<int, double> terms_;  // basis id -> coefficient
};

// Unordered pair of basis ids, stored canonically as (min, max).
struct GramKey {
  int a = -1, b = -1;
  GramKey() = default;
  GramKey(int i, int j) : a(std::min(i, j)), b(std::max(i, j)) {}
  friend bool operator<(const GramKey& x, const GramKey& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  }
  friend bool operator==(const GramKey& x, const GramKey& y) { return x.a == y.a && x.b == y.b; }
};

// Affine expression in Gram entries, function values and auxiliary scalars.
class ScalarExpr {
 public:
  ScalarExpr() = default;
  static ScalarExpr constant(double c);
  static ScalarExpr fval(FvalId f, double coeff = 1.0);
  static ScalarExpr aux(AuxId a, double coeff = 1.0);

  const std::map<GramKey, double>& gram_terms() const { return gram_; }
  const std::map<int, double>& fval_terms() const { return fval_; }
  const std::map<int, double>& aux_terms() const { return aux_; }
  double constant_term() const { return constant_; }
  bool is_constant() const { return gram_.empty() && fval_.empty() && aux_.empty(); }

  ScalarExpr& operator+=(const ScalarExpr& rhs);
  ScalarExpr& operator-=(const ScalarExpr& rhs);
  ScalarExpr& operator*=(double a);
  ScalarExpr& operator+=(double c) { constant_ += c; return *this; }
  ScalarExpr& operator-=(double c) { constant_ -= c; return *this; }

  friend ScalarExpr operator+(ScalarExpr a, const ScalarExpr& b) { return a += b; }
  friend ScalarExpr operator-(ScalarExpr a, const ScalarExpr& b) { return a -= b; }
  friend ScalarExpr operator*(double a, ScalarExpr e) { return e *= a; }
  friend ScalarExpr operator*(ScalarExpr e, double a) { return e *= a; }
  friend ScalarExpr operator+(ScalarExpr e, double c) { return e += c; }
  friend ScalarExpr operator-(ScalarExpr e, double c) { return e -= c; }
  friend ScalarExpr operator+(double c, ScalarExpr e) { return e += c; }
  friend ScalarExpr operator-(double c, ScalarExpr e) {
    e *= -1.0;
    return e += c;
  }
  friend ScalarExpr operator-(ScalarExpr e) { return e *= -1.0; }

  // Largest absolute coefficient, used for symmetry/equality checks.
  double max_abs_coeff() const;
  bool approx_equal(const ScalarExpr& rhs, double tol = 1e-12) const;

  void add_gram_term(GramKey key, double coeff);

 private:
  void prune(double scale);
  std::map<GramKey, double> gram_;
  std::map<int, double> fval_;  // FvalId.value -> coefficient
  std::map<int, double> aux_;   // AuxId.value -> coefficient
  double constant_ = 0.0;
};

// Bilinear expansion of <u, v> into Gram entries. Throws on space mismatch.
ScalarExpr inner(const SymbolicVector& u, const SymbolicVector& v);
inline ScalarExpr squared_norm(const SymbolicVector& v) { return inner(v, v); }

// Symmetric matrix of scalar expressions asserted positive semidefinite.
struct LmiConstraint {
  int side = 0;
  std::vector<ScalarExpr> entries;  // row-major, side * side
  const ScalarExpr& at(int i, int j) const { return entries[i * side + j]; }
};

// Validates squareness and symmetry of the entry matrix.
LmiConstraint make_lmi(const std::vector<std::vector<ScalarExpr>>& rows, double tol = 1e-9);

// Single-writer registry of spaces, basis vectors, function values and
// auxiliary scalars. Completed values are immutable and freely shareable.
class Workspace {
 public:
  SpaceId add_space(std::string name);
  SpaceId space(const std::string& name) const;  // throws if unknown

  BasisVector declare_vector(SpaceId space, std::string label);
  FvalId declare_fval(std::string label);
  AuxId declare_aux(std::string label);

  int num_spaces() const { return static_cast<int>(space_names_.size()); }
  int num_basis() const { return static_cast<int>(basis_.size()); }
  int num_fvals() const { return static_cast<int>(fval_labels_.size()); }
  int num_aux() const { return static_cast<int>(aux_labels_.size()); }

  int space_dim(SpaceId s) const;
  const std::string& space_name(SpaceId s) const;
  const BasisVector& basis(int id) const;
  const std::string& fval_label(FvalId f) const { return fval_labels_.at(f.value); }
  const std::string& aux_label(AuxId a) const { return aux_labels_.at(a.value); }

 private:
  void check_space(SpaceId s) const;
  std::vector<std::string> space_names_;
  std::vector<int> space_dims_;
  std::vector<BasisVector> basis_;
  std::vector<std::string> fval_labels_;
  std::vector<std::string> aux_labels_;
};

// Concrete assignment of R^d vectors to basis vectors plus numeric function
// values and auxiliary scalars; evaluates the symbolic algebra numerically.
class Assignment {
 public:
  explicit Assignment(const Workspace& ws);

  // Columns of P are the basis vectors of the space, in declaration order.
  void set_space(SpaceId s, Matrix P);
  void set_vector(const BasisVector& b, const Vector& value);
  void set_fval(FvalId f, double v) { fvals_[f.value] = v; }
  void set_aux(AuxId a, double v) { auxs_[a.value] = v; }

  Vector eval(const SymbolicVector& v) const;
  double eval(const ScalarExpr& e) const;
  Matrix eval(const LmiConstraint& lmi) const;
  Matrix gram(SpaceId s) const;  // P^T P

 private:
  const Workspace* ws_;
  std::vector<Matrix> space_points_;  // by space id
  std::map<int, double> fvals_;
  std::map<int, double> auxs_;
};

}  // namespace peplin
