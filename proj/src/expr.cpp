#include "peplin/expr.hpp"

#include <cmath>

namespace peplin {

void SymbolicVector::check_space(const SymbolicVector& rhs) const {
  if (space_ != rhs.space_) {
    throw std::invalid_argument("SymbolicVector: operands live in different spaces");
  }
}

SymbolicVector& SymbolicVector::operator+=(const SymbolicVector& rhs) {
  check_space(rhs);
  for (const auto& [id, c] : rhs.terms_) {
    double& v = terms_[id];
    v += c;
    if (v == 0.0) terms_.erase(id);
  }
  return *this;
}

SymbolicVector& SymbolicVector::operator-=(const SymbolicVector& rhs) {
  check_space(rhs);
  for (const auto& [id, c] : rhs.terms_) {
    double& v = terms_[id];
    v -= c;
    if (v == 0.0) terms_.erase(id);
  }
  return *this;
}

SymbolicVector& SymbolicVector::operator*=(double a) {
  if (a == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [id, c] : terms_) c *= a;
  return *this;
}

ScalarExpr ScalarExpr::constant(double c) {
  ScalarExpr e;
  e.constant_ = c;
  return e;
}

ScalarExpr ScalarExpr::fval(FvalId f, double coeff) {
  if (!f.valid()) throw std::invalid_argument("ScalarExpr: invalid function-value id");
  ScalarExpr e;
  e.fval_[f.value] = coeff;
  return e;
}

ScalarExpr ScalarExpr::aux(AuxId a, double coeff) {
  if (!a.valid()) throw std::invalid_argument("ScalarExpr: invalid auxiliary id");
  ScalarExpr e;
  e.aux_[a.value] = coeff;
  return e;
}

namespace {
template <typename K>
void accumulate(std::map<K, double>& dst, const std::map<K, double>& src, double sign) {
  for (const auto& [k, c] : src) {
    double& v = dst[k];
    v += sign * c;
    if (v == 0.0) dst.erase(k);
  }
}
}  // namespace

ScalarExpr& ScalarExpr::operator+=(const ScalarExpr& rhs) {
  accumulate(gram_, rhs.gram_, 1.0);
  accumulate(fval_, rhs.fval_, 1.0);
  accumulate(aux_, rhs.aux_, 1.0);
  constant_ += rhs.constant_;
  return *this;
}

ScalarExpr& ScalarExpr::operator-=(const ScalarExpr& rhs) {
  accumulate(gram_, rhs.gram_, -1.0);
  accumulate(fval_, rhs.fval_, -1.0);
  accumulate(aux_, rhs.aux_, -1.0);
  constant_ -= rhs.constant_;
  return *this;
}

ScalarExpr& ScalarExpr::operator*=(double a) {
  if (a == 0.0) {
    gram_.clear();
    fval_.clear();
    aux_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (auto& [k, c] : gram_) c *= a;
  for (auto& [k, c] : fval_) c *= a;
  for (auto& [k, c] : aux_) c *= a;
  constant_ *= a;
  return *this;
}

void ScalarExpr::add_gram_term(GramKey key, double coeff) {
  double& v = gram_[key];
  v += coeff;
  if (v == 0.0) gram_.erase(key);
}

double ScalarExpr::max_abs_coeff() const {
  double m = std::abs(constant_);
  for (const auto& [k, c] : gram_) m = std::max(m, std::abs(c));
  for (const auto& [k, c] : fval_) m = std::max(m, std::abs(c));
  for (const auto& [k, c] : aux_) m = std::max(m, std::abs(c));
  return m;
}

bool ScalarExpr::approx_equal(const ScalarExpr& rhs, double tol) const {
  ScalarExpr d = *this;
  d -= rhs;
  double scale = std::max(max_abs_coeff(), rhs.max_abs_coeff());
  return d.max_abs_coeff() <= tol * std::max(1.0, scale);
}

ScalarExpr inner(const SymbolicVector& u, const SymbolicVector& v) {
  if (u.space() != v.space()) {
    throw std::invalid_argument("inner: vectors live in different spaces");
  }
  ScalarExpr e;
  for (const auto& [i, a] : u.terms()) {
    for (const auto& [j, b] : v.terms()) {
      e.add_gram_term(GramKey(i, j), a * b);
    }
  }
  return e;
}

LmiConstraint make_lmi(const std::vector<std::vector<ScalarExpr>>& rows, double tol) {
  const int n = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n) {
      throw std::invalid_argument("make_lmi: entry matrix is not square");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!rows[i][j].approx_equal(rows[j][i], tol)) {
        throw std::invalid_argument("make_lmi: entry matrix is not symmetric");
      }
    }
  }
  LmiConstraint lmi;
  lmi.side = n;
  lmi.entries.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Use the canonical symmetrized entry so both triangles agree exactly.
      ScalarExpr e = rows[i][j];
      e += rows[j][i];
      e *= 0.5;
      lmi.entries.push_back(std::move(e));
    }
  }
  return lmi;
}

SpaceId Workspace::add_space(std::string name) {
  space_names_.push_back(std::move(name));
  space_dims_.push_back(0);
  return SpaceId{static_cast<int>(space_names_.size()) - 1};
}

SpaceId Workspace::space(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(space_names_.size()); ++i) {
    if (space_names_[i] == name) return SpaceId{i};
  }
  throw std::invalid_argument("Workspace: unknown space '" + name + "'");
}

void Workspace::check_space(SpaceId s) const {
  if (!s.valid() || s.value >= static_cast<int>(space_names_.size())) {
    throw std::invalid_argument("Workspace: space was not registered");
  }
}

BasisVector Workspace::declare_vector(SpaceId space, std::string label) {
  check_space(space);
  BasisVector b;
  b.id = static_cast<int>(basis_.size());
  b.space = space;
  b.index = space_dims_[space.value]++;
  b.label = std::move(label);
  basis_.push_back(b);
  return b;
}

FvalId Workspace::declare_fval(std::string label) {
  fval_labels_.push_back(std::move(label));
  return FvalId{static_cast<int>(fval_labels_.size()) - 1};
}

AuxId Workspace::declare_aux(std::string label) {
  aux_labels_.push_back(std::move(label));
  return AuxId{static_cast<int>(aux_labels_.size()) - 1};
}

int Workspace::space_dim(SpaceId s) const {
  check_space(s);
  return space_dims_[s.value];
}

const std::string& Workspace::space_name(SpaceId s) const {
  check_space(s);
  return space_names_[s.value];
}

const BasisVector& Workspace::basis(int id) const {
  if (id < 0 || id >= static_cast<int>(basis_.size())) {
    throw std::invalid_argument("Workspace: unknown basis vector");
  }
  return basis_[id];
}

Assignment::Assignment(const Workspace& ws) : ws_(&ws) {
  space_points_.resize(ws.num_spaces());
}

void Assignment::set_space(SpaceId s, Matrix P) {
  if (P.cols() != ws_->space_dim(s)) {
    throw std::invalid_argument("Assignment: column count does not match space dimension");
  }
  space_points_[s.value] = std::move(P);
}

void Assignment::set_vector(const BasisVector& b, const Vector& value) {
  Matrix& P = space_points_[b.space.value];
  if (P.cols() != ws_->space_dim(b.space)) {
    if (P.size() == 0) {
      P = Matrix::Zero(value.size(), ws_->space_dim(b.space));
    } else {
      P.conservativeResize(Eigen::NoChange, ws_->space_dim(b.space));
    }
  }
  if (P.rows() != value.size()) {
    throw std::invalid_argument("Assignment: inconsistent ambient dimension for space");
  }
  P.col(b.index) = value;
}

Vector Assignment::eval(const SymbolicVector& v) const {
  const Matrix& P = space_points_.at(v.space().value);
  Vector out = Vector::Zero(P.rows());
  for (const auto& [id, c] : v.terms()) {
    out += c * P.col(ws_->basis(id).index);
  }
  return out;
}

double Assignment::eval(const ScalarExpr& e) const {
  double out = e.constant_term();
  for (const auto& [key, c] : e.gram_terms()) {
    const BasisVector& ba = ws_->basis(key.a);
    const BasisVector& bb = ws_->basis(key.b);
    const Matrix& P = space_points_.at(ba.space.value);
    out += c * P.col(ba.index).dot(P.col(bb.index));
  }
  for (const auto& [id, c] : e.fval_terms()) out += c * fvals_.at(id);
  for (const auto& [id, c] : e.aux_terms()) out += c * auxs_.at(id);
  return out;
}

Matrix Assignment::eval(const LmiConstraint& lmi) const {
  Matrix M(lmi.side, lmi.side);
  for (int i = 0; i < lmi.side; ++i) {
    for (int j = 0; j < lmi.side; ++j) M(i, j) = eval(lmi.at(i, j));
  }
  return M;
}

Matrix Assignment::gram(SpaceId s) const {
  const Matrix& P = space_points_.at(s.value);
  return P.transpose() * P;
}

}  // namespace peplin
