#include "g2f/exterior.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>

#include "g2f/error.hpp"

namespace g2f {

namespace {

using Buffer = std::array<double, 1u << kMaxDim>;

void check_dim(int dim) {
  if (dim < 3 || dim > kMaxDim) {
    throw StructuralError("form dimension must lie in 3..8, got " + std::to_string(dim));
  }
}

void check_same_dim(const Form& a, const Form& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw StructuralError(std::string(op) + ": dimension mismatch " + std::to_string(a.dim()) +
                          " vs " + std::to_string(b.dim()));
  }
}

Form from_buffer(int dim, int degree, const Buffer& buf) {
  Form out(dim, degree);
  for (std::uint32_t m = 0; m < (1u << dim); ++m) {
    if (buf[m] != 0.0) out.add(m, buf[m]);
  }
  return out;
}

// Determinant of the k x k submatrix rows(I) x cols(J) of M.
double minor_det(const Mat& M, std::uint32_t rows, std::uint32_t cols, int k) {
  if (k == 0) return 1.0;
  int ri[kMaxDim];
  int ci[kMaxDim];
  int nr = 0;
  int nc = 0;
  for (int i = 0; i < M.rows(); ++i)
    if (rows >> i & 1u) ri[nr++] = i;
  for (int j = 0; j < M.cols(); ++j)
    if (cols >> j & 1u) ci[nc++] = j;
  auto at = [&](int r, int c) { return M(ri[r], ci[c]); };
  switch (k) {
    case 1:
      return at(0, 0);
    case 2:
      return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
    case 3:
      return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
             at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
             at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    default: {
      Mat sub(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) sub(r, c) = at(r, c);
      return sub.partialPivLu().determinant();
    }
  }
}

}  // namespace

Form::Form(int dim, int degree) : dim_(dim), degree_(degree) {
  check_dim(dim);
  if (degree < 0 || degree > dim) {
    throw StructuralError("form degree must lie in 0.." + std::to_string(dim));
  }
}

Form Form::scalar(int dim, double c) {
  Form f(dim, 0);
  f.add(0u, c);
  return f;
}

Form Form::volume(int dim) {
  Form f(dim, dim);
  f.add((1u << dim) - 1u, 1.0);
  return f;
}

Form Form::monomial(int dim, std::initializer_list<int> indices, double c) {
  return monomial(dim, std::vector<int>(indices), c);
}

Form Form::monomial(int dim, const std::vector<int>& indices, double c) {
  Form f(dim, static_cast<int>(indices.size()));
  std::vector<int> idx = indices;
  int sign = 1;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 1 || idx[i] > dim) throw StructuralError("monomial index out of range");
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      if (idx[i] == idx[j]) return f;
      if (idx[i] > idx[j]) sign = -sign;
    }
  }
  f.add(indices_mask(idx), sign * c);
  return f;
}

Form Form::one_form(const Vec& a) {
  Form f(static_cast<int>(a.size()), 1);
  for (int i = 0; i < a.size(); ++i) f.add(1u << i, a(i));
  return f;
}

double Form::coeff_mask(std::uint32_t mask) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), mask,
                             [](const Term& t, std::uint32_t m) { return t.mask < m; });
  return (it != terms_.end() && it->mask == mask) ? it->coeff : 0.0;
}

double Form::coeff(const std::vector<int>& indices) const {
  if (static_cast<int>(indices.size()) != degree_) return 0.0;
  Form m = monomial(dim_, indices, 1.0);
  if (m.empty()) return 0.0;
  const Term& t = m.terms().front();
  return t.coeff * coeff_mask(t.mask);
}

void Form::add(std::uint32_t mask, double c) {
  if (std::popcount(mask) != degree_ || (mask >> dim_) != 0u) {
    throw StructuralError("monomial does not match form degree/dimension");
  }
  if (c == 0.0) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), mask,
                             [](const Term& t, std::uint32_t m) { return t.mask < m; });
  if (it != terms_.end() && it->mask == mask) {
    it->coeff += c;
    if (it->coeff == 0.0) terms_.erase(it);
  } else {
    terms_.insert(it, Term{mask, c});
  }
}

double Form::max_abs() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.coeff));
  return m;
}

double Form::norm() const { return std::sqrt(inner(*this, *this)); }

Form Form::pruned(double tol) const {
  Form out(dim_, degree_);
  for (const auto& t : terms_) {
    if (std::abs(t.coeff) > tol) out.terms_.push_back(t);
  }
  return out;
}

Form& Form::operator+=(const Form& other) {
  check_same_dim(*this, other, "add");
  if (other.degree_ != degree_) throw StructuralError("add: degree mismatch");
  for (const auto& t : other.terms_) add(t.mask, t.coeff);
  return *this;
}

Form& Form::operator-=(const Form& other) {
  check_same_dim(*this, other, "subtract");
  if (other.degree_ != degree_) throw StructuralError("subtract: degree mismatch");
  for (const auto& t : other.terms_) add(t.mask, -t.coeff);
  return *this;
}

Form& Form::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coeff *= c;
  return *this;
}

Form operator+(Form a, const Form& b) { return a += b; }
Form operator-(Form a, const Form& b) { return a -= b; }
Form operator-(Form a) { return a *= -1.0; }
Form operator*(double c, Form a) { return a *= c; }
Form operator*(Form a, double c) { return a *= c; }

int wedge_sign(std::uint32_t I, std::uint32_t J) {
  if (I & J) return 0;
  int swaps = 0;
  for (std::uint32_t rest = J; rest; rest &= rest - 1) {
    int j = std::countr_zero(rest);
    swaps += std::popcount(I >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

Form wedge(const Form& a, const Form& b) {
  check_same_dim(a, b, "wedge");
  const int n = a.dim();
  const int k = a.degree() + b.degree();
  if (k > n) return Form(n, n);
  Buffer buf{};
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      int s = wedge_sign(ta.mask, tb.mask);
      if (s != 0) buf[ta.mask | tb.mask] += s * ta.coeff * tb.coeff;
    }
  }
  return from_buffer(n, k, buf);
}

Form hodge(const Form& a) {
  const int n = a.dim();
  const std::uint32_t full = (1u << n) - 1u;
  Form out(n, n - a.degree());
  for (const auto& t : a.terms()) {
    const std::uint32_t c = full & ~t.mask;
    out.add(c, wedge_sign(t.mask, c) * t.coeff);
  }
  return out;
}

Form interior(const Vec& v, const Form& a) {
  if (v.size() != a.dim()) throw StructuralError("interior: vector/form dimension mismatch");
  const int n = a.dim();
  if (a.degree() == 0) return Form(n, 0);
  Buffer buf{};
  for (const auto& t : a.terms()) {
    int pos = 0;
    for (std::uint32_t rest = t.mask; rest; rest &= rest - 1, ++pos) {
      int i = std::countr_zero(rest);
      double s = (pos & 1) ? -1.0 : 1.0;
      buf[t.mask & ~(1u << i)] += s * v(i) * t.coeff;
    }
  }
  return from_buffer(n, a.degree() - 1, buf);
}

double inner(const Form& a, const Form& b) {
  check_same_dim(a, b, "inner");
  if (a.degree() != b.degree()) throw StructuralError("inner: degree mismatch");
  double s = 0.0;
  auto ia = a.terms().begin();
  auto ib = b.terms().begin();
  while (ia != a.terms().end() && ib != b.terms().end()) {
    if (ia->mask < ib->mask) {
      ++ia;
    } else if (ib->mask < ia->mask) {
      ++ib;
    } else {
      s += ia->coeff * ib->coeff;
      ++ia;
      ++ib;
    }
  }
  return s;
}

Form pullback(const Mat& A, const Form& a) {
  const int n = a.dim();
  if (A.rows() != n || A.cols() != n) throw StructuralError("pullback: matrix must be n x n");
  const int k = a.degree();
  Buffer buf{};
  const auto targets = basis_masks(n, k);
  for (const auto& t : a.terms()) {
    for (std::uint32_t J : targets) {
      double d = minor_det(A, t.mask, J, k);
      if (d != 0.0) buf[J] += t.coeff * d;
    }
  }
  return from_buffer(n, k, buf);
}

double evaluate(const Form& a, const Mat& V) {
  if (V.rows() != a.dim() || V.cols() != a.degree()) {
    throw StructuralError("evaluate: expected an n x k matrix of vectors");
  }
  double s = 0.0;
  for (const auto& t : a.terms()) {
    s += t.coeff * minor_det(V, t.mask, (1u << a.degree()) - 1u, a.degree());
  }
  return s;
}

bool approx_equal(const Form& a, const Form& b, double tol) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) return false;
  return (a - b).max_abs() <= tol;
}

std::vector<int> mask_indices(std::uint32_t mask) {
  std::vector<int> out;
  for (std::uint32_t rest = mask; rest; rest &= rest - 1) out.push_back(std::countr_zero(rest) + 1);
  return out;
}

std::uint32_t indices_mask(const std::vector<int>& indices) {
  std::uint32_t m = 0;
  for (int i : indices) m |= 1u << (i - 1);
  return m;
}

std::vector<std::uint32_t> basis_masks(int dim, int degree) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = 0; m < (1u << dim); ++m) {
    if (std::popcount(m) == degree) out.push_back(m);
  }
  std::sort(out.begin(), out.end(), [](std::uint32_t x, std::uint32_t y) {
    return mask_indices(x) < mask_indices(y);
  });
  return out;
}

std::string render(const Form& a) {
  if (a.empty()) return "0";
  std::vector<Form::Term> terms = a.terms();
  std::sort(terms.begin(), terms.end(), [](const Form::Term& x, const Form::Term& y) {
    return mask_indices(x.mask) < mask_indices(y.mask);
  });
  std::string out;
  char num[64];
  for (const auto& t : terms) {
    if (!out.empty()) out += ' ';
    std::snprintf(num, sizeof num, "%.15g", std::abs(t.coeff));
    out += t.coeff < 0 ? '-' : '+';
    out += num;
    if (a.degree() > 0) {
      out += "·dx{";
      for (int i : mask_indices(t.mask)) out += static_cast<char>('0' + i);
      out += '}';
    }
  }
  return out;
}

VectorValuedForm::VectorValuedForm(int dim, int degree, int value_dim)
    : dim_(dim), degree_(degree), components_(value_dim, Form(dim, degree)) {}

VectorValuedForm::VectorValuedForm(std::vector<Form> components)
    : dim_(0), degree_(0), components_(std::move(components)) {
  if (components_.empty()) throw StructuralError("vector-valued form needs a component");
  dim_ = components_.front().dim();
  degree_ = components_.front().degree();
  for (const auto& c : components_) {
    if (c.dim() != dim_ || c.degree() != degree_) {
      throw StructuralError("vector-valued form components must share degree and dimension");
    }
  }
}

Vec VectorValuedForm::evaluate(const Mat& V) const {
  Vec out(value_dim());
  for (int a = 0; a < value_dim(); ++a) out(a) = g2f::evaluate(components_[a], V);
  return out;
}

double VectorValuedForm::max_abs() const {
  double m = 0.0;
  for (const auto& c : components_) m = std::max(m, c.max_abs());
  return m;
}

Vec to_dense(const Form& a) {
  const auto masks = basis_masks(a.dim(), a.degree());
  Vec out(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) out(i) = a.coeff_mask(masks[i]);
  return out;
}

Form from_dense(int dim, int degree, const Vec& coords) {
  const auto masks = basis_masks(dim, degree);
  if (static_cast<std::size_t>(coords.size()) != masks.size()) {
    throw StructuralError("from_dense: coordinate count does not match the basis");
  }
  Form out(dim, degree);
  for (std::size_t i = 0; i < masks.size(); ++i) out.add(masks[i], coords(i));
  return out;
}

}  // namespace g2f
