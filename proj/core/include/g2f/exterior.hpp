#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace g2f {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int kMaxDim = 8;
inline constexpr double kFormTol = 1e-12;

/// Real alternating k-form on R^n (3 <= n <= 8) in the standard coframe.
///
/// A monomial dx^{i1...ik} is keyed by the bitmask with bits (i1-1)..(ik-1)
/// set. Terms are kept sorted by mask with exact zeros removed.
class Form {
 public:
  struct Term {
    std::uint32_t mask;
    double coeff;
  };

  Form(int dim, int degree);

  static Form zero(int dim, int degree) { return Form(dim, degree); }
  static Form scalar(int dim, double c);
  static Form volume(int dim);
  /// Monomial c * dx^{i1} ^ ... ^ dx^{ik}; indices are 1-based and may be
  /// given in any order (the sign of the sorting permutation is applied).
  static Form monomial(int dim, std::initializer_list<int> indices, double c = 1.0);
  static Form monomial(int dim, const std::vector<int>& indices, double c = 1.0);
  static Form one_form(const Vec& a);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double coeff_mask(std::uint32_t mask) const;
  /// Coefficient of dx^{indices}; indices 1-based, any order.
  double coeff(const std::vector<int>& indices) const;
  void add(std::uint32_t mask, double c);

  double max_abs() const;
  double norm() const;
  bool is_zero(double tol = kFormTol) const { return max_abs() <= tol; }
  Form pruned(double tol) const;

  Form& operator+=(const Form& other);
  Form& operator-=(const Form& other);
  Form& operator*=(double c);

 private:
  int dim_;
  int degree_;
  std::vector<Term> terms_;
};

Form operator+(Form a, const Form& b);
Form operator-(Form a, const Form& b);
Form operator-(Form a);
Form operator*(double c, Form a);
Form operator*(Form a, double c);

/// Exterior product. Zero form of degree k+l when k+l > n.
Form wedge(const Form& a, const Form& b);
/// Hodge star for the standard metric and orientation dx^{1...n}.
Form hodge(const Form& a);
/// Contraction i(v)a; the zero 0-form for degree-0 input.
Form interior(const Vec& v, const Form& a);
double inner(const Form& a, const Form& b);
/// Pullback by the linear map A, with A^* dx^i = sum_j A(i,j) dx^j.
Form pullback(const Mat& A, const Form& a);
/// a(v_1, ..., v_k) with the vectors as the columns of V (n x k).
double evaluate(const Form& a, const Mat& V);

bool approx_equal(const Form& a, const Form& b, double tol = kFormTol);

/// Canonical text rendering "+c·dx{i...}" with terms in lexicographic order
/// of the index tuple; "0" for the zero form.
std::string render(const Form& a);

/// Index tuple (1-based, increasing) of a monomial mask.
std::vector<int> mask_indices(std::uint32_t mask);
std::uint32_t indices_mask(const std::vector<int>& indices);
/// Sign of e^I ^ e^J for disjoint masks; 0 when they overlap.
int wedge_sign(std::uint32_t I, std::uint32_t J);
/// All masks of the given degree in lexicographic order of index tuples.
std::vector<std::uint32_t> basis_masks(int dim, int degree);

/// Form with values in R^m: one Form per value component.
class VectorValuedForm {
 public:
  VectorValuedForm(int dim, int degree, int value_dim);
  explicit VectorValuedForm(std::vector<Form> components);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int value_dim() const { return static_cast<int>(components_.size()); }
  const Form& component(int a) const { return components_.at(a); }
  Form& component(int a) { return components_.at(a); }
  const std::vector<Form>& components() const { return components_; }

  /// The vector (a_1(V), ..., a_m(V)).
  Vec evaluate(const Mat& V) const;
  double max_abs() const;

 private:
  int dim_;
  int degree_;
  std::vector<Form> components_;
};

/// Dense coordinate vector of a form over basis_masks(dim, degree).
Vec to_dense(const Form& a);
Form from_dense(int dim, int degree, const Vec& coords);

}  // namespace g2f
