#include "g2f/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "g2f/error.hpp"

namespace g2f {

namespace {

constexpr std::uint32_t kHMask = 0b0000111;

int h_degree(std::uint32_t mask) { return std::popcount(mask & kHMask); }

// rho(e_i) acting on (eta4..eta7): column a is the image of eta_{4+a}.
Eigen::Matrix4d su2_rho(int i) {
  Eigen::Matrix4d r;
  switch (i) {
    case 0:
      r << 0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0;
      break;
    case 1:
      r << 0, 0, 0, -1, 0, 0, 1, 0, 0, -1, 0, 0, 1, 0, 0, 0;
      break;
    default:
      r << 0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0;
      break;
  }
  return r;
}

std::array<Form, 7> basis_differentials(const LieAlgebraModel& m) {
  std::array<Form, 7> d{Form(7, 2), Form(7, 2), Form(7, 2), Form(7, 2), Form(7, 2), Form(7, 2), Form(7, 2)};
  for (int k = 0; k < 7; ++k)
    for (int i = 0; i < 7; ++i)
      for (int j = i + 1; j < 7; ++j)
        if (m.c[i][j][k] != 0.0) d[k].add((1u << i) | (1u << j), -m.c[i][j][k]);
  return d;
}

Form monomial_from_mask(std::uint32_t mask) {
  Form f(7, std::popcount(mask));
  f.add(mask, 1.0);
  return f;
}

}  // namespace

void LieAlgebraModel::set_bracket(int i, int j, int k, double value) {
  c[i - 1][j - 1][k - 1] = value;
  c[j - 1][i - 1][k - 1] = -value;
}

double LieAlgebraModel::max_antisymmetry_violation() const {
  double r = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) r = std::max(r, std::abs(c[i][j][k] + c[j][i][k]));
  return r;
}

Form ce_differential(const Form& a, const LieAlgebraModel& m) {
  if (a.dim() != 7) throw StructuralError("ce_differential: need a form on R^7");
  Form out(7, a.degree() + 1);
  if (a.degree() >= 7) return out;
  const auto de = basis_differentials(m);
  for (const auto& t : a.terms()) {
    // d(e^{i1..ik}) = sum_p (-1)^p e^{i1..i(p-1)} ^ de^{ip} ^ e^{i(p+1)..ik}
    const auto idx = mask_indices(t.mask);
    std::uint32_t left = 0;
    for (std::size_t p = 0; p < idx.size(); ++p) {
      const std::uint32_t bit = 1u << (idx[p] - 1);
      const std::uint32_t right = t.mask & ~left & ~bit;
      const double sign = (p % 2 == 0) ? 1.0 : -1.0;
      out += (sign * t.coeff) * wedge(wedge(monomial_from_mask(left), de[idx[p] - 1]), monomial_from_mask(right));
      left |= bit;
    }
  }
  return out;
}

double jacobi_check(const StructureConstants& c) {
  double worst = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k)
        for (int l = 0; l < 7; ++l) {
          double s = 0.0;
          for (int m = 0; m < 7; ++m) s += c[i][j][m] * c[m][k][l] + c[j][k][m] * c[m][i][l] + c[k][i][m] * c[m][j][l];
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

ClosednessFlags closedness_flags(const LieAlgebraModel& m) {
  const auto& P = standard_pieces();
  const auto& G = G2Structure::standard();
  ClosednessFlags f;
  f.d_lambda = ce_differential(P.lambda, m);
  f.d_omega = ce_differential(P.omega, m);
  f.d_theta = ce_differential(P.theta, m);
  f.d_mu = ce_differential(P.mu, m);
  f.d_phi = ce_differential(G.phi, m);
  f.d_star_phi = ce_differential(G.star_phi, m);
  return f;
}

LieAlgebraModel model_product_flat() {
  LieAlgebraModel m;
  m.name = "product-flat";
  return m;
}

LieAlgebraModel model_su2_semidirect() {
  LieAlgebraModel m;
  m.name = "su2-semidirect";
  m.set_bracket(1, 2, 3, 2.0);
  m.set_bracket(2, 3, 1, 2.0);
  m.set_bracket(3, 1, 2, 2.0);
  for (int i = 0; i < 3; ++i) {
    const Eigen::Matrix4d r = su2_rho(i);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (r(b, a) != 0.0) m.set_bracket(i + 1, a + 4, b + 4, r(b, a));
  }
  return m;
}

LieAlgebraModel model_heisenberg(const Eigen::Matrix3d& B) {
  LieAlgebraModel m;
  std::ostringstream name;
  name << "heisenberg:B=[";
  for (int i = 0; i < 3; ++i) {
    name << (i ? ",[" : "[");
    for (int j = 0; j < 3; ++j) name << (j ? "," : "") << B(i, j);
    name << "]";
  }
  name << "]";
  m.name = name.str();
  const auto& P = standard_pieces();
  for (int a = 3; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b)
      for (int i = 0; i < 3; ++i) {
        double v = 0.0;
        for (int j = 0; j < 3; ++j) v -= B(i, j) * P.omega_i[j].coeff_mask((1u << a) | (1u << b));
        if (v != 0.0) m.set_bracket(a + 1, b + 1, i + 1, v);
      }
  return m;
}

std::array<Form, 3> product_flat_hk_triple() {
  const auto& P = standard_pieces();
  return {P.omega_i[0], P.omega_i[1], -P.omega_i[2]};
}

Eigen::Matrix3d parse_matrix3(const std::string& text) {
  std::string s = text;
  std::replace_if(s.begin(), s.end(), [](char ch) { return ch == '[' || ch == ']' || ch == ',' || ch == ';'; }, ' ');
  std::istringstream in(s);
  std::vector<double> v;
  double x = 0.0;
  while (in >> x) v.push_back(x);
  if (!in.eof() || v.size() != 9) throw StructuralError("parse_matrix3: expected 9 numbers in '" + text + "'");
  Eigen::Matrix3d B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = v[3 * i + j];
  return B;
}

LieAlgebraModel model_by_name(const std::string& spec) {
  if (spec == "product-flat") return model_product_flat();
  if (spec == "su2-semidirect") return model_su2_semidirect();
  const std::string prefix = "heisenberg:B=";
  if (spec.rfind(prefix, 0) == 0) return model_heisenberg(parse_matrix3(spec.substr(prefix.size())));
  if (spec == "heisenberg") return model_heisenberg(Eigen::Matrix3d::Zero());
  throw StructuralError("unknown model '" + spec + "'");
}

TypeSplit derivative_type_split(const Form& a, const LieAlgebraModel& m) {
  const int k = a.degree() + 1;
  TypeSplit s{Form(7, k), Form(7, k), Form(7, k), Form(7, k)};
  for (const auto& t : a.terms()) {
    Form mono(7, a.degree());
    mono.add(t.mask, t.coeff);
    const int p = h_degree(t.mask);
    const Form d = ce_differential(mono, m);
    for (const auto& u : d.terms()) {
      switch (h_degree(u.mask) - p) {
        case 2:
          s.F_H.add(u.mask, u.coeff);
          break;
        case 1:
          s.d_H.add(u.mask, u.coeff);
          break;
        case 0:
          s.d_V.add(u.mask, u.coeff);
          break;
        default:
          s.F_V.add(u.mask, u.coeff);
          break;
      }
    }
  }
  return s;
}

double vertical_involutivity_defect(const LieAlgebraModel& m) {
  double r = 0.0;
  for (int a = 3; a < 7; ++a)
    for (int b = 3; b < 7; ++b)
      for (int i = 0; i < 3; ++i) r = std::max(r, std::abs(m.c[a][b][i]));
  return r;
}

SmithForm smith_normal_form(const IntMatrix& A) {
  const Eigen::Index rows = A.rows();
  const Eigen::Index cols = A.cols();
  SmithForm s;
  s.D = A;
  s.U = IntMatrix::Identity(rows, rows);
  s.V = IntMatrix::Identity(cols, cols);
  IntMatrix& D = s.D;
  auto row_axpy = [&](Eigen::Index dst, Eigen::Index src, std::int64_t q) {
    D.row(dst) -= q * D.row(src);
    s.U.row(dst) -= q * s.U.row(src);
  };
  auto col_axpy = [&](Eigen::Index dst, Eigen::Index src, std::int64_t q) {
    D.col(dst) -= q * D.col(src);
    s.V.col(dst) -= q * s.V.col(src);
  };
  const Eigen::Index n = std::min(rows, cols);
  for (Eigen::Index t = 0; t < n; ++t) {
    while (true) {
      // Smallest nonzero entry of the trailing block becomes the pivot.
      Eigen::Index pi = -1;
      Eigen::Index pj = -1;
      for (Eigen::Index i = t; i < rows; ++i)
        for (Eigen::Index j = t; j < cols; ++j)
          if (D(i, j) != 0 && (pi < 0 || std::abs(D(i, j)) < std::abs(D(pi, pj)))) {
            pi = i;
            pj = j;
          }
      if (pi < 0) break;
      D.row(t).swap(D.row(pi));
      s.U.row(t).swap(s.U.row(pi));
      D.col(t).swap(D.col(pj));
      s.V.col(t).swap(s.V.col(pj));
      bool clean = true;
      for (Eigen::Index i = t + 1; i < rows; ++i) {
        row_axpy(i, t, D(i, t) / D(t, t));
        clean = clean && D(i, t) == 0;
      }
      for (Eigen::Index j = t + 1; j < cols; ++j) {
        col_axpy(j, t, D(t, j) / D(t, t));
        clean = clean && D(t, j) == 0;
      }
      if (!clean) continue;
      // Enforce d_t | every entry of the trailing block.
      Eigen::Index bad = -1;
      for (Eigen::Index i = t + 1; i < rows && bad < 0; ++i)
        for (Eigen::Index j = t + 1; j < cols; ++j)
          if (D(i, j) % D(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      row_axpy(t, bad, -1);
    }
    if (D(t, t) < 0) {
      D.row(t) *= -1;
      s.U.row(t) *= -1;
    }
    s.diagonal.push_back(D(t, t));
  }
  return s;
}

std::int64_t AbelianGroup::torsion_order() const {
  std::int64_t order = 1;
  for (auto t : torsion) order *= t;
  return order;
}

std::string AbelianGroup::render() const {
  std::ostringstream out;
  bool first = true;
  if (free_rank > 0) {
    out << "Z^" << free_rank;
    first = false;
  }
  for (auto t : torsion) {
    out << (first ? "" : " + ") << "Z/" << t;
    first = false;
  }
  return first ? "0" : out.str();
}

AbelianGroup h1_nilmanifold(const Eigen::Matrix3d& B) {
  IntMatrix A(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double r = std::round(B(i, j));
      if (r != B(i, j) || std::fmod(r, 2.0) != 0.0) throw LatticeError("not a lattice-compatible B");
      A(i, j) = static_cast<std::int64_t>(r);
    }
  const SmithForm s = smith_normal_form(A);
  AbelianGroup g;
  g.free_rank = 4;
  for (auto d : s.diagonal) {
    if (d == 0)
      ++g.free_rank;
    else if (d > 1)
      g.torsion.push_back(d);
  }
  return g;
}

}  // namespace g2f
