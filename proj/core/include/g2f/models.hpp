#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "g2f/g2_core.hpp"

namespace g2f {

/// c[i][j][k] = c_{ij}^k with [e_i, e_j] = sum_k c_{ij}^k e_k (0-based).
using StructureConstants = std::array<std::array<std::array<double, 7>, 7>, 7>;

/// A 7-dimensional Lie algebra with the standard G2 coframe (e1, e2, e3,
/// eta4..eta7) taken left-invariant and H = span(e1,e2,e3), V = span(eta4..eta7).
///
/// Structure equations follow de^i = sum_j B_ij omega_j for the Heisenberg
/// family. Some references use the opposite overall sign for the structure
/// equations; only the sign of the reported differentials changes, never a
/// closedness flag.
struct LieAlgebraModel {
  std::string name;
  StructureConstants c{};
  std::array<std::string, 7> frame_labels{"e1", "e2", "e3", "eta4", "eta5", "eta6", "eta7"};

  /// Sets c_{ij}^k and c_{ji}^k = -c_{ij}^k (1-based indices).
  void set_bracket(int i, int j, int k, double value);
  double max_antisymmetry_violation() const;
};

/// Chevalley-Eilenberg differential: de^k = -sum_{i<j} c_{ij}^k e^{ij},
/// extended as a graded derivation.
Form ce_differential(const Form& a, const LieAlgebraModel& m);

/// max |sum_cyclic [[e_i, e_j], e_k]| over all triples.
double jacobi_check(const StructureConstants& c);

struct ClosednessFlags {
  Form d_lambda{7, 4};
  Form d_omega{7, 4};
  Form d_theta{7, 5};
  Form d_mu{7, 5};
  Form d_phi{7, 4};
  Form d_star_phi{7, 5};

  static constexpr double kTol = 1e-12;
  bool lambda_closed() const { return d_lambda.is_zero(kTol); }
  bool omega_closed() const { return d_omega.is_zero(kTol); }
  bool theta_closed() const { return d_theta.is_zero(kTol); }
  bool mu_closed() const { return d_mu.is_zero(kTol); }
  bool phi_closed() const { return d_phi.is_zero(kTol); }
  bool star_phi_closed() const { return d_star_phi.is_zero(kTol); }
};

ClosednessFlags closedness_flags(const LieAlgebraModel& m);

/// T^3 x T^4 with the flat metric: the abelian algebra.
LieAlgebraModel model_product_flat();
/// su(2) acting on R^4 = H by left multiplication, with [e1,e2] = 2e3 cyclic.
LieAlgebraModel model_su2_semidirect();
/// Quaternionic Heisenberg algebra with de^i = sum_j B_ij omega_j, d eta^a = 0.
LieAlgebraModel model_heisenberg(const Eigen::Matrix3d& B);

/// Hyperkaehler triple of the flat T^4 factor: omega_3^HK = eta47 + eta56 = -omega_3,
/// so that omega = e1^omega_1 + e2^omega_2 - e3^omega_3^HK.
std::array<Form, 3> product_flat_hk_triple();

/// Catalog lookup: "product-flat", "su2-semidirect", "heisenberg:B=[[..],[..],[..]]".
LieAlgebraModel model_by_name(const std::string& spec);
/// Parses "[[a,b,c],[d,e,f],[g,h,i]]" or "a,b,c;d,e,f;g,h,i".
Eigen::Matrix3d parse_matrix3(const std::string& text);

/// Pieces of d(a) by bidegree (H-degree, V-degree) relative to a of type (p,q):
/// F_H (p+2,q-1), d_H (p+1,q), d_V (p,q+1), F_V (p-1,q+2).
/// Mixed-type input is split per type and the parts are summed.
struct TypeSplit {
  Form F_H;
  Form d_H;
  Form d_V;
  Form F_V;
  Form sum() const { return F_H + d_H + d_V + F_V; }
};
TypeSplit derivative_type_split(const Form& a, const LieAlgebraModel& m);

/// max |p_H([eta_a, eta_b])|; zero iff V is involutive.
double vertical_involutivity_defect(const LieAlgebraModel& m);

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// U A V = D with U, V unimodular and D diagonal, d_1 | d_2 | ..., d_i >= 0.
struct SmithForm {
  IntMatrix U;
  IntMatrix V;
  IntMatrix D;
  std::vector<std::int64_t> diagonal;
};
SmithForm smith_normal_form(const IntMatrix& A);

/// Z^free_rank plus the cyclic factors Z/t for t in torsion (all t > 1).
struct AbelianGroup {
  int free_rank = 0;
  std::vector<std::int64_t> torsion;
  std::int64_t torsion_order() const;
  std::string render() const;
};

/// H_1(M_B; Z) = Z^4 + Z^3 / B Z^3. Throws LatticeError for odd or
/// non-integer entries.
AbelianGroup h1_nilmanifold(const Eigen::Matrix3d& B);

}  // namespace g2f
