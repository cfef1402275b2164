#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "g2f/fueter.hpp"
#include "g2f/models.hpp"

namespace g2f {

/// Value and partial derivatives up to order 3 of a map R^N -> R^4.
/// d2[c](i,j) = d_i d_j u^c, d3[c][i](j,k) = d_i d_j d_k u^c.
template <int N>
struct Jet {
  Vec4 value = Vec4::Zero();
  Eigen::Matrix<double, 4, N> d1 = Eigen::Matrix<double, 4, N>::Zero();
  std::array<Eigen::Matrix<double, N, N>, 4> d2{};
  std::array<std::array<Eigen::Matrix<double, N, N>, N>, 4> d3{};
  int order = 3;  // highest derivative order filled in

  Jet() {
    for (auto& m : d2) m.setZero();
    for (auto& a : d3)
      for (auto& m : a) m.setZero();
  }
};
using Jet3 = Jet<3>;
using Jet4 = Jet<4>;
using Vec3 = Eigen::Vector3d;
using Mat43 = Eigen::Matrix<double, 4, 3>;

/// A smooth map R^3 -> R^4 with exact jets.
struct AnalyticMap {
  std::function<Jet3(const Vec3&)> jet;
  int order = 3;
  /// u(x + n) - u(x) = A n for integer n, when declared.
  std::optional<Mat43> period;
  std::string label;

  Vec4 eval(const Vec3& x) const { return jet(x).value; }
  Mat43 jet1(const Vec3& x) const { return jet(x).d1; }
};

/// A smooth map R^4 -> R^4 whose restriction to the unit sphere is a
/// function on SU(2).
struct AmbientMap {
  std::function<Jet4(const Eigen::Vector4d&)> jet;
  int order = 3;
  std::string label;
};

/// Polynomial map with Vec4 coefficients on monomials x^e.
struct PolynomialMap {
  struct Term {
    std::array<int, 4> exponent{};
    Vec4 coeff = Vec4::Zero();
  };
  int vars = 3;
  std::vector<Term> terms;

  template <int N>
  Jet<N> evaluate(const Eigen::Matrix<double, N, 1>& x) const;

  static PolynomialMap random(std::mt19937_64& rng, int vars, int degree);
};

AnalyticMap to_map(const PolynomialMap& p, const std::string& label = "polynomial");
AmbientMap to_ambient(const PolynomialMap& p, const std::string& label = "polynomial");

/// u(x) = a1 x1 + a2 x2 + a3 x3 + b.
AnalyticMap affine_map(const Mat43& A, const Vec4& b = Vec4::Zero());
/// Integer affine Fueter section with a1 = -J3 a2 + J2 a3; period matrix [a1 a2 a3].
AnalyticMap affine_fueter_section(const Vec4& a2, const Vec4& a3, const Vec4& b = Vec4::Zero());
/// F = v0 / (4 pi |x|), harmonic on R^3 minus the origin.
AnalyticMap newtonian_potential(const Vec4& v0);
/// x -> u(x) + amplitude * p(x); periodic when both summands are.
AnalyticMap add_maps(const AnalyticMap& u, const AnalyticMap& p, double amplitude = 1.0);

/// D u = J1 d1 u + J2 d2 u + J3 d3 u.
Vec4 fueter_operator_flat(const AnalyticMap& u, const Vec3& x);
Vec4 fueter_operator_flat(const Jet3& j);
/// The map D F (one derivative order is consumed).
AnalyticMap apply_flat_D(const AnalyticMap& F);
/// D(DF) + Delta F; needs second-order jets.
Vec4 d_squared_residual(const AnalyticMap& F, const Vec3& x);
/// D F for componentwise harmonic F. Checks Delta F = 0 at the given probe
/// points and throws PreconditionError naming max |Delta F| otherwise.
AnalyticMap harmonic_to_fueter(const AnalyticMap& F, const std::vector<Vec3>& probes);
Vec4 flat_laplacian(const Jet3& j);

/// Fueter operator of a graph section on a catalog model. The flat operator
/// applies on product-flat and every Heisenberg model; other models throw.
Vec4 graph_fueter_residual(const LieAlgebraModel& m, const AnalyticMap& u, const Vec3& x);

// ---- SU(2) ----

/// Unit quaternion q <-> h = [[q0 + i q1, q2 + i q3], [-q2 + i q3, q0 - i q1]].
/// L[i] q are the coordinates of h e_i, with e1 = [[0,1],[-1,0]],
/// e2 = [[0,i],[i,0]], e3 = [[i,0],[0,-i]].
const std::array<Eigen::Matrix4d, 3>& su2_left_fields();
/// Coordinates of the product of two quaternion points.
Eigen::Vector4d su2_multiply(const Eigen::Vector4d& g, const Eigen::Vector4d& h);
/// h exp(t e_i) = h (cos t + sin t e_i).
Eigen::Vector4d su2_flow(const Eigen::Vector4d& h, int i, double t);

/// Left-invariant derivatives: d1.col(i) = e_i f, d2[i][j] = e_i(e_j f).
struct SU2Jet {
  Vec4 value = Vec4::Zero();
  Mat43 d1 = Mat43::Zero();
  std::array<std::array<Vec4, 3>, 3> d2{};
};
SU2Jet su2_jet(const AmbientMap& f, const Eigen::Vector4d& h);

Vec4 su2_fueter_operator(const SU2Jet& j);
Vec4 su2_fueter_operator(const AmbientMap& u, const Eigen::Vector4d& h);
/// Delta = e1^2 + e2^2 + e3^2 (same sign convention as the flat D^2 = -Delta).
Vec4 su2_laplacian(const SU2Jet& j);
/// D^2 F + Delta F + 2 D F.
Vec4 su2_identity_residual(const AmbientMap& F, const Eigen::Vector4d& h);
/// D u for u = (D + 2) F, from second-order jets of F.
Vec4 su2_shifted_fueter_residual(const AmbientMap& F, const Eigen::Vector4d& h);
/// f_p = A cot(r_p(h)) + B = A s / sqrt(1 - s^2) + B with s = <p, h>, times v0.
/// Throws DomainError within 1e-3 of +-p.
AmbientMap su2_cot_potential(const Eigen::Vector4d& p, double A, double B, const Vec4& v0);
/// f(g h) as an ambient map.
AmbientMap su2_left_translate(const AmbientMap& f, const Eigen::Vector4d& g);

// ---- Immersions and energies on T^3 x T^4 ----

/// Point and tangent frame of an immersion [0,1)^3 -> R^7.
struct ImmersionJet {
  Vec value = Vec::Zero(7);
  Eigen::Matrix<double, 7, 3> d1 = Eigen::Matrix<double, 7, 3>::Zero();
};
using Immersion = std::function<ImmersionJet(const Vec3&)>;

/// iota(x) = (x, u(x)).
Immersion graph_immersion(const AnalyticMap& u);
/// iota o f for a base map f: R^3 -> R^3 given with its Jacobian.
using BaseMap = std::function<std::pair<Vec3, Eigen::Matrix3d>(const Vec3&)>;
Immersion compose(const Immersion& iota, const BaseMap& f);
BaseMap shear_map(double amplitude);
BaseMap translation_map(const Vec3& shift);
BaseMap scaling_map(int c);

/// Regular N^3 grid on [0,1)^3 with equal weights (trapezoid rule).
struct ImmersionGrid {
  int n = 16;
  std::vector<Vec3> points() const;
  double weight() const { return 1.0 / (static_cast<double>(n) * n * n); }
};

struct EnergyReport {
  double vol_h = 0.0;
  double vol = 0.0;
  double ve = 0.0;   // integral of ve_1 vol^H
  double ve2 = 0.0;
  double ve3 = 0.0;
  double total_energy = 0.0;  // (3/2) Vol^H + VE
  double dirichlet = 0.0;     // (1/2) integral |d iota|^2 for graph sections
  double max_pointwise_identity_residual = 0.0;
  double max_fueter_residual = 0.0;
};

/// Quadrature of the energy densities. Throws NotProjectableError naming the
/// grid point when the horizontal part of the frame degenerates.
EnergyReport immersion_energies(const Immersion& iota, const ImmersionGrid& grid, unsigned threads = 0);

/// Number of grid points mapped to the origin by x -> c x mod 1 (per axis
/// the base map covers the torus |c| times).
long long base_map_degree(int c, int n);

/// Seeded truncated Fourier fields sum_m a_m cos(2 pi k_m x) + b_m sin(2 pi k_m x)
/// with |k_m|_inf <= kmax, rescaled to grid sup-norm 1.
AnalyticMap trig_perturbation(std::uint64_t seed, std::uint64_t index, int modes = 4, int kmax = 2,
                              int grid_n = 16);

struct MinimizationReport {
  std::size_t samples = 0;
  std::size_t skipped = 0;
  std::size_t ve_violations = 0;
  std::size_t total_violations = 0;
  double amplitude = 0.0;
  double base_ve = 0.0;
  double base_total = 0.0;
  double base_fueter_residual = 0.0;
  double min_ve_gap = 0.0;     // min over samples of VE(pert) - VE(base)
  double min_total_gap = 0.0;  // same for VE + Vol^H
  double tolerance = 1e-12;
  std::string restriction = "finite trigonometric perturbation family, not the full homology class";
};

/// Compares VE and VE + Vol^H of base against base + amplitude * p_i for
/// n seeded perturbations p_i. The base Fueter residual is reported, not
/// enforced, so the sanity inversion can run on a non-Fueter base.
MinimizationReport minimization_experiment(const AnalyticMap& base, std::size_t n, double amplitude,
                                           std::uint64_t seed, const ImmersionGrid& grid = {},
                                           unsigned threads = 0);

/// |VE(iota o f) - VE(iota)| on the grid.
double reparametrization_residual(const Immersion& iota, const BaseMap& f, const ImmersionGrid& grid);

// ---- Chern-Simons type functional ----

struct CSVariation {
  double numeric = 0.0;   // d/ds CS(u0 -> u1 + s Z) at s = 0
  double boundary = 0.0;  // integral of Theta(Z, d1 iota, d2 iota, d3 iota)
};

/// CS along the straight path from the graph of u0 to the graph of u1:
/// the integral over [0,1] x T^3 of Theta(dt I, d1 I, d2 I, d3 I).
/// Both endpoints must declare the same period matrix (PreconditionError).
double cs_functional(const AnalyticMap& u0, const AnalyticMap& u1, const ImmersionGrid& grid,
                     const LieAlgebraModel& m = model_product_flat());
/// First variation of CS at the endpoint u1 in the vertical direction Z.
/// PreconditionError when d Theta != 0 on the model; UnsupportedError for
/// non-abelian models with d Theta = 0.
CSVariation cs_first_variation(const AnalyticMap& u0, const AnalyticMap& u1, const AnalyticMap& Z,
                               const ImmersionGrid& grid, double h = 1e-2,
                               const LieAlgebraModel& m = model_product_flat());
/// Constant Z equal to the grid mean of Theta(eta_a, d1 iota, d2 iota, d3 iota)
/// at the endpoint, so the first variation is the squared norm of that mean.
AnalyticMap cs_adversarial_variation(const AnalyticMap& u1, const ImmersionGrid& grid);

}  // namespace g2f
