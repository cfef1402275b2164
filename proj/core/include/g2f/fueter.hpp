#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "g2f/splitting.hpp"

namespace g2f {

using Vec4 = Eigen::Vector4d;

/// Complex structures J_i = e_i x (.) on V in the eta4..eta7 basis.
struct JTriple {
  std::array<Eigen::Matrix4d, 3> J;

  static const JTriple& standard();
  /// Max deviation from J_i^2 = -1, J_1 J_2 = -J_3 and anticommutation.
  double structure_residual() const;
};

/// Residuals of the six equivalent Fueter conditions on a graph plane.
struct ConditionReport {
  double anisotropic_gap = 0.0;           // ve_1 vol^H(v) - omega(v)
  double fueter_norm = 0.0;               // |F(pi)|
  double chi1_norm = 0.0;                 // |chi_1(v)|
  double theta_contraction_norm = 0.0;    // sup_k |Theta(v1, v2, v3, e_k)|
  double beta_wedge_star_phi_norm = 0.0;  // |beta ^ *phi|
  double beta_wedge_theta_norm = 0.0;     // |beta ^ Theta|
  TMatrix T = TMatrix::Zero();

  std::array<double, 6> values() const;
  double max() const;
  double min() const;
};

/// F(pi) = sum_i p_H(v_i) x p_V(v_i) in V coordinates (cross-product route).
Vec4 fueter_vector(const GraphPlane& g, const Splitting& S = Splitting::standard());
/// F(pi) = sum_i J_i(p_V(v_i)) (matrix route).
Vec4 fueter_via_J(const GraphPlane& g, const JTriple& J = JTriple::standard());

struct Completion {
  Vec v3;  // ambient coordinates
  double condition_number = 0.0;
};

/// The unique projectable v3 with p_H(v3) = p_H(v1) x p_H(v2) making the
/// plane Fueter. Requires orthonormal horizontal parts.
Completion fueter_complete(const Vec& v1, const Vec& v2, const Splitting& S = Splitting::standard());
/// v1 x v2; the span of (v1, v2, v1 x v2) is associative.
Vec associative_complete(const Vec& v1, const Vec& v2, const G2Structure& G = G2Structure::standard());

/// Seeded Fueter plane: v1 = e1 + p1, v2 = e2 + p2 with Gaussian vertical
/// parts, completed by fueter_complete.
GraphPlane sample_fueter_plane(std::uint64_t seed, std::uint64_t index, double scale = 1.0);

ConditionReport condition_residuals(const GraphPlane& g, const Splitting& S = Splitting::standard());

/// chi_1, chi_2, chi_3 on the plane from beta alone (1-form coordinates).
struct ChiViaBeta {
  Vec chi1;          // *(beta ^ *phi)
  Vec chi1_lambda;   // sqrt(3) (lambda^2)^T pi_7(beta)
  Vec chi2;          // -2 (lambda^4)^T (beta^2 / 2)
  Vec chi3;          // -*(beta^3 / 6)
};
ChiViaBeta chi_via_beta(const GraphPlane& g, const Splitting& S = Splitting::standard());
/// chi_1 = -sum_a eta_a (x) i(eta_a) Theta evaluated on the plane.
Vec chi1_from_theta(const GraphPlane& g, const Splitting& S = Splitting::standard());

struct VanishingProfile {
  int depth = 0;
  std::array<double, 3> chi_norms{};
  /// alpha_{2l}(v) - ve_l for l = 1..depth.
  std::vector<double> residuals;
  /// 1-vanishing and 2-vanishing agree.
  bool one_iff_two = true;
};
VanishingProfile k_vanishing_profile(const GraphPlane& g, double tol = 1e-10,
                                     const Splitting& S = Splitting::standard());

/// Rank of T -> F(T) over the 12-dimensional T-space at a Fueter plane.
int linearization_rank(const GraphPlane& g, const Splitting& S = Splitting::standard());

enum class PolarSystem { associative, fueter };

/// Dimension of {X : chi(v_1..v_s, X) = 0} (or chi_1 for the Fueter system)
/// for the columns of W (s = 0, 1, 2; s = 3 is unsupported).
int polar_space_dim(const Mat& W, PolarSystem system, const Splitting& S = Splitting::standard());

struct RegularityReport {
  std::size_t samples = 0;
  std::size_t constant = 0;  // perturbations with the same polar dimension
  int dimension = 0;
};
/// Polar dimension at W and at seeded perturbations W + delta * noise.
RegularityReport polar_regularity(const Mat& W, PolarSystem system, std::size_t n, double delta,
                                  std::uint64_t seed, const Splitting& S = Splitting::standard());

}  // namespace g2f
