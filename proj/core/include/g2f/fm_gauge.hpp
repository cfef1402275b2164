#pragma once

#include <numbers>
#include <vector>

#include "g2f/pde.hpp"

namespace g2f {

/// Fiber period of T^4 in the y coordinates. The mirror fiber uses
/// z = y / (2 pi); every 2 pi factor of the transform goes through here.
inline constexpr double kFiberPeriod = 2.0 * std::numbers::pi;

/// Measured once and pinned: |K ^ *phi| = kMirrorResidualRatio * |D u|
/// (the star is an isometry and chi_1 = *(beta ^ *phi) has norm |D u|).
inline constexpr double kMirrorResidualRatio = 1.0;

/// Connection d + i sum_a u^a(x) dy^a on B x (T^4)^*, stored through u. The
/// curvature is F = i K with the real 2-form K = sum d_i u^a dx^i ^ dy^a;
/// coordinates (x1, x2, x3, y4, ..., y7) on R^7.
struct LineConnection {
  AnalyticMap u;
};

LineConnection fm_transform(const AnalyticMap& u);
/// Real part K of the curvature (F = sqrt(-1) K).
Form curvature(const LineConnection& c, const Vec3& x);
Form curvature_from_jet(const Mat43& d1);

/// Psi^*: dy^a -> dz^a / kFiberPeriod, the identity on dx^i.
Form psi_pullback(const Form& a);
/// max |beta_iota - kFiberPeriod * Psi^* K| over monomials at x.
double beta_relation_residual(const AnalyticMap& u, const Vec3& x);

/// |K ^ *phi| for the standard G2 form in (x, y) coordinates.
double instanton_residual(const LineConnection& c, const Vec3& x);
Form instanton_form(const Form& K);

struct DdtResidual {
  double raw = 0.0;         // |r^4 K ^ *phi - K^3 / 6|
  double normalized = 0.0;  // raw / r^4
  double instanton = 0.0;   // |K ^ *phi|
  double gap = 0.0;         // |(r^4 K ^ *phi - K^3/6) / r^4 - K ^ *phi| = |K^3| / (6 r^4)
};
/// Residual of (1/6) F^3 + r^4 F ^ *phi = 0 (a 6-form). DomainError for r <= 0.
DdtResidual ddt_residual(const LineConnection& c, const Vec3& x, double r);

struct RadiusSweep {
  std::vector<double> radii;
  std::vector<DdtResidual> rows;
  double slope = 0.0;  // least-squares slope of log gap against log r
};
/// Log-spaced sweep r in [r_min, r_max].
RadiusSweep radius_sweep(const LineConnection& c, const Vec3& x, double r_min, double r_max, int points);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace g2f
