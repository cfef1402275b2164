#include "g2f/fm_gauge.hpp"

#include <cmath>

#include "g2f/error.hpp"

namespace g2f {

LineConnection fm_transform(const AnalyticMap& u) { return LineConnection{u}; }

Form curvature_from_jet(const Mat43& d1) {
  Form K(7, 2);
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 4; ++a)
      if (d1(a, i) != 0.0) K.add((1u << i) | (1u << (3 + a)), d1(a, i));
  return K;
}

Form curvature(const LineConnection& c, const Vec3& x) { return curvature_from_jet(c.u.jet1(x)); }

Form psi_pullback(const Form& a) {
  Mat P = Mat::Identity(7, 7);
  for (int k = 3; k < 7; ++k) P(k, k) = 1.0 / kFiberPeriod;
  return pullback(P, a);
}

double beta_relation_residual(const AnalyticMap& u, const Vec3& x) {
  const Mat43 d1 = u.jet1(x);
  GraphPlane g;
  g.T = d1.transpose();
  const Form lhs = beta_of(g);
  const Form rhs = kFiberPeriod * psi_pullback(curvature_from_jet(d1));
  return (lhs - rhs).max_abs();
}

Form instanton_form(const Form& K) { return wedge(K, G2Structure::standard().star_phi); }

double instanton_residual(const LineConnection& c, const Vec3& x) { return instanton_form(curvature(c, x)).norm(); }

DdtResidual ddt_residual(const LineConnection& c, const Vec3& x, double r) {
  if (!(r > 0.0)) throw DomainError("ddt_residual: radius must be positive");
  const Form K = curvature(c, x);
  const Form inst = instanton_form(K);
  const Form cube = (1.0 / 6.0) * wedge(wedge(K, K), K);
  const double r4 = r * r * r * r;
  // F^3 = -i K^3, so (1/6) F^3 + r^4 F ^ *phi = i (r^4 K ^ *phi - K^3 / 6).
  const Form res = r4 * inst - cube;
  DdtResidual d;
  d.raw = res.norm();
  d.normalized = d.raw / r4;
  d.instanton = inst.norm();
  d.gap = ((1.0 / r4) * res - inst).norm();
  return d;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw StructuralError("loglog_slope: need matching samples");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

RadiusSweep radius_sweep(const LineConnection& c, const Vec3& x, double r_min, double r_max, int points) {
  if (!(r_min > 0.0) || !(r_max > r_min) || points < 2) throw DomainError("radius_sweep: bad radius range");
  RadiusSweep s;
  std::vector<double> gaps;
  for (int k = 0; k < points; ++k) {
    const double r = r_min * std::pow(r_max / r_min, static_cast<double>(k) / (points - 1));
    s.radii.push_back(r);
    s.rows.push_back(ddt_residual(c, x, r));
    gaps.push_back(s.rows.back().gap);
  }
  s.slope = loglog_slope(s.radii, gaps);
  return s;
}

}  // namespace g2f
