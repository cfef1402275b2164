#include "g2f/fueter.hpp"

#include <algorithm>
#include <cmath>

#include "g2f/error.hpp"
#include "g2f/random.hpp"

namespace g2f {

namespace {

constexpr double kRankTol = 1e-10;

Vec vertical_embed(const Eigen::RowVector4d& row) {
  Vec v = Vec::Zero(7);
  v.tail(4) = row.transpose();
  return v;
}

int numeric_rank(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > kRankTol * scale) ++r;
  return r;
}

}  // namespace

const JTriple& JTriple::standard() {
  static const JTriple t = [] {
    JTriple j;
    const auto& G = Splitting::standard().g2_in_frame();
    for (int i = 0; i < 3; ++i) {
      for (int a = 0; a < 4; ++a) {
        const Vec image = cross(Vec::Unit(7, i), Vec::Unit(7, 3 + a), G);
        j.J[i].col(a) = image.tail(4);
      }
    }
    return j;
  }();
  return t;
}

double JTriple::structure_residual() const {
  const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();
  double r = 0.0;
  for (int i = 0; i < 3; ++i) {
    r = std::max(r, (J[i] * J[i] + I).cwiseAbs().maxCoeff());
    for (int k = i + 1; k < 3; ++k) r = std::max(r, (J[i] * J[k] + J[k] * J[i]).cwiseAbs().maxCoeff());
  }
  return std::max(r, (J[0] * J[1] + J[2]).cwiseAbs().maxCoeff());
}

std::array<double, 6> ConditionReport::values() const {
  return {anisotropic_gap, fueter_norm, chi1_norm, theta_contraction_norm, beta_wedge_star_phi_norm,
          beta_wedge_theta_norm};
}

double ConditionReport::max() const {
  const auto v = values();
  return *std::max_element(v.begin(), v.end());
}

double ConditionReport::min() const {
  const auto v = values();
  return *std::min_element(v.begin(), v.end());
}

Vec4 fueter_vector(const GraphPlane& g, const Splitting& S) {
  const auto& G = S.g2_in_frame();
  Vec sum = Vec::Zero(7);
  for (int i = 0; i < 3; ++i) sum += cross(Vec::Unit(7, i), vertical_embed(g.T.row(i)), G);
  return sum.tail(4);
}

Vec4 fueter_via_J(const GraphPlane& g, const JTriple& J) {
  Vec4 sum = Vec4::Zero();
  for (int i = 0; i < 3; ++i) sum += J.J[i] * g.T.row(i).transpose();
  return sum;
}

Completion fueter_complete(const Vec& v1, const Vec& v2, const Splitting& S) {
  if (v1.size() != 7 || v2.size() != 7) throw StructuralError("fueter_complete: need vectors in R^7");
  const auto& G = S.g2_in_frame();
  const Vec x1 = S.to_frame_coords(Mat(v1));
  const Vec x2 = S.to_frame_coords(Mat(v2));
  Vec h1 = Vec::Zero(7);
  Vec h2 = Vec::Zero(7);
  h1.head(3) = x1.head(3);
  h2.head(3) = x2.head(3);
  const double ortho = std::max({std::abs(h1.squaredNorm() - 1.0), std::abs(h2.squaredNorm() - 1.0),
                                 std::abs(h1.dot(h2))});
  if (ortho > 1e-10) {
    throw PreconditionError("fueter_complete: horizontal parts must be orthonormal");
  }
  Vec p1 = Vec::Zero(7);
  Vec p2 = Vec::Zero(7);
  p1.tail(4) = x1.tail(4);
  p2.tail(4) = x2.tail(4);
  const Vec h3 = cross(h1, h2, G);
  // Solve h3 x w = -(h1 x p1 + h2 x p2) for w in V.
  const Vec rhs = -(cross(h1, p1, G) + cross(h2, p2, G));
  Eigen::Matrix4d M;
  for (int a = 0; a < 4; ++a) M.col(a) = cross(h3, Vec::Unit(7, 3 + a), G).tail(4);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(M);
  const auto& s = svd.singularValues();
  if (s(3) <= kRankTol) throw Error("fueter_complete: singular completion system");
  Completion c;
  Vec x3 = h3;
  x3.tail(4) = M.fullPivLu().solve(Vec4(rhs.tail(4)));
  c.v3 = S.frame() * x3;
  c.condition_number = s(0) / s(3);
  return c;
}

Vec associative_complete(const Vec& v1, const Vec& v2, const G2Structure& G) {
  Mat V(7, 2);
  V << v1, v2;
  if (std::sqrt(std::max(0.0, wedge_norm_sq(V, G.metric))) <= 1e-10 * std::max(1.0, v1.norm() * v2.norm())) {
    throw PreconditionError("associative_complete: vectors are dependent");
  }
  return cross(v1, v2, G);
}

GraphPlane sample_fueter_plane(std::uint64_t seed, std::uint64_t index, double scale) {
  auto rng = sample_rng(seed, index);
  Vec v1 = Vec::Unit(7, 0);
  Vec v2 = Vec::Unit(7, 1);
  v1.tail(4) = scale * gaussian_vector(rng, 4);
  v2.tail(4) = scale * gaussian_vector(rng, 4);
  Mat span(7, 3);
  span << v1, v2, fueter_complete(v1, v2).v3;
  return graph_from_plane(Plane(span)).graph;
}

ConditionReport condition_residuals(const GraphPlane& g, const Splitting& S) {
  ConditionReport r;
  r.T = g.T;
  const double ve1 = 0.5 * g.T.squaredNorm();
  r.anisotropic_gap = ve1 * 1.0 - omega_on(g, S);
  r.fueter_norm = fueter_vector(g, S).norm();
  r.chi1_norm = chi_pieces_on(g, S)[1].norm();
  const Form theta = decompose_form(S.g2_in_frame().star_phi, Splitting::standard())[2];
  Mat F4(7, 4);
  F4.leftCols(3) = g.frame();
  for (int k = 0; k < 7; ++k) {
    F4.col(3) = Vec::Unit(7, k);
    r.theta_contraction_norm = std::max(r.theta_contraction_norm, std::abs(evaluate(theta, F4)));
  }
  const Form beta = beta_of(g);
  r.beta_wedge_star_phi_norm = wedge(beta, S.g2_in_frame().star_phi).norm();
  r.beta_wedge_theta_norm = wedge(beta, theta).norm();
  return r;
}

ChiViaBeta chi_via_beta(const GraphPlane& g, const Splitting& S) {
  const auto& G = S.g2_in_frame();
  const Form beta = beta_of(g);
  const Form beta2 = wedge(beta, beta);
  ChiViaBeta c;
  c.chi1 = to_dense(hodge(wedge(beta, G.star_phi)));
  c.chi1_lambda = std::sqrt(3.0) * lambda2_adjoint(project_2_7(beta, G), G);
  c.chi2 = -2.0 * lambda4_adjoint(0.5 * beta2, G);
  c.chi3 = -to_dense(hodge((1.0 / 6.0) * wedge(beta2, beta)));
  return c;
}

Vec chi1_from_theta(const GraphPlane& g, const Splitting& S) {
  const Form theta = decompose_form(S.g2_in_frame().star_phi, Splitting::standard())[2];
  Mat F4(7, 4);
  F4.rightCols(3) = g.frame();
  Vec out = Vec::Zero(7);
  for (int a = 3; a < 7; ++a) {
    F4.col(0) = Vec::Unit(7, a);
    out(a) = -evaluate(theta, F4);
  }
  return out;
}

VanishingProfile k_vanishing_profile(const GraphPlane& g, double tol, const Splitting& S) {
  const auto chis = chi_pieces_on(g, S);
  const auto alpha = phi_pieces_on(g, S);
  const auto ve = ve_series(g, 3);
  const double scale = std::max(1.0, std::pow(1.0 + g.T.squaredNorm(), 1.5));
  VanishingProfile p;
  for (int i = 0; i < 3; ++i) p.chi_norms[i] = chis[i + 1].norm();
  while (p.depth < 3 && p.chi_norms[p.depth] / scale < tol) ++p.depth;
  for (int l = 1; l <= p.depth; ++l) {
    const double a = (2 * l <= 3) ? alpha[2 * l] : 0.0;
    p.residuals.push_back(a - ve[l]);
  }
  p.one_iff_two = (p.chi_norms[0] / scale < tol) == (p.chi_norms[1] / scale < tol);
  return p;
}

int linearization_rank(const GraphPlane& g, const Splitting& S) {
  if (fueter_vector(g, S).norm() >= 1e-10) {
    throw PreconditionError("linearization_rank: plane is not Fueter");
  }
  Mat D(4, 12);
  for (int i = 0; i < 3; ++i) {
    for (int a = 0; a < 4; ++a) {
      GraphPlane unit;
      unit.T(i, a) = 1.0;
      // F is linear in T, so its differential is the same at every plane.
      D.col(4 * i + a) = fueter_vector(unit, S);
    }
  }
  return numeric_rank(D);
}

int polar_space_dim(const Mat& W, PolarSystem system, const Splitting& S) {
  if (W.rows() != 7) throw StructuralError("polar_space_dim: vectors must live in R^7");
  const int s = static_cast<int>(W.cols());
  if (s >= 3) throw UnsupportedError("polar_space_dim: s = 3 is not supported by these systems");
  if (s > 0 && numeric_rank(W) < s) throw PreconditionError("polar_space_dim: W is degenerate");
  const Mat X = S.to_frame_coords(W);
  if (system == PolarSystem::fueter && s > 0 && numeric_rank(Mat(X.topRows(3))) < s) {
    throw PreconditionError("polar_space_dim: W is not horizontally projectable");
  }
  // The generators have degree 3: for s + 1 < 3 there are no constraints.
  if (s < 2) return 7;
  Mat M(7, 7);
  Mat F(7, 3);
  F.leftCols(2) = X;
  for (int j = 0; j < 7; ++j) {
    F.col(2) = Vec::Unit(7, j);
    M.col(j) = (system == PolarSystem::associative) ? S.chi_form().evaluate(F)
                                                    : S.chi_pieces()[1].evaluate(F);
  }
  return 7 - numeric_rank(M);
}

RegularityReport polar_regularity(const Mat& W, PolarSystem system, std::size_t n, double delta,
                                  std::uint64_t seed, const Splitting& S) {
  RegularityReport r;
  r.dimension = polar_space_dim(W, system, S);
  r.samples = n;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = sample_rng(seed, i);
    const Mat Wp = W + delta * gaussian_matrix(rng, 7, static_cast<int>(W.cols()));
    if (polar_space_dim(Wp, system, S) == r.dimension) ++r.constant;
  }
  return r;
}

}  // namespace g2f
