#include "g2f/g2_core.hpp"

#include <cmath>

#include "g2f/error.hpp"

namespace g2f {

namespace {

Form m7(std::initializer_list<int> idx, double c = 1.0) { return Form::monomial(7, idx, c); }

void check7(const Vec& v) {
  if (v.size() != 7) throw StructuralError("expected a vector in R^7");
}

// Lower Cholesky factor L of g (g = L L^T); throws when g is not SPD.
Mat cholesky_lower(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw DomainError("metric is not positive definite");
  return llt.matrixL();
}

}  // namespace

Form standard_phi() {
  return m7({1, 2, 3}) + m7({1, 4, 5}) + m7({1, 6, 7}) + m7({2, 4, 6}) - m7({2, 5, 7}) -
         m7({3, 4, 7}) - m7({3, 5, 6});
}

Form standard_star_phi() {
  return m7({4, 5, 6, 7}) + m7({2, 3, 6, 7}) + m7({2, 3, 4, 5}) + m7({1, 3, 5, 7}) -
         m7({1, 3, 4, 6}) - m7({1, 2, 5, 6}) - m7({1, 2, 4, 7});
}

const StandardPieces& standard_pieces() {
  static const StandardPieces pieces = [] {
    StandardPieces p{
        {m7({4, 5}) + m7({6, 7}), m7({4, 6}) - m7({5, 7}), -(m7({4, 7}) + m7({5, 6}))},
        m7({1, 2, 3}),
        Form(7, 3),
        Form(7, 4),
        m7({4, 5, 6, 7})};
    const Form e[3] = {m7({1}), m7({2}), m7({3})};
    for (int i = 0; i < 3; ++i) p.omega += wedge(e[i], p.omega_i[i]);
    for (int k = 0; k < 3; ++k) {
      p.theta += wedge(wedge(e[k], e[(k + 1) % 3]), p.omega_i[(k + 2) % 3]);
    }
    return p;
  }();
  return pieces;
}

G2Structure G2Structure::standard() {
  return G2Structure{standard_phi(), Mat::Identity(7, 7), Form::volume(7), standard_star_phi(),
                     {"dx1", "dx2", "dx3", "dx4", "dx5", "dx6", "dx7"}};
}

G2Structure G2Structure::from_phi(const Form& phi) {
  Mat g = metric_from_phi(phi);
  return G2Structure{phi, g, volume_metric(g), hodge_metric(phi, g),
                     {"dx1", "dx2", "dx3", "dx4", "dx5", "dx6", "dx7"}};
}

Mat metric_from_phi(const Form& phi) {
  if (phi.dim() != 7 || phi.degree() != 3) throw StructuralError("metric_from_phi: need a 3-form on R^7");
  const std::uint32_t top = (1u << 7) - 1u;
  Form contractions[7] = {Form(7, 2), Form(7, 2), Form(7, 2), Form(7, 2),
                          Form(7, 2), Form(7, 2), Form(7, 2)};
  for (int i = 0; i < 7; ++i) contractions[i] = interior(Vec::Unit(7, i), phi);
  Mat B(7, 7);
  for (int i = 0; i < 7; ++i) {
    for (int j = i; j < 7; ++j) {
      B(i, j) = wedge(wedge(contractions[i], contractions[j]), phi).coeff_mask(top) / 6.0;
      B(j, i) = B(i, j);
    }
  }
  const double det = B.determinant();
  if (!(det > 0.0)) throw NotG2FormError("not a G2 form: det(B) <= 0");
  Mat g = B / std::pow(det, 1.0 / 9.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  if (es.eigenvalues().minCoeff() <= 0.0) throw NotG2FormError("not a G2 form: indefinite metric");
  return g;
}

Form hodge_metric(const Form& a, const Mat& g) {
  const Mat L = cholesky_lower(g);
  const Mat LinvT = L.inverse().transpose();
  return pullback(L.transpose(), hodge(pullback(LinvT, a)));
}

double inner_metric(const Form& a, const Form& b, const Mat& g) {
  const Mat LinvT = cholesky_lower(g).inverse().transpose();
  return inner(pullback(LinvT, a), pullback(LinvT, b));
}

Form volume_metric(const Mat& g) {
  return std::sqrt(g.determinant()) * Form::volume(static_cast<int>(g.rows()));
}

Vec cross(const Vec& u, const Vec& v, const G2Structure& G) {
  check7(u);
  check7(v);
  const Vec lowered = to_dense(interior(v, interior(u, G.phi)));
  return G.metric.ldlt().solve(lowered);
}

Vec chi(const Vec& u, const Vec& v, const Vec& w, const G2Structure& G) {
  check7(u);
  check7(v);
  check7(w);
  const Vec lowered = to_dense(interior(w, interior(v, interior(u, G.star_phi))));
  return G.metric.ldlt().solve(lowered);
}

Vec tau(const Vec& u, const Vec& v, const Vec& w, const Vec& x, const G2Structure& G) {
  auto phi3 = [&](const Vec& a, const Vec& b, const Vec& c) {
    Mat V(7, 3);
    V << a, b, c;
    return evaluate(G.phi, V);
  };
  return phi3(u, v, w) * x - phi3(u, v, x) * w + phi3(u, w, x) * v - phi3(v, w, x) * u;
}

double wedge_norm_sq(const Mat& vectors, const Mat& g) {
  return (vectors.transpose() * g * vectors).determinant();
}

double associator_residual(const Vec& u, const Vec& v, const Vec& w, const G2Structure& G) {
  Mat V(7, 3);
  V << u, v, w;
  const double p = evaluate(G.phi, V);
  const Vec c = chi(u, v, w, G);
  return p * p + c.dot(G.metric * c) - wedge_norm_sq(V, G.metric);
}

double coassociator_residual(const Vec& u, const Vec& v, const Vec& w, const Vec& x,
                             const G2Structure& G) {
  Mat V(7, 4);
  V << u, v, w, x;
  const double s = evaluate(G.star_phi, V);
  const Vec t = tau(u, v, w, x, G);
  return s * s + t.dot(G.metric * t) - wedge_norm_sq(V, G.metric);
}

Form lambda_k(const Vec& alpha, int k, const G2Structure& G) {
  check7(alpha);
  switch (k) {
    case 2:
      return (1.0 / std::sqrt(3.0)) * interior(G.metric.ldlt().solve(alpha), G.phi);
    case 4:
      return 0.5 * wedge(Form::one_form(alpha), G.phi);
    case 6:
      return hodge_metric(Form::one_form(alpha), G.metric);
    default:
      throw StructuralError("lambda_k: k must be 2, 4 or 6");
  }
}

namespace {

Vec lambda_adjoint(const Form& beta, int k, const G2Structure& G) {
  Vec c(7);
  for (int j = 0; j < 7; ++j) c(j) = inner_metric(beta, lambda_k(Vec::Unit(7, j), k, G), G.metric);
  return G.metric * c;
}

}  // namespace

Vec lambda2_adjoint(const Form& beta, const G2Structure& G) {
  if (beta.degree() != 2) throw StructuralError("lambda2_adjoint: need a 2-form");
  return lambda_adjoint(beta, 2, G);
}

Vec lambda4_adjoint(const Form& gamma, const G2Structure& G) {
  if (gamma.degree() != 4) throw StructuralError("lambda4_adjoint: need a 4-form");
  return lambda_adjoint(gamma, 4, G);
}

Form project_2_7(const Form& beta, const G2Structure& G) {
  return lambda_k(lambda2_adjoint(beta, G), 2, G);
}

Form project_2_14(const Form& beta, const G2Structure& G) { return beta - project_2_7(beta, G); }

}  // namespace g2f
