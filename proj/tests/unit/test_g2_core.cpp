#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "g2f/error.hpp"
#include "g2f/g2_core.hpp"
#include "g2f/random.hpp"
#include "oracles.hpp"

using namespace g2f;

namespace {

Form dx(std::initializer_list<int> idx, double c = 1.0) { return Form::monomial(7, idx, c); }
Vec e(int i) { return Vec::Unit(7, i - 1); }

std::map<std::string, std::string> read_fixtures() {
  std::ifstream in(std::string(G2F_TEST_DATA_DIR) + "/g2_fixtures.txt");
  REQUIRE(in.good());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

}  // namespace

TEST_CASE("golden fixture file matches the canonical rendering") {
  const auto fx = read_fixtures();
  const auto& P = standard_pieces();
  CHECK(fx.at("phi0") == render(standard_phi()));
  CHECK(fx.at("star_phi0") == render(standard_star_phi()));
  CHECK(fx.at("omega1") == render(P.omega_i[0]));
  CHECK(fx.at("omega2") == render(P.omega_i[1]));
  CHECK(fx.at("omega3") == render(P.omega_i[2]));
  CHECK(fx.at("lambda") == render(P.lambda));
  CHECK(fx.at("omega") == render(P.omega));
  CHECK(fx.at("Theta") == render(P.theta));
  CHECK(fx.at("mu") == render(P.mu));
}

TEST_CASE("standard pieces recombine into phi0 and star phi0") {
  const auto& P = standard_pieces();
  CHECK(approx_equal(P.lambda + P.omega, standard_phi(), 0.0));
  CHECK(approx_equal(P.theta + P.mu, standard_star_phi(), 0.0));
  CHECK(approx_equal(hodge(standard_phi()), standard_star_phi(), 0.0));
}

TEST_CASE("metric from phi") {
  CHECK((metric_from_phi(standard_phi()) - Mat::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);
  const double eps = 0.25;
  Mat D = Mat::Identity(7, 7);
  for (int a = 3; a < 7; ++a) D(a, a) = std::sqrt(eps);
  Mat expected = Mat::Identity(7, 7);
  for (int a = 3; a < 7; ++a) expected(a, a) = eps;
  CHECK((metric_from_phi(pullback(D, standard_phi())) - expected).cwiseAbs().maxCoeff() < 1e-12);
  const double c = 2.0;
  CHECK((metric_from_phi(std::pow(c, 3) * standard_phi()) - c * c * Mat::Identity(7, 7))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK_THROWS_AS(metric_from_phi(dx({1, 2, 3})), NotG2FormError);
  CHECK_THROWS_AS(metric_from_phi(Form(7, 2)), StructuralError);
}

TEST_CASE("metric from phi is equivariant under random GL(7)") {
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto rng = sample_rng(11, i);
    Mat A = Mat::Identity(7, 7) + 0.3 * gaussian_matrix(rng, 7, 7);
    if (A.determinant() < 0) A.col(0) *= -1.0;
    const Mat g = metric_from_phi(pullback(A, standard_phi()));
    CHECK((g - A.transpose() * A).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("G2Structure invariants for a transported structure") {
  auto rng = sample_rng(12, 0);
  Mat A = Mat::Identity(7, 7) + 0.2 * gaussian_matrix(rng, 7, 7);
  if (A.determinant() < 0) A.col(0) *= -1.0;
  const auto G = G2Structure::from_phi(pullback(A, standard_phi()));
  CHECK(inner_metric(G.phi, G.phi, G.metric) == doctest::Approx(7.0).epsilon(1e-10));
  CHECK(inner_metric(G.star_phi, G.star_phi, G.metric) == doctest::Approx(7.0).epsilon(1e-10));
  CHECK((G.vol - pullback(A, Form::volume(7))).max_abs() < 1e-10);
  CHECK((G.star_phi - pullback(A, standard_star_phi())).max_abs() < 1e-10);
}

TEST_CASE("cross product fixtures") {
  const auto G = G2Structure::standard();
  CHECK((cross(e(1), e(2), G) - e(3)).norm() == 0.0);
  CHECK((cross(e(1), e(4), G) - e(5)).norm() == 0.0);
  CHECK((cross(e(2), e(5), G) + e(7)).norm() == 0.0);
}

TEST_CASE("random property: cross product identities") {
  const auto G = G2Structure::standard();
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto rng = sample_rng(13, i);
    Vec u = gaussian_vector(rng, 7);
    const Vec v = gaussian_vector(rng, 7);
    const Vec w = gaussian_vector(rng, 7);
    const Vec uv = cross(u, v, G);
    Mat V(7, 3);
    V << u, v, w;
    CHECK(uv.dot(w) == doctest::Approx(evaluate(G.phi, V)).epsilon(1e-12));
    CHECK((uv + cross(v, u, G)).norm() < 1e-12);
    CHECK(std::abs(uv.dot(u)) < 1e-12);
    u.normalize();
    const Vec lhs = cross(u, cross(u, v, G), G);
    CHECK((lhs - (-v + u.dot(v) * u)).norm() < 1e-10);
  }
}

TEST_CASE("chi fixtures") {
  const auto G = G2Structure::standard();
  CHECK(chi(e(1), e(2), e(3), G).norm() == 0.0);
  // *phi0 has +dx4567, and chi(e4,e5,e6) pairs with e7 through it.
  CHECK((chi(e(4), e(5), e(6), G) - standard_star_phi().coeff({4, 5, 6, 7}) * e(7)).norm() == 0.0);
}

TEST_CASE("random property: chi vanishes on the associative completion") {
  const auto G = G2Structure::standard();
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto rng = sample_rng(14, i);
    const Vec u = gaussian_vector(rng, 7);
    const Vec v = gaussian_vector(rng, 7);
    CHECK(chi(u, v, cross(u, v, G), G).norm() < 1e-10);
    const Vec w = gaussian_vector(rng, 7);
    CHECK((chi(u, v, w, G) + chi(v, u, w, G)).norm() < 1e-12);
  }
}

TEST_CASE("associator and coassociator equalities") {
  const auto G = G2Structure::standard();
  CHECK(tau(e(4), e(5), e(6), e(7), G).norm() == 0.0);
  // Direct expansion of phi ^ id on (e1, e2, e3, e4): only phi(e1,e2,e3) = 1 survives.
  CHECK((tau(e(1), e(2), e(3), e(4), G) - e(4)).norm() == 0.0);
  CHECK(coassociator_residual(e(1), e(2), e(3), e(4), G) == 0.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto rng = sample_rng(15, i);
    const Mat V = gaussian_matrix(rng, 7, 4);
    CHECK(std::abs(associator_residual(V.col(0), V.col(1), V.col(2), G)) < 1e-10);
    CHECK(std::abs(coassociator_residual(V.col(0), V.col(1), V.col(2), V.col(3), G)) < 1e-10);
    CHECK(wedge_norm_sq(V.leftCols(3), G.metric) == doctest::Approx(oracle::gram_det(V.leftCols(3))));
  }
}

TEST_CASE("associator equality for a transported structure") {
  auto rng = sample_rng(16, 0);
  Mat A = Mat::Identity(7, 7) + 0.3 * gaussian_matrix(rng, 7, 7);
  if (A.determinant() < 0) A.col(0) *= -1.0;
  const auto G = G2Structure::from_phi(pullback(A, standard_phi()));
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto r = sample_rng(17, i);
    const Mat V = gaussian_matrix(r, 7, 4);
    CHECK(std::abs(associator_residual(V.col(0), V.col(1), V.col(2), G)) < 1e-9);
    CHECK(std::abs(coassociator_residual(V.col(0), V.col(1), V.col(2), V.col(3), G)) < 1e-9);
  }
}

TEST_CASE("lambda maps") {
  const auto G = G2Structure::standard();
  const Form l2 = lambda_k(e(1), 2, G);
  CHECK(approx_equal(l2, (1.0 / std::sqrt(3.0)) * (dx({2, 3}) + dx({4, 5}) + dx({6, 7}))));
  CHECK(l2.norm() == doctest::Approx(1.0));
  CHECK(approx_equal(lambda_k(e(1), 4, G), 0.5 * wedge(dx({1}), standard_phi())));
  CHECK(approx_equal(lambda_k(e(1), 6, G), hodge(dx({1}))));
  CHECK_THROWS_AS(lambda_k(e(1), 3, G), StructuralError);
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto rng = sample_rng(18, i);
    const Vec a = gaussian_vector(rng, 7);
    for (int k : {2, 4, 6}) CHECK(std::abs(lambda_k(a, k, G).norm() - a.norm()) < 1e-12);
  }
}

TEST_CASE("projections onto the 7 and 14 dimensional pieces") {
  const auto G = G2Structure::standard();
  CHECK(project_2_14(lambda_k(e(1), 2, G), G).max_abs() < 1e-15);
  Mat images(21, 21);
  const auto masks = basis_masks(7, 2);
  for (int j = 0; j < 21; ++j) {
    Form b(7, 2);
    b.add(masks[j], 1.0);
    images.col(j) = to_dense(project_2_7(b, G));
  }
  Eigen::FullPivLU<Mat> lu(images);
  lu.setThreshold(1e-10);
  CHECK(lu.rank() == 7);
  Eigen::FullPivLU<Mat> lu14(Mat::Identity(21, 21) - images);
  lu14.setThreshold(1e-10);
  CHECK(lu14.rank() == 14);
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto rng = sample_rng(19, i);
    const Form beta = gaussian_form(rng, 7, 2);
    const Form oracle7 = (1.0 / 3.0) * (beta + hodge(wedge(standard_phi(), beta)));
    CHECK((project_2_7(beta, G) - oracle7).max_abs() < 1e-12);
    CHECK(wedge(project_2_14(beta, G), standard_star_phi()).max_abs() < 1e-12);
  }
}
