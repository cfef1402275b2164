#include <doctest.h>

#include <cmath>

#include "g2f/error.hpp"
#include "g2f/fm_gauge.hpp"
#include "g2f/random.hpp"

using namespace g2f;

namespace {

Form mono(std::initializer_list<int> idx, double c = 1.0) { return Form::monomial(7, idx, c); }

AnalyticMap x1_in_u4() {
  Mat43 A = Mat43::Zero();
  A(0, 0) = 1.0;
  return affine_map(A);
}

}  // namespace

TEST_CASE("curvature fixtures and gauge invariance") {
  const Vec3 x(0.2, -0.4, 1.1);
  CHECK(curvature(fm_transform(affine_map(Mat43::Zero(), Vec4(1, 2, 3, 4))), x).is_zero(0.0));
  CHECK(approx_equal(curvature(fm_transform(x1_in_u4()), x), mono({1, 4}), 0.0));
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto rng = sample_rng(90, i);
    const auto u = to_map(PolynomialMap::random(rng, 3, 3));
    const auto shifted = add_maps(u, affine_map(Mat43::Zero(), kFiberPeriod * Vec4(1, 0, -2, 3)));
    const Vec3 p = gaussian_vector(rng, 3);
    const Form K = curvature(fm_transform(u), p);
    CHECK(approx_equal(K, curvature(fm_transform(shifted), p), 0.0));
    // Pure H* (x) V* type.
    for (const auto& t : K.terms()) CHECK(std::popcount(t.mask & 7u) == 1);
  }
}

TEST_CASE("beta equals 2 pi Psi^* K") {
  const Vec3 x(0.5, 0.5, 0.5);
  CHECK(beta_relation_residual(x1_in_u4(), x) < 1e-15);
  GraphPlane g;
  g.T(0, 0) = 1.0;
  CHECK(approx_equal(beta_of(g), mono({1, 4}), 0.0));
  CHECK(approx_equal(kFiberPeriod * psi_pullback(mono({1, 4})), mono({1, 4}), 1e-15));
  CHECK(beta_relation_residual(affine_map(Mat43::Zero(), Vec4(1, 1, 1, 1)), x) == 0.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto rng = sample_rng(91, i);
    const auto u = to_map(PolynomialMap::random(rng, 3, 3));
    CHECK(beta_relation_residual(u, gaussian_vector(rng, 3)) < 1e-12);
  }
}

TEST_CASE("K ^ *phi reduces to K ^ Theta on H* (x) V*") {
  const auto& P = standard_pieces();
  for (int i = 1; i <= 3; ++i)
    for (int a = 4; a <= 7; ++a) {
      const Form K = mono({i, a});
      CHECK(wedge(K, P.mu).is_zero(0.0));
      CHECK(approx_equal(instanton_form(K), wedge(K, P.theta), 0.0));
    }
}

TEST_CASE("instanton residual is a fixed multiple of the Fueter residual") {
  const Vec3 x(0.1, 0.2, 0.3);
  const auto r = instanton_residual(fm_transform(x1_in_u4()), x);
  CHECK(r > 0.5);
  // e14 ^ e23 ^ omega_1 leaves the e14 ^ e23 ^ eta67 term.
  CHECK(std::abs(instanton_form(mono({1, 4})).coeff({1, 2, 3, 4, 6, 7})) == 1.0);
  CHECK(instanton_residual(fm_transform(affine_map(Mat43::Zero())), x) == 0.0);
  CHECK(instanton_residual(fm_transform(affine_fueter_section(Vec4(1, 2, 0, 0), Vec4(0, 0, 1, -1))), x) < 1e-14);
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto rng = sample_rng(92, i);
    const auto u = to_map(PolynomialMap::random(rng, 3, 3));
    const Vec3 p = gaussian_vector(rng, 3);
    const double fueter = fueter_operator_flat(u, p).norm();
    const double inst = instanton_residual(fm_transform(u), p);
    CHECK(std::abs(inst / fueter - kMirrorResidualRatio) < 1e-12);
  }
}

TEST_CASE("dDT residual and the large radius limit") {
  const Vec3 x(0.3, 0.1, -0.2);
  const auto flat = fm_transform(affine_map(Mat43::Zero()));
  for (double r : {0.5, 1.0, 10.0}) CHECK(ddt_residual(flat, x, r).raw == 0.0);
  CHECK_THROWS_AS(ddt_residual(flat, x, 0.0), DomainError);
  CHECK_THROWS_AS(ddt_residual(flat, x, -1.0), DomainError);
  // Full-rank Jacobian: K^3 != 0.
  auto rng = sample_rng(93, 0);
  const auto u = affine_map(gaussian_matrix(rng, 4, 3));
  const auto c = fm_transform(u);
  const auto d1 = ddt_residual(c, x, 1.0);
  const Form K = curvature(c, x);
  const double cube = ((1.0 / 6.0) * wedge(wedge(K, K), K)).norm();
  CHECK(cube > 1e-3);
  CHECK(d1.gap == doctest::Approx(cube).epsilon(1e-12));
  const auto sweep = radius_sweep(c, x, 1.0, 1e3, 13);
  CHECK(std::abs(sweep.slope + 4.0) < 0.1);
  CHECK(sweep.rows.back().normalized == doctest::Approx(sweep.rows.back().instanton).epsilon(1e-10));
  // Fueter section: the normalized residual is the cubic term alone.
  const auto f = fm_transform(affine_fueter_section(Vec4(1, 0, 0, 0), Vec4(0, 1, 1, 0)));
  const Form Kf = curvature(f, x);
  const double cube_f = ((1.0 / 6.0) * wedge(wedge(Kf, Kf), Kf)).norm();
  for (double r : {1.0, 3.0, 30.0}) {
    const auto d = ddt_residual(f, x, r);
    CHECK(d.instanton < 1e-14);
    CHECK(d.normalized == doctest::Approx(cube_f / std::pow(r, 4)).epsilon(1e-12));
  }
}

TEST_CASE("log-log slope fit") {
  std::vector<double> xs{1, 10, 100};
  std::vector<double> ys{2, 2e-4, 2e-8};
  CHECK(loglog_slope(xs, ys) == doctest::Approx(-4.0));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), StructuralError);
}
