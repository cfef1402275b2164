#include <doctest.h>

#include <numeric>

#include "g2f/error.hpp"
#include "g2f/models.hpp"
#include "g2f/random.hpp"

using namespace g2f;

namespace {

Form mono(std::initializer_list<int> idx, double c = 1.0) { return Form::monomial(7, idx, c); }

std::vector<LieAlgebraModel> catalog() {
  Eigen::Matrix3d B;
  B << 2, 4, 0, -2, 2, 6, 0, 8, -4;
  return {model_product_flat(), model_su2_semidirect(), model_heisenberg(B)};
}

// Invariant factors from gcds of k x k minors, independent of elimination.
std::vector<std::int64_t> minor_gcd_factors(const IntMatrix& A) {
  auto det2 = [&](int r0, int r1, int c0, int c1) { return A(r0, c0) * A(r1, c1) - A(r0, c1) * A(r1, c0); };
  std::int64_t g1 = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g1 = std::gcd(g1, A(i, j));
  std::int64_t g2 = 0;
  for (int r0 = 0; r0 < 3; ++r0)
    for (int r1 = r0 + 1; r1 < 3; ++r1)
      for (int c0 = 0; c0 < 3; ++c0)
        for (int c1 = c0 + 1; c1 < 3; ++c1) g2 = std::gcd(g2, det2(r0, r1, c0, c1));
  const std::int64_t g3 = std::abs(A(0, 0) * det2(1, 2, 1, 2) - A(0, 1) * det2(1, 2, 0, 2) + A(0, 2) * det2(1, 2, 0, 1));
  std::vector<std::int64_t> d;
  d.push_back(g1);
  d.push_back(g1 ? g2 / g1 : 0);
  d.push_back(g2 ? g3 / g2 : 0);
  return d;
}

std::int64_t int_det(const IntMatrix& M) {
  // Exact integer determinant by cofactor expansion (small matrices).
  const Eigen::Index n = M.rows();
  if (n == 1) return M(0, 0);
  std::int64_t s = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    IntMatrix minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = M(r, c);
    s += ((j % 2) ? -1 : 1) * M(0, j) * int_det(minor);
  }
  return s;
}

}  // namespace

TEST_CASE("CE differential matches de^k(e_i, e_j) = -c_ij^k") {
  for (const auto& m : catalog()) {
    CHECK(m.max_antisymmetry_violation() == 0.0);
    for (int k = 0; k < 7; ++k) {
      const Form d = ce_differential(Form::one_form(Vec::Unit(7, k)), m);
      for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
          Mat V(7, 2);
          V << Vec::Unit(7, i), Vec::Unit(7, j);
          CHECK(evaluate(d, V) == -m.c[i][j][k]);
        }
    }
  }
}

TEST_CASE("su(2) semidirect structure equations") {
  const auto m = model_su2_semidirect();
  CHECK(approx_equal(ce_differential(mono({1}), m), mono({2, 3}, -2.0), 0.0));
  CHECK(approx_equal(ce_differential(mono({4}), m), -(mono({1, 6}) - mono({2, 7}) - mono({3, 5})), 0.0));
}

TEST_CASE("d^2 = 0 and Jacobi on the catalog") {
  for (const auto& m : catalog()) {
    CHECK(jacobi_check(m.c) == 0.0);
    for (int deg = 1; deg <= 2; ++deg)
      for (auto mask : basis_masks(7, deg)) {
        Form a(7, deg);
        a.add(mask, 1.0);
        CHECK(ce_differential(ce_differential(a, m), m).max_abs() == 0.0);
      }
  }
  auto bad = model_su2_semidirect();
  bad.set_bracket(1, 4, 6, -bad.c[0][3][5]);
  CHECK(jacobi_check(bad.c) > 0.0);
}

TEST_CASE("random integer Heisenberg constants satisfy Jacobi") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto rng = sample_rng(50, i);
    std::uniform_int_distribution<int> dist(-5, 5);
    Eigen::Matrix3d B;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) B(r, c) = dist(rng);
    CHECK(jacobi_check(model_heisenberg(B).c) == 0.0);
  }
}

TEST_CASE("CE differential is a graded derivation") {
  const auto m = model_su2_semidirect();
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto rng = sample_rng(51, i);
    const Form a = gaussian_form(rng, 7, 2);
    const Form b = gaussian_form(rng, 7, 3);
    const Form lhs = ce_differential(wedge(a, b), m);
    const Form rhs = wedge(ce_differential(a, m), b) + wedge(a, ce_differential(b, m));
    CHECK(approx_equal(lhs, rhs, 1e-10));
  }
}

TEST_CASE("su(2) semidirect closedness flags") {
  const auto f = closedness_flags(model_su2_semidirect());
  const auto& P = standard_pieces();
  const Form expected = -2.0 * wedge(mono({2, 3}), P.omega_i[0]) + 2.0 * wedge(mono({1, 3}), P.omega_i[1]) -
                        2.0 * wedge(mono({1, 2}), P.omega_i[2]);
  CHECK(approx_equal(f.d_omega, expected, 0.0));
  CHECK_FALSE(f.omega_closed());
  CHECK(f.theta_closed());
  CHECK(f.lambda_closed());
  CHECK(f.mu_closed());
  CHECK(f.star_phi_closed());
  CHECK(approx_equal(f.d_phi, f.d_omega, 0.0));
  const auto m = model_su2_semidirect();
  for (int i = 0; i < 3; ++i) CHECK(ce_differential(P.omega_i[i], m).max_abs() == 0.0);
}

TEST_CASE("Heisenberg differentials are exact identities in B") {
  const auto& P = standard_pieces();
  auto check = [&](const Eigen::Matrix3d& B) {
    const auto m = model_heisenberg(B);
    for (int i = 0; i < 3; ++i) {
      Form expected(7, 2);
      for (int j = 0; j < 3; ++j) expected += B(i, j) * P.omega_i[j];
      CHECK(approx_equal(ce_differential(Form::one_form(Vec::Unit(7, i)), m), expected, 0.0));
    }
    for (int a = 3; a < 7; ++a) CHECK(ce_differential(Form::one_form(Vec::Unit(7, a)), m).max_abs() == 0.0);
    const auto f = closedness_flags(m);
    CHECK(approx_equal(f.d_omega, 2.0 * B.trace() * P.mu, 1e-12));
    const Form e_anti = Form::one_form(Vec((Vec(7) << B(2, 1) - B(1, 2), B(0, 2) - B(2, 0), B(1, 0) - B(0, 1), 0, 0,
                                             0, 0).finished()));
    CHECK(approx_equal(f.d_theta, 2.0 * wedge(e_anti, P.mu), 1e-12));
    CHECK(f.theta_closed() == ((B - B.transpose()).norm() == 0.0));
    CHECK(f.omega_closed() == (B.trace() == 0.0));
    CHECK(f.lambda_closed() == (B.norm() == 0.0));
    CHECK(f.phi_closed() == (f.lambda_closed() && f.omega_closed()));
    // d lambda is of pure type (2,2): all of it is F_V lambda.
    const auto split = derivative_type_split(P.lambda, m);
    CHECK(approx_equal(split.F_V, f.d_lambda, 0.0));
    CHECK(split.F_H.max_abs() + split.d_H.max_abs() + split.d_V.max_abs() == 0.0);
    CHECK((vertical_involutivity_defect(m) == 0.0) == (B.norm() == 0.0));
  };
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      Eigen::Matrix3d E = Eigen::Matrix3d::Zero();
      E(r, c) = 1.0;
      check(E);
    }
  check(Eigen::Matrix3d::Zero());
  Eigen::Matrix3d B;
  B << 2, 0, 0, 0, 2, 0, 0, 0, -4;
  check(B);
  for (int n = 1; n <= 5; ++n) {
    B.diagonal() << 2.0 * n, 2.0, -2.0 * n - 2.0;
    check(B);
    CHECK(closedness_flags(model_heisenberg(B)).omega_closed());
  }
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto rng = sample_rng(52, i);
    check(gaussian_matrix(rng, 3, 3));
  }
}

TEST_CASE("product-flat model") {
  const auto m = model_product_flat();
  const auto f = closedness_flags(m);
  CHECK(f.phi_closed());
  CHECK(f.star_phi_closed());
  CHECK(f.theta_closed());
  const auto hk = product_flat_hk_triple();
  CHECK(approx_equal(hk[2], mono({4, 7}) + mono({5, 6}), 0.0));
  const Form omega = wedge(mono({1}), hk[0]) + wedge(mono({2}), hk[1]) - wedge(mono({3}), hk[2]);
  CHECK(approx_equal(omega, standard_pieces().omega, 0.0));
  for (auto mask : basis_masks(7, 3)) {
    Form a(7, 3);
    a.add(mask, 1.0);
    const auto s = derivative_type_split(a, m);
    CHECK(s.sum().max_abs() == 0.0);
  }
}

TEST_CASE("type split lands in the stated bidegrees and sums to d") {
  for (const auto& m : catalog()) {
    for (int deg = 1; deg <= 4; ++deg) {
      auto rng = sample_rng(53, static_cast<std::uint64_t>(deg));
      const Form a = gaussian_form(rng, 7, deg);
      const auto s = derivative_type_split(a, m);
      CHECK(approx_equal(s.sum(), ce_differential(a, m), 1e-10));
    }
    for (int deg = 1; deg <= 4; ++deg)
      for (auto mask : basis_masks(7, deg)) {
        Form a(7, deg);
        a.add(mask, 1.0);
        const int p = std::popcount(mask & 7u);
        const auto s = derivative_type_split(a, m);
        for (const auto& t : s.F_H.terms()) CHECK(std::popcount(t.mask & 7u) == p + 2);
        for (const auto& t : s.d_H.terms()) CHECK(std::popcount(t.mask & 7u) == p + 1);
        for (const auto& t : s.d_V.terms()) CHECK(std::popcount(t.mask & 7u) == p);
        for (const auto& t : s.F_V.terms()) CHECK(std::popcount(t.mask & 7u) == p - 1);
      }
    // F_V lambda = 0 iff V involutive.
    const auto s = derivative_type_split(standard_pieces().lambda, m);
    CHECK(s.F_V.is_zero() == (vertical_involutivity_defect(m) == 0.0));
  }
  const auto s = derivative_type_split(standard_pieces().theta, model_su2_semidirect());
  CHECK(s.d_H.max_abs() == 0.0);
  CHECK(s.d_V.max_abs() == 0.0);
  CHECK(s.F_V.max_abs() == 0.0);
}

TEST_CASE("model catalog names") {
  CHECK(model_by_name("product-flat").name == "product-flat");
  CHECK(model_by_name("su2-semidirect").name == "su2-semidirect");
  const auto h = model_by_name("heisenberg:B=[[2,0,0],[0,2,0],[0,0,-4]]");
  Eigen::Matrix3d B;
  B << 2, 0, 0, 0, 2, 0, 0, 0, -4;
  CHECK(parse_matrix3("2,0,0;0,2,0;0,0,-4") == B);
  CHECK(jacobi_check(h.c) == 0.0);
  CHECK(closedness_flags(h).omega_closed());
  CHECK_THROWS_AS(model_by_name("nope"), StructuralError);
  CHECK_THROWS_AS(parse_matrix3("1,2,3"), StructuralError);
}

TEST_CASE("Smith normal form against the minor-gcd oracle") {
  for (std::uint64_t i = 0; i < 300; ++i) {
    auto rng = sample_rng(54, i);
    std::uniform_int_distribution<int> dist(-12, 12);
    IntMatrix A(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = dist(rng);
    if (i % 7 == 0) A.row(2) = A.row(0) + A.row(1);
    const auto s = smith_normal_form(A);
    CHECK(s.U * A * s.V == s.D);
    CHECK(std::abs(int_det(s.U)) == 1);
    CHECK(std::abs(int_det(s.V)) == 1);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (r != c) CHECK(s.D(r, c) == 0);
    for (int k = 0; k + 1 < 3; ++k)
      if (s.diagonal[k] != 0) CHECK(s.diagonal[k + 1] % s.diagonal[k] == 0);
    CHECK(s.diagonal == minor_gcd_factors(A));
  }
}

TEST_CASE("nilmanifold first homology") {
  Eigen::Matrix3d B;
  B << 2, 0, 0, 0, 2, 0, 0, 0, -4;
  const auto g = h1_nilmanifold(B);
  CHECK(g.free_rank == 4);
  CHECK(g.torsion == std::vector<std::int64_t>{2, 2, 4});
  CHECK(g.render() == "Z^4 + Z/2 + Z/2 + Z/4");
  for (int n = 1; n <= 10; ++n) {
    B = Eigen::Vector3d(2.0 * n, 2.0, -2.0 * n - 2.0).asDiagonal();
    CHECK(h1_nilmanifold(B).torsion_order() == 8 * n * (n + 1));
    CHECK(h1_nilmanifold(B).free_rank == 4);
    B = Eigen::Vector3d(2.0 * n, 0.0, 0.0).asDiagonal();
    const auto h = h1_nilmanifold(B);
    CHECK(h.free_rank == 6);
    CHECK(h.torsion_order() == 2 * n);
  }
  CHECK(h1_nilmanifold(Eigen::Matrix3d::Zero()).free_rank == 7);
  CHECK(h1_nilmanifold(Eigen::Matrix3d::Zero()).torsion.empty());
  B.setZero();
  B(1, 2) = 3;
  CHECK_THROWS_AS(h1_nilmanifold(B), LatticeError);
  B(1, 2) = 2.5;
  CHECK_THROWS_AS(h1_nilmanifold(B), LatticeError);
}
