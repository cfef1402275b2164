#include "g2f/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "g2f/error.hpp"
#include "g2f/fm_gauge.hpp"
#include "g2f/fueter.hpp"
#include "g2f/g2_core.hpp"
#include "g2f/models.hpp"
#include "g2f/pde.hpp"
#include "g2f/random.hpp"
#include "g2f/splitting.hpp"

namespace g2f::cli {

using json = nlohmann::ordered_json;

// ---- report ----

void RunReport::residual(std::string name, std::string ref, double value, double tol) {
  CheckRecord c{std::move(name), std::move(ref), CheckRecord::Kind::residual, value, tol};
  c.pass = std::isfinite(value) && value <= tol;
  checks.push_back(std::move(c));
}

void RunReport::lower_bound(std::string name, std::string ref, double value, double bound) {
  CheckRecord c{std::move(name), std::move(ref), CheckRecord::Kind::lower_bound, value, bound};
  c.pass = std::isfinite(value) && value >= bound;
  checks.push_back(std::move(c));
}

void RunReport::flag(std::string name, std::string ref, bool value, bool expected) {
  CheckRecord c{std::move(name), std::move(ref), CheckRecord::Kind::flag};
  c.flag = value;
  c.pass = value == expected;
  checks.push_back(std::move(c));
}

bool RunReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

namespace {

const char* kind_name(CheckRecord::Kind k) {
  switch (k) {
    case CheckRecord::Kind::residual:
      return "residual";
    case CheckRecord::Kind::lower_bound:
      return "lowerBound";
    case CheckRecord::Kind::flag:
      return "flag";
  }
  return "residual";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json RunReport::to_json() const {
  json j;
  j["schemaVersion"] = kSchemaVersion;
  j["command"] = command;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["toleranceProfile"] = profile == Profile::strict ? "strict" : "fast";
  j["pass"] = all_pass();
  json cs = json::array();
  for (const auto& c : checks) {
    json r;
    r["name"] = c.name;
    r["paperRef"] = c.paper_ref;
    r["kind"] = kind_name(c.kind);
    if (c.kind == CheckRecord::Kind::flag) {
      r["flag"] = c.flag;
    } else {
      r["residual"] = c.value;
      r[c.kind == CheckRecord::Kind::residual ? "tolerance" : "bound"] = c.threshold;
    }
    r["pass"] = c.pass;
    cs.push_back(std::move(r));
  }
  j["checks"] = std::move(cs);
  j["data"] = data;
  if (wall_time_seconds) j["wallTimeSeconds"] = *wall_time_seconds;
  return j;
}

std::string RunReport::to_csv() const {
  std::ostringstream s;
  if (!csv_header.empty()) {
    for (std::size_t i = 0; i < csv_header.size(); ++i) s << (i ? "," : "") << csv_header[i];
    s << "\n";
    for (const auto& row : csv_rows) {
      for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << num(row[i]);
      s << "\n";
    }
    return s.str();
  }
  s << "name,paperRef,kind,value,threshold,pass\n";
  for (const auto& c : checks) {
    s << '"' << c.name << "\",\"" << c.paper_ref << "\"," << kind_name(c.kind) << ",";
    if (c.kind == CheckRecord::Kind::flag) {
      s << (c.flag ? "true" : "false") << ",";
    } else {
      s << num(c.value) << "," << num(c.threshold);
    }
    s << "," << (c.pass ? "true" : "false") << "\n";
  }
  return s.str();
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
  std::string profile = "strict";
  bool timing = false;
  unsigned threads = 0;

  std::string suite;
  std::string scan;
  std::string model;
  std::string B;
  bool homology = false;
  std::string solve;
  std::string a2;
  std::string a3;
  std::vector<double> amplitudes{0.01, 0.1, 0.5};
  int grid = 0;
  double eps = 0.0;
  double rmin = 1.0;
  double rmax = 1e3;
  int points = 31;
};

struct Ctx {
  const Options& o;
  bool fast() const { return o.profile == "fast"; }
  std::size_t samples(std::size_t strict, std::size_t quick) const {
    return o.samples ? *o.samples : (fast() ? quick : strict);
  }
  double tol(double strict) const { return o.tol ? *o.tol : (fast() ? std::max(strict, 1e-8) : strict); }
  std::uint64_t seed() const {
    if (!o.seed) throw UsageError("--seed is required for this command");
    return *o.seed;
  }
};

Vec unit(std::mt19937_64& rng, int n) {
  Vec v = gaussian_vector(rng, n);
  return v / v.norm();
}

Vec4 parse_vec4(const std::string& text) {
  std::vector<double> v;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',' || ch == ' ') {
      if (!cur.empty()) v.push_back(std::stod(cur));
      cur.clear();
    } else if (ch != '[' && ch != ']') {
      cur += ch;
    }
  }
  if (v.size() != 4) throw UsageError("expected four comma-separated numbers, got '" + text + "'");
  return Vec4(v[0], v[1], v[2], v[3]);
}

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) to_json(Vec(m.row(r).transpose())).swap(a.emplace_back());
  return a;
}

json scan_json(const ScanReport& r) {
  json j;
  j["form"] = r.form;
  j["samples"] = r.samples;
  j["skipped"] = r.skipped;
  j["maxRatio"] = r.max_ratio;
  j["argmaxIndex"] = r.argmax_index;
  j["argmaxFrame"] = to_json(r.argmax_frame);
  j["violations"] = r.violations;
  j["equalityCases"] = r.equality_cases;
  j["maxIdentityResidual"] = r.max_identity_residual;
  j["tolerance"] = r.tolerance;
  return j;
}

template <class F>
double parallel_max(std::size_t n, unsigned threads, F&& f) {
  std::vector<double> v(n, 0.0);
  parallel_for(n, [&](std::size_t i) { v[i] = f(i); }, threads);
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Harmonic polynomials of degree <= 3 on R^3.
PolynomialMap harmonic_polynomial(std::mt19937_64& rng) {
  using E = std::array<int, 4>;
  const std::vector<std::vector<std::pair<E, double>>> basis = {
      {{{0, 0, 0, 0}, 1.0}},
      {{{1, 0, 0, 0}, 1.0}},
      {{{0, 1, 0, 0}, 1.0}},
      {{{0, 0, 1, 0}, 1.0}},
      {{{1, 1, 0, 0}, 1.0}},
      {{{1, 0, 1, 0}, 1.0}},
      {{{0, 1, 1, 0}, 1.0}},
      {{{2, 0, 0, 0}, 1.0}, {{0, 2, 0, 0}, -1.0}},
      {{{2, 0, 0, 0}, 1.0}, {{0, 0, 2, 0}, -1.0}},
      {{{1, 1, 1, 0}, 1.0}},
      {{{3, 0, 0, 0}, 1.0}, {{1, 2, 0, 0}, -3.0}},
      {{{0, 3, 0, 0}, 1.0}, {{0, 1, 2, 0}, -3.0}},
      {{{0, 0, 3, 0}, 1.0}, {{2, 0, 1, 0}, -3.0}},
  };
  PolynomialMap p;
  p.vars = 3;
  for (const auto& element : basis) {
    const Vec c = gaussian_vector(rng, 4);
    for (const auto& [e, w] : element) p.terms.push_back({e, w * Vec4(c)});
  }
  return p;
}

std::vector<Vec3> probe_points(std::uint64_t seed, std::size_t n) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = sample_rng(seed, i);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec3 x(u(rng), u(rng), u(rng));
    if (x.norm() < 0.2) x *= 0.2 / x.norm() + 1.0;
    pts.push_back(x);
  }
  return pts;
}

Eigen::Vector4d unit4(std::mt19937_64& rng) {
  Vec v = unit(rng, 4);
  return Eigen::Vector4d(v(0), v(1), v(2), v(3));
}

AnalyticMap random_quadratic_map(std::uint64_t seed, std::uint64_t index) {
  auto rng = sample_rng(seed, index);
  return to_map(PolynomialMap::random(rng, 3, 2), "random quadratic");
}

// ---- verify suites ----

void verify_algebra(const Ctx& ctx, RunReport& r, unsigned threads) {
  const auto seed = ctx.seed();
  const std::size_t n = ctx.samples(10000, 500);
  const auto G = G2Structure::standard();
  const double assoc = parallel_max(n, threads, [&](std::size_t i) {
    auto rng = sample_rng(seed, i);
    return std::abs(associator_residual(unit(rng, 7), unit(rng, 7), unit(rng, 7), G));
  });
  const double coassoc = parallel_max(n, threads, [&](std::size_t i) {
    auto rng = sample_rng(seed ^ 0x9e3779b97f4a7c15ULL, i);
    return std::abs(coassociator_residual(unit(rng, 7), unit(rng, 7), unit(rng, 7), unit(rng, 7), G));
  });
  r.residual("associator equality on random unit triples", "associator equality", assoc, ctx.tol(1e-10));
  r.residual("coassociator equality on random unit quadruples", "coassociator equality", coassoc, ctx.tol(1e-10));
  r.residual("metric from phi0 is the identity", "metric determined by phi",
             (metric_from_phi(standard_phi()) - Mat::Identity(7, 7)).cwiseAbs().maxCoeff(), ctx.tol(1e-12));
  r.residual("|phi0|^2 = 7", "norm of the standard 3-form", std::abs(inner(G.phi, G.phi) - 7.0), ctx.tol(0.0));
  r.residual("*phi0 matches the pinned 4-form", "standard 4-form",
             (hodge(standard_phi()) - standard_star_phi()).max_abs(), ctx.tol(0.0));
  const std::size_t m = std::max<std::size_t>(1, n / 10);
  const double starstar = parallel_max(m, threads, [&](std::size_t i) {
    auto rng = sample_rng(seed + 1, i);
    const int k = static_cast<int>(i % 8);
    const Form a = gaussian_form(rng, 7, k);
    return (hodge(hodge(a)) - a).max_abs() / std::max(1.0, a.max_abs());
  });
  r.residual("** = 1 on random forms", "Hodge star involution", starstar, ctx.tol(1e-12));
  const double iso = parallel_max(m, threads, [&](std::size_t i) {
    auto rng = sample_rng(seed + 2, i);
    const Vec a = gaussian_vector(rng, 7);
    double worst = 0.0;
    for (int k : {2, 4, 6}) {
      const double nk = lambda_k(a, k, G).norm();
      worst = std::max(worst, std::abs(nk * nk - a.squaredNorm()) / std::max(1.0, a.squaredNorm()));
    }
    return worst;
  });
  r.residual("lambda^2, lambda^4, lambda^6 are isometries", "lambda maps", iso, ctx.tol(1e-12));
  const double crossn = parallel_max(m, threads, [&](std::size_t i) {
    auto rng = sample_rng(seed + 3, i);
    const Vec u = unit(rng, 7);
    const Vec v = unit(rng, 7);
    Mat uv(7, 2);
    uv << u, v;
    return std::abs(cross(u, v, G).squaredNorm() - wedge_norm_sq(uv, G.metric));
  });
  r.residual("|u x v|^2 = |u ^ v|^2", "cross product", crossn, ctx.tol(1e-12));
  r.data["samples"] = n;
}

void verify_splitting(const Ctx& ctx, RunReport& r, unsigned threads) {
  const auto seed = ctx.seed();
  const std::size_t n = ctx.samples(1000, 100);
  const GraphPlaneSampler sampler{seed};
  const double ve = parallel_max(n, threads, [&](std::size_t i) {
    const GraphPlane g = sampler.sample(i);
    const auto a = ve_series(g, 6);
    const auto b = ve_recursive(g, 6);
    double worst = 0.0;
    for (int k = 0; k <= 6; ++k) worst = std::max(worst, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(a[k])));
    return worst;
  });
  r.residual("ve_series agrees with ve_recursive", "vertical energy hierarchy", ve, ctx.tol(1e-10));
  GraphPlane row;
  row.T(0, 0) = 1.0;
  const auto pinned = ve_series(row, 3);
  const std::array<double, 4> expected{1.0, 0.5, -0.125, 0.0625};
  double pin = 0.0;
  for (int k = 0; k < 4; ++k) pin = std::max(pin, std::abs(pinned[k] - expected[k]));
  r.residual("ve of the unit-row plane is (1, 1/2, -1/8, 1/16)", "Taylor oracle of sqrt(1+eps)", pin,
             ctx.tol(1e-15));
  const auto scan = anisotropic_scan(Splitting::standard(), sampler, n, ctx.tol(1e-10), threads);
  r.flag("no anisotropic calibration violation", "anisotropic calibration inequality", scan.violations == 0);
  r.residual("omega + |chi_1|^2 / 2 = ve_1", "anisotropic calibration identity", scan.max_identity_residual,
             ctx.tol(1e-10));
  const auto semi = semi_calibration_scan(standard_phi(), Mat::Identity(7, 7), PlaneSampler{seed}, n,
                                          ctx.tol(1e-10), threads);
  r.flag("phi0 is a semi-calibration on sampled planes", "phi is a calibration", semi.violations == 0);
  const std::size_t m = std::max<std::size_t>(1, n / 10);
  std::vector<int> depth(m);
  std::vector<double> res(m);
  parallel_for(
      m,
      [&](std::size_t i) {
        const auto lad = equality_ladder(sample_fueter_plane(seed + 1, i), 4);
        depth[i] = lad.depth;
        res[i] = lad.max_residual();
      },
      threads);
  r.flag("Fueter planes are at least 2-vanishing", "k-vanishing ladder",
         *std::min_element(depth.begin(), depth.end()) >= 2);
  r.residual("associator expansion ladder residual", "adiabatic associator expansion",
             *std::max_element(res.begin(), res.end()), ctx.tol(1e-10));
  r.data["samples"] = n;
  r.data["anisotropicScan"] = scan_json(scan);
}

void verify_fueter(const Ctx& ctx, RunReport& r, unsigned threads) {
  const auto seed = ctx.seed();
  const std::size_t n = ctx.samples(1000, 100);
  r.residual("J triple relations", "quaternionic structure on V", JTriple::standard().structure_residual(),
             ctx.tol(1e-15));
  // Generic planes at unit scale: far from the Fueter locus with overwhelming probability.
  const GraphPlaneSampler generic{seed, {}, 0.5, 2.0};
  const double routes = parallel_max(n, threads, [&](std::size_t i) {
    const GraphPlane g = generic.sample(i);
    return (fueter_vector(g) - fueter_via_J(g)).norm() / std::max(1.0, g.T.norm());
  });
  r.residual("cross-product and J routes agree", "Fueter operator", routes, ctx.tol(1e-12));
  std::vector<double> fmax(n);
  std::vector<double> gmin(n);
  std::vector<double> chi(n);
  std::vector<int> rank(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const GraphPlane f = sample_fueter_plane(seed + 1, i);
        fmax[i] = condition_residuals(f).max();
        rank[i] = linearization_rank(f);
        const GraphPlane g = generic.sample(i);
        gmin[i] = condition_residuals(g).min();
        const auto cb = chi_via_beta(g);
        chi[i] = std::max((cb.chi1 - chi1_from_theta(g)).norm(), (cb.chi1 - cb.chi1_lambda).norm()) /
                 std::max(1.0, cb.chi1.norm());
      },
      threads);
  r.residual("six Fueter conditions vanish on completed planes", "equivalent Fueter conditions",
             *std::max_element(fmax.begin(), fmax.end()), ctx.tol(1e-9));
  r.lower_bound("no Fueter condition vanishes on generic planes", "equivalent Fueter conditions",
                *std::min_element(gmin.begin(), gmin.end()), 1e-6);
  r.residual("chi_1 from beta, lambda^2 and Theta agree", "chi via beta", *std::max_element(chi.begin(), chi.end()),
             ctx.tol(1e-12));
  r.flag("linearization has rank 4 at Fueter planes", "linearized Fueter operator",
         std::all_of(rank.begin(), rank.end(), [](int k) { return k == 4; }));
  const std::size_t m = std::max<std::size_t>(1, n / 10);
  std::vector<std::array<int, 3>> dims(m);
  parallel_for(
      m,
      [&](std::size_t i) {
        auto rng = sample_rng(seed + 2, i);
        const Mat W = gaussian_matrix(rng, 7, 2);
        dims[i] = {polar_space_dim(W.leftCols(1), PolarSystem::associative),
                   polar_space_dim(W, PolarSystem::associative), polar_space_dim(W, PolarSystem::fueter)};
      },
      threads);
  r.flag("polar dimensions (7, 3, 3) on random flags", "polar spaces",
         std::all_of(dims.begin(), dims.end(), [](const auto& d) { return d == std::array<int, 3>{7, 3, 3}; }));
  r.data["samples"] = n;
  r.data["fueterMaxResidual"] = *std::max_element(fmax.begin(), fmax.end());
  r.data["genericMinResidual"] = *std::min_element(gmin.begin(), gmin.end());
}

void verify_models(const Ctx& ctx, RunReport& r) {
  const auto seed = ctx.seed();
  const std::size_t n = ctx.samples(20, 5);
  const auto& P = standard_pieces();
  std::vector<LieAlgebraModel> catalog{model_product_flat(), model_su2_semidirect(),
                                       model_heisenberg(Eigen::Vector3d(2, 2, -4).asDiagonal())};
  double jac = 0.0;
  double dd = 0.0;
  for (const auto& m : catalog) {
    jac = std::max(jac, jacobi_check(m.c));
    for (int deg = 0; deg <= 5; ++deg)
      for (auto mask : basis_masks(7, deg)) {
        Form a(7, deg);
        a.add(mask, 1.0);
        dd = std::max(dd, ce_differential(ce_differential(a, m), m).max_abs());
      }
  }
  r.residual("Jacobi identity on the catalog", "homogeneous models", jac, ctx.tol(0.0));
  r.residual("d^2 = 0 on the catalog", "Chevalley-Eilenberg complex", dd, ctx.tol(0.0));
  const auto su2 = closedness_flags(model_su2_semidirect());
  const Form expected = -2.0 * wedge(Form::monomial(7, {2, 3}), P.omega_i[0]) +
                        2.0 * wedge(Form::monomial(7, {1, 3}), P.omega_i[1]) -
                        2.0 * wedge(Form::monomial(7, {1, 2}), P.omega_i[2]);
  r.flag("su(2) semidirect: d Theta = 0", "su(2) semidirect model", su2.theta_closed());
  r.flag("su(2) semidirect: d omega != 0", "su(2) semidirect model", su2.omega_closed(), false);
  r.residual("su(2) semidirect: d omega matches the displayed form", "su(2) semidirect model",
             (su2.d_omega - expected).max_abs(), ctx.tol(0.0));
  double hom = 0.0;
  bool sym_iff = true;
  auto check_B = [&](const Eigen::Matrix3d& B) {
    const auto f = closedness_flags(model_heisenberg(B));
    hom = std::max(hom, (f.d_omega - 2.0 * B.trace() * P.mu).max_abs());
    const bool symmetric = (B - B.transpose()).cwiseAbs().maxCoeff() == 0.0;
    sym_iff = sym_iff && (f.theta_closed() == symmetric);
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Eigen::Matrix3d E = Eigen::Matrix3d::Zero();
      E(i, j) = 1.0;
      check_B(E);
    }
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = sample_rng(seed, i);
    std::uniform_int_distribution<int> d(-3, 3);
    Eigen::Matrix3d B;
    for (int k = 0; k < 9; ++k) B(k / 3, k % 3) = 2.0 * d(rng);
    if (i % 2 == 0) B = (B + B.transpose()).eval();
    check_B(B);
  }
  r.residual("Heisenberg: d omega = 2 tr(B) mu", "quaternionic Heisenberg model", hom, ctx.tol(0.0));
  r.flag("Heisenberg: d Theta = 0 iff B is symmetric", "quaternionic Heisenberg model", sym_iff);
  const auto flat = closedness_flags(model_product_flat());
  r.flag("product-flat: d phi = 0 and d *phi = 0", "product-flat model", flat.phi_closed() && flat.star_phi_closed());
  bool torsion = true;
  json orders = json::array();
  for (int k = 1; k <= 10; ++k) {
    const auto g = h1_nilmanifold(Eigen::Vector3d(2.0 * k, 2.0, -2.0 * k - 2.0).asDiagonal());
    orders.push_back(g.torsion_order());
    torsion = torsion && g.torsion_order() == 8LL * k * (k + 1);
  }
  r.flag("H_1 torsion order 8 n (n + 1) for diag(2n, 2, -2n - 2)", "nilmanifold homology", torsion);
  r.data["torsionOrders"] = orders;
}

void verify_pde(const Ctx& ctx, RunReport& r, unsigned threads) {
  const auto seed = ctx.seed();
  const std::size_t npoly = ctx.samples(50, 10);
  const std::size_t npts = ctx.samples(100, 20);
  const double flat = parallel_max(npoly, threads, [&](std::size_t i) {
    auto rng = sample_rng(seed, i);
    const auto F = to_map(PolynomialMap::random(rng, 3, 4));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return d_squared_residual(F, Vec3(u(rng), u(rng), u(rng))).norm();
  });
  r.residual("D^2 + Delta = 0 on random polynomial maps", "flat Fueter operator squares to -Laplacian", flat,
             ctx.tol(1e-10));
  auto rng0 = sample_rng(seed + 1, 0);
  std::vector<AmbientMap> su2_catalog{to_ambient(PolynomialMap::random(rng0, 4, 3)),
                                      su2_cot_potential(unit4(rng0), 1.0, 0.5, Vec4(gaussian_vector(rng0, 4))),
                                      su2_cot_potential(unit4(rng0), -0.7, 0.0, Vec4(gaussian_vector(rng0, 4)))};
  std::vector<double> su2v(npts, 0.0);
  parallel_for(
      npts,
      [&](std::size_t i) {
        auto rng = sample_rng(seed + 2, i);
        const Eigen::Vector4d h = unit4(rng);
        for (const auto& F : su2_catalog) {
          try {
            su2v[i] = std::max(su2v[i], su2_identity_residual(F, h).norm());
          } catch (const DomainError&) {
          }
        }
      },
      threads);
  r.residual("D^2 + Delta + 2 D = 0 on SU(2)", "Fueter operator on SU(2)", *std::max_element(su2v.begin(), su2v.end()),
             ctx.tol(1e-8));
  const auto probes = probe_points(seed + 3, 50);
  const auto pts = probe_points(seed + 4, npts);
  std::vector<AnalyticMap> outputs;
  for (std::uint64_t k = 0; k < 3; ++k) {
    auto rng = sample_rng(seed + 5, k);
    outputs.push_back(harmonic_to_fueter(to_map(harmonic_polynomial(rng)), probes));
  }
  auto rng1 = sample_rng(seed + 6, 0);
  outputs.push_back(harmonic_to_fueter(newtonian_potential(Vec4(gaussian_vector(rng1, 4))), probes));
  double hres = 0.0;
  for (const auto& u : outputs)
    for (const auto& x : pts) hres = std::max(hres, fueter_operator_flat(u, x).norm());
  r.residual("harmonic_to_fueter outputs are Fueter", "harmonic functions give Fueter sections", hres,
             ctx.tol(1e-10));
  const auto base = affine_fueter_section(Vec4(1, 0, -1, 0), Vec4(0, 2, 0, 1));
  const auto e = immersion_energies(graph_immersion(add_maps(base, trig_perturbation(seed + 7, 0), 0.3)),
                                    ImmersionGrid{ctx.fast() ? 6 : 10}, threads);
  r.residual("pointwise energy identity", "energy identity", e.max_pointwise_identity_residual, ctx.tol(1e-12));
  r.residual("total energy = 3/2 Vol^H + VE", "energy identity",
             std::abs(e.total_energy - 1.5 * e.vol_h - e.ve) / std::max(1.0, e.total_energy), ctx.tol(1e-12));
  r.data["polynomials"] = npoly;
  r.data["points"] = npts;
}

void verify_fm(const Ctx& ctx, RunReport& r, unsigned threads) {
  const auto seed = ctx.seed();
  const std::size_t n = ctx.samples(1000, 100);
  std::vector<double> ratio(n, 0.0);
  std::vector<double> beta(n, 0.0);
  std::vector<char> iff(n, 1);
  parallel_for(
      n,
      [&](std::size_t i) {
        auto rng = sample_rng(seed, i);
        std::uniform_real_distribution<double> ux(-1.0, 1.0);
        const Vec3 x(ux(rng), ux(rng), ux(rng));
        const auto u = random_quadratic_map(seed + 1, i);
        const auto c = fm_transform(u);
        const double du = fueter_operator_flat(u, x).norm();
        const double inst = instanton_residual(c, x);
        if (du > 1e-8) ratio[i] = std::abs(inst / du - kMirrorResidualRatio);
        beta[i] = beta_relation_residual(u, x);
        std::uniform_int_distribution<int> d(-3, 3);
        const auto f = affine_fueter_section(Vec4(d(rng), d(rng), d(rng), d(rng)), Vec4(d(rng), d(rng), d(rng), d(rng)));
        const bool fz = fueter_operator_flat(f, x).norm() < 1e-12;
        const bool iz = instanton_residual(fm_transform(f), x) < 1e-12;
        iff[i] = fz && iz && ((du < 1e-12) == (inst < 1e-12));
      },
      threads);
  r.residual("|K ^ *phi| / |D u| is constant", "mirror Fueter and instanton equations",
             *std::max_element(ratio.begin(), ratio.end()), ctx.tol(1e-8));
  r.flag("instanton residual vanishes iff Fueter residual vanishes", "mirror Fueter and instanton equations",
         std::all_of(iff.begin(), iff.end(), [](char b) { return b != 0; }));
  r.residual("beta = 2 pi Psi^* K", "Fourier-Mukai curvature", *std::max_element(beta.begin(), beta.end()),
             ctx.tol(1e-12));
  const auto u = random_quadratic_map(seed + 2, 0);
  Mat43 shift = Mat43::Zero();
  const auto gauge = add_maps(u, affine_map(shift, Vec4(1, -2, 0, 3)));
  r.residual("curvature is invariant under integer gauge shifts", "Fourier-Mukai curvature",
             (curvature(fm_transform(u), Vec3(0.3, -0.2, 0.5)) - curvature(fm_transform(gauge), Vec3(0.3, -0.2, 0.5)))
                 .max_abs(),
             ctx.tol(0.0));
  const auto sweep = radius_sweep(fm_transform(u), Vec3(0.3, -0.2, 0.5), 1.0, 1e3, 31);
  r.residual("large-radius gap slope is -4", "deformed Donaldson-Thomas limit", std::abs(sweep.slope + 4.0), 0.1);
  r.data["samples"] = n;
  r.data["slope"] = sweep.slope;
}

// ---- scans, model, solve, energy, sweep ----

void run_scan(const Ctx& ctx, RunReport& r, unsigned threads) {
  const auto seed = ctx.seed();
  const double tol = ctx.tol(1e-10);
  if (ctx.o.scan == "anisotropic") {
    const std::size_t n = ctx.samples(100000, 10000);
    const auto s = anisotropic_scan(Splitting::standard(), GraphPlaneSampler{seed}, n, tol, threads);
    r.flag("no violation of omega <= ve_1", "anisotropic calibration inequality", s.violations == 0);
    r.residual("max ratio omega / ve_1 above 1", "anisotropic calibration inequality", std::max(0.0, s.max_ratio - 1.0),
               tol);
    r.residual("omega + |chi_1|^2 / 2 = ve_1", "anisotropic calibration identity", s.max_identity_residual, tol);
    r.data["scan"] = scan_json(s);
    return;
  }
  const std::size_t n = ctx.samples(10000, 1000);
  Form form = standard_phi();
  Mat metric = Mat::Identity(7, 7);
  if (ctx.o.eps > 0.0) {
    form = adiabatic_family(standard_phi(), Splitting::standard(), ctx.o.eps);
    metric = adiabatic_metric(Splitting::standard(), ctx.o.eps);
  }
  const auto s = semi_calibration_scan(form, metric, PlaneSampler{seed}, n, tol, threads);
  r.flag("no plane with phi(v) > vol(v)", "semi-calibration", s.violations == 0);
  r.residual("max ratio above 1", "semi-calibration", std::max(0.0, s.max_ratio - 1.0), tol);
  r.data["eps"] = ctx.o.eps;
  r.data["scan"] = scan_json(s);
}

json render_flags(const ClosednessFlags& f) {
  json j;
  j["dLambda"] = f.d_lambda.max_abs();
  j["dOmega"] = f.d_omega.max_abs();
  j["dTheta"] = f.d_theta.max_abs();
  j["dMu"] = f.d_mu.max_abs();
  j["dPhi"] = f.d_phi.max_abs();
  j["dStarPhi"] = f.d_star_phi.max_abs();
  return j;
}

void run_model(const Ctx& ctx, RunReport& r) {
  const auto& o = ctx.o;
  const bool heis = o.model == "heisenberg" || o.model.rfind("heisenberg:", 0) == 0;
  if (!o.B.empty() && o.model != "heisenberg") throw UsageError("--B applies to the heisenberg model only");
  if (o.homology && !heis) throw UsageError("--homology applies to the heisenberg model only");
  if (o.model == "heisenberg" && o.B.empty()) throw UsageError("heisenberg needs --B");
  std::optional<Eigen::Matrix3d> B;
  LieAlgebraModel m;
  try {
    if (o.model == "heisenberg") {
      B = parse_matrix3(o.B);
      m = model_heisenberg(*B);
    } else {
      m = model_by_name(o.model);
      if (heis) B = parse_matrix3(o.model.substr(o.model.find('=') + 1));
    }
  } catch (const LatticeError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto f = closedness_flags(m);
  r.residual("Jacobi identity", "homogeneous models", jacobi_check(m.c), ctx.tol(0.0));
  r.residual("antisymmetric structure constants", "homogeneous models", m.max_antisymmetry_violation(), ctx.tol(0.0));
  double dd = 0.0;
  for (int k = 1; k <= 7; ++k) dd = std::max(dd, ce_differential(ce_differential(Form::monomial(7, {k}), m), m).max_abs());
  r.residual("d^2 = 0 on the coframe", "Chevalley-Eilenberg complex", dd, ctx.tol(0.0));
  if (B) {
    const auto& P = standard_pieces();
    r.residual("d omega = 2 tr(B) mu", "quaternionic Heisenberg model", (f.d_omega - 2.0 * B->trace() * P.mu).max_abs(),
               ctx.tol(0.0));
    r.flag("d Theta = 0 iff B is symmetric", "quaternionic Heisenberg model",
           f.theta_closed() == ((*B - B->transpose()).cwiseAbs().maxCoeff() == 0.0));
  }
  r.data["model"] = m.name;
  r.data["flags"] = render_flags(f);
  json closed;
  closed["lambda"] = f.lambda_closed();
  closed["omega"] = f.omega_closed();
  closed["theta"] = f.theta_closed();
  closed["mu"] = f.mu_closed();
  closed["phi"] = f.phi_closed();
  closed["starPhi"] = f.star_phi_closed();
  r.data["closed"] = closed;
  json diff;
  diff["dOmega"] = render(f.d_omega);
  diff["dTheta"] = render(f.d_theta);
  diff["dPhi"] = render(f.d_phi);
  diff["dStarPhi"] = render(f.d_star_phi);
  r.data["differentials"] = diff;
  r.data["verticalInvolutivityDefect"] = vertical_involutivity_defect(m);
  if (o.homology) {
    const auto h = h1_nilmanifold(*B);
    json g;
    g["group"] = h.render();
    g["freeRank"] = h.free_rank;
    g["torsion"] = h.torsion;
    g["torsionOrder"] = h.torsion_order();
    r.data["H1"] = g;
  }
}

void run_solve(const Ctx& ctx, RunReport& r, unsigned threads) {
  const auto& o = ctx.o;
  if (o.solve == "affine") {
    Vec4 a2;
    Vec4 a3;
    if (!o.a2.empty() && !o.a3.empty()) {
      a2 = parse_vec4(o.a2);
      a3 = parse_vec4(o.a3);
    } else {
      auto rng = sample_rng(ctx.seed(), 0);
      std::uniform_int_distribution<int> d(-2, 2);
      for (int k = 0; k < 4; ++k) a2(k) = d(rng);
      for (int k = 0; k < 4; ++k) a3(k) = d(rng);
    }
    const auto u = affine_fueter_section(a2, a3);
    const auto pts = probe_points(o.seed.value_or(0), ctx.samples(100, 10));
    double res = 0.0;
    for (const auto& x : pts) res = std::max(res, fueter_operator_flat(u, x).norm());
    r.residual("affine section is Fueter", "integer affine Fueter sections", res, ctx.tol(0.0));
    Mat A = *u.period;
    r.data["periodMatrix"] = to_json(A);
    return;
  }
  if (o.solve == "flat-harmonic") {
    const auto seed = ctx.seed();
    const auto probes = probe_points(seed + 1, 50);
    auto rng = sample_rng(seed, 0);
    const auto F = add_maps(to_map(harmonic_polynomial(rng)), newtonian_potential(Vec4(gaussian_vector(rng, 4))));
    const auto u = harmonic_to_fueter(F, probes);
    const auto pts = probe_points(seed + 2, ctx.samples(1000, 100));
    const double res = parallel_max(pts.size(), threads, [&](std::size_t i) {
      return fueter_operator_flat(u, pts[i]).norm();
    });
    r.residual("D F is Fueter for harmonic F", "harmonic functions give Fueter sections", res, ctx.tol(1e-10));
    r.data["points"] = pts.size();
    r.data["valueAtProbe"] = to_json(Vec(u.eval(pts.front())));
    return;
  }
  // su2
  const auto seed = ctx.seed();
  auto rng = sample_rng(seed, 0);
  const Eigen::Vector4d p = unit4(rng);
  const Eigen::Vector4d g = unit4(rng);
  const Vec4 v0(gaussian_vector(rng, 4));
  const auto F = su2_cot_potential(p, 1.0, 0.25, v0);
  const auto Fg = su2_left_translate(F, g);
  const std::size_t n = ctx.samples(100, 20);
  std::vector<double> res(n, 0.0);
  std::vector<char> skipped(n, 0);
  parallel_for(
      n,
      [&](std::size_t i) {
        auto r2 = sample_rng(seed + 1, i);
        const Eigen::Vector4d h = unit4(r2);
        try {
          res[i] = std::max(su2_shifted_fueter_residual(F, h).norm(), su2_shifted_fueter_residual(Fg, h).norm());
        } catch (const DomainError&) {
          skipped[i] = 1;
        }
      },
      threads);
  r.residual("(D + 2) f_p is Fueter on SU(2)", "Fueter sections on SU(2)", *std::max_element(res.begin(), res.end()),
             ctx.tol(1e-8));
  r.data["points"] = n;
  r.data["skipped"] = std::count(skipped.begin(), skipped.end(), 1);
  r.data["pole"] = to_json(Vec(p));
}

void run_energy(const Ctx& ctx, RunReport& r, unsigned threads) {
  const auto seed = ctx.seed();
  const auto& o = ctx.o;
  const Vec4 a2 = o.a2.empty() ? Vec4(1, 0, -1, 0) : parse_vec4(o.a2);
  const Vec4 a3 = o.a3.empty() ? Vec4(0, 2, 0, 1) : parse_vec4(o.a3);
  const auto base = affine_fueter_section(a2, a3);
  const std::size_t n = ctx.samples(200, 20);
  const ImmersionGrid grid{o.grid > 0 ? o.grid : (ctx.fast() ? 6 : 8)};
  json rows = json::array();
  for (double amp : o.amplitudes) {
    const auto m = minimization_experiment(base, n, amp, seed, grid, threads);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", amp);
    const std::string tag = std::string(" at amplitude ") + buf;
    r.residual("base is Fueter" + tag, "Fueter sections minimize energy", m.base_fueter_residual, ctx.tol(1e-12));
    r.flag("VE(base) <= VE(perturbed)" + tag, "Fueter sections minimize VE", m.ve_violations == 0 && m.skipped == 0);
    r.flag("(VE + Vol^H)(base) <= (VE + Vol^H)(perturbed)" + tag, "Fueter sections minimize VE + Vol^H",
           m.total_violations == 0 && m.skipped == 0);
    json row;
    row["amplitude"] = amp;
    row["samples"] = m.samples;
    row["skipped"] = m.skipped;
    row["veViolations"] = m.ve_violations;
    row["totalViolations"] = m.total_violations;
    row["baseVE"] = m.base_ve;
    row["baseTotal"] = m.base_total;
    row["minVEGap"] = m.min_ve_gap;
    row["minTotalGap"] = m.min_total_gap;
    row["restriction"] = m.restriction;
    rows.push_back(row);
  }
  r.data["grid"] = grid.n;
  r.data["experiments"] = rows;
}

void run_sweep(const Ctx& ctx, RunReport& r) {
  const auto seed = ctx.seed();
  const auto& o = ctx.o;
  if (!(o.rmin > 0.0) || !(o.rmax > o.rmin) || o.points < 2) throw UsageError("need 0 < rmin < rmax and points >= 2");
  const auto u = random_quadratic_map(seed, 0);
  auto rng = sample_rng(seed, 1);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  const Vec3 x(ux(rng), ux(rng), ux(rng));
  const auto s = radius_sweep(fm_transform(u), x, o.rmin, o.rmax, o.points);
  r.residual("normalized gap slope is -4", "deformed Donaldson-Thomas limit", std::abs(s.slope + 4.0), 0.1);
  r.csv_header = {"r", "rawResidual", "normalizedResidual"};
  json rows = json::array();
  for (std::size_t i = 0; i < s.radii.size(); ++i) {
    r.csv_rows.push_back({s.radii[i], s.rows[i].raw, s.rows[i].normalized});
    json row;
    row["r"] = s.radii[i];
    row["rawResidual"] = s.rows[i].raw;
    row["normalizedResidual"] = s.rows[i].normalized;
    row["instanton"] = s.rows[i].instanton;
    row["gap"] = s.rows[i].gap;
    rows.push_back(row);
  }
  r.data["x"] = to_json(Vec(x));
  r.data["slope"] = s.slope;
  r.data["rows"] = rows;
}

std::string command_echo(const std::vector<std::string>& args) {
  std::string s = "g2f";
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--timing" || a.rfind("--out=", 0) == 0 || a.rfind("--threads=", 0) == 0) continue;
    if (a == "--out" || a == "--threads") {
      ++i;
      continue;
    }
    s += " " + a;
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification driver for calibrated geometry on G2-manifolds", "g2f"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Seed for stochastic commands");
    sub->add_option("--samples", o.samples, "Sample count override")->check(CLI::PositiveNumber);
    sub->add_option("--tol", o.tol, "Tolerance override")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", o.out, "Write the report to this file");
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--profile", o.profile, "Tolerance profile")->check(CLI::IsMember({"strict", "fast"}));
    sub->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
    sub->add_flag("--timing", o.timing, "Include wall time in the report");
  };
  auto* verify = app.add_subcommand("verify", "Run an invariant suite");
  verify->add_option("suite", o.suite)->required()->check(
      CLI::IsMember({"algebra", "splitting", "fueter", "models", "pde", "fm"}));
  common(verify);
  auto* scan = app.add_subcommand("scan", "Calibration scans");
  scan->add_option("kind", o.scan)->required()->check(CLI::IsMember({"semical", "anisotropic"}));
  scan->add_option("--eps", o.eps, "Adiabatic parameter for semical (0 = phi0)")->check(CLI::NonNegativeNumber);
  common(scan);
  auto* model = app.add_subcommand("model", "Closedness flags of a catalog model");
  model->add_option("name", o.model)->required();
  model->add_option("--B", o.B, "Heisenberg matrix, \"a,b,c;d,e,f;g,h,i\"");
  model->add_flag("--homology", o.homology, "Compute H_1 of the nilmanifold");
  common(model);
  auto* solve = app.add_subcommand("solve", "Construct Fueter sections");
  solve->add_option("kind", o.solve)->required()->check(CLI::IsMember({"flat-harmonic", "affine", "su2"}));
  solve->add_option("--a2", o.a2, "Integer column a2 of the affine section");
  solve->add_option("--a3", o.a3, "Integer column a3 of the affine section");
  common(solve);
  auto* energy = app.add_subcommand("energy", "Energy minimization experiment");
  energy->add_option("--amplitude", o.amplitudes, "Perturbation amplitudes")->delimiter(',');
  energy->add_option("--grid", o.grid, "Quadrature grid size per axis")->check(CLI::PositiveNumber);
  energy->add_option("--a2", o.a2, "Base column a2");
  energy->add_option("--a3", o.a3, "Base column a3");
  common(energy);
  auto* fm = app.add_subcommand("fm", "Fourier-Mukai experiments");
  std::string fm_kind;
  fm->add_option("kind", fm_kind)->required()->check(CLI::IsMember({"sweep"}));
  fm->add_option("--rmin", o.rmin, "Smallest radius");
  fm->add_option("--rmax", o.rmax, "Largest radius");
  fm->add_option("--points", o.points, "Number of radii");
  common(fm);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  RunReport report;
  report.command = command_echo(args);
  report.seed = o.seed;
  report.profile = o.profile == "fast" ? Profile::fast : Profile::strict;
  const Ctx ctx{o};
  const auto start = std::chrono::steady_clock::now();
  try {
    if (verify->parsed()) {
      if (o.suite == "algebra") verify_algebra(ctx, report, o.threads);
      if (o.suite == "splitting") verify_splitting(ctx, report, o.threads);
      if (o.suite == "fueter") verify_fueter(ctx, report, o.threads);
      if (o.suite == "models") verify_models(ctx, report);
      if (o.suite == "pde") verify_pde(ctx, report, o.threads);
      if (o.suite == "fm") verify_fm(ctx, report, o.threads);
    } else if (scan->parsed()) {
      run_scan(ctx, report, o.threads);
    } else if (model->parsed()) {
      run_model(ctx, report);
    } else if (solve->parsed()) {
      run_solve(ctx, report, o.threads);
    } else if (energy->parsed()) {
      run_energy(ctx, report, o.threads);
    } else if (fm->parsed()) {
      run_sweep(ctx, report);
    }
  } catch (const UsageError& e) {
    err << "g2f: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "g2f: " << e.what() << "\n";
    return 1;
  }
  if (o.timing) report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string text = o.format == "csv" ? report.to_csv() : report.to_json().dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      err << "g2f: cannot write " << o.out << "\n";
      return 1;
    }
    f << text;
  }
  return report.all_pass() ? 0 : 1;
}

std::string run_to_string(const std::vector<std::string>& args, int* exit_code) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  if (exit_code) *exit_code = code;
  return out.str();
}

}  // namespace g2f::cli
