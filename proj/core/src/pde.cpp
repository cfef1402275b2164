#include "g2f/pde.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "g2f/error.hpp"
#include "g2f/random.hpp"

namespace g2f {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// d^alpha x^e at x, alpha and e exponent vectors.
template <int N>
double monomial_derivative(const std::array<int, 4>& e, const std::array<int, 4>& alpha,
                           const Eigen::Matrix<double, N, 1>& x) {
  double v = 1.0;
  for (int k = 0; k < N; ++k) {
    if (alpha[k] > e[k]) return 0.0;
    for (int r = 0; r < alpha[k]; ++r) v *= e[k] - r;
    v *= std::pow(x(k), e[k] - alpha[k]);
  }
  return v;
}

void enumerate_exponents(int vars, int degree, std::array<int, 4>& cur, int pos, int remaining,
                         std::vector<std::array<int, 4>>& out) {
  if (pos == vars) {
    out.push_back(cur);
    return;
  }
  for (int p = 0; p <= remaining; ++p) {
    cur[pos] = p;
    enumerate_exponents(vars, degree, cur, pos + 1, remaining - p, out);
  }
  cur[pos] = 0;
}

const std::array<Eigen::Matrix4d, 3>& J() { return JTriple::standard().J; }

// Quaternion coordinates <-> SU(2) matrices.
using C = std::complex<double>;
using M2 = Eigen::Matrix<C, 2, 2>;

M2 to_matrix(const Eigen::Vector4d& q) {
  M2 h;
  h << C(q(0), q(1)), C(q(2), q(3)), C(-q(2), q(3)), C(q(0), -q(1));
  return h;
}

Eigen::Vector4d to_coords(const M2& h) { return {h(0, 0).real(), h(0, 0).imag(), h(0, 1).real(), h(0, 1).imag()}; }

M2 generator(int i) {
  const C I(0.0, 1.0);
  M2 e;
  if (i == 0)
    e << 0.0, 1.0, -1.0, 0.0;
  else if (i == 1)
    e << 0.0, I, I, 0.0;
  else
    e << I, 0.0, 0.0, -I;
  return e;
}

Eigen::Matrix4d left_multiplication(const Eigen::Vector4d& g) {
  Eigen::Matrix4d G;
  for (int k = 0; k < 4; ++k) G.col(k) = su2_multiply(g, Eigen::Vector4d::Unit(k));
  return G;
}

Vec4 theta_contraction(const Mat& frame) {
  const Form& theta = standard_pieces().theta;
  Mat F4(7, 4);
  F4.rightCols(3) = frame;
  Vec4 out;
  for (int a = 0; a < 4; ++a) {
    F4.col(0) = Vec::Unit(7, 3 + a);
    out(a) = evaluate(theta, F4);
  }
  return out;
}

Mat graph_frame(const Mat43& d1) {
  Mat F(7, 3);
  F.topRows(3).setIdentity();
  F.bottomRows(4) = d1;
  return F;
}

void require_cs_model(const LieAlgebraModel& m) {
  bool abelian = true;
  for (const auto& a : m.c)
    for (const auto& b : a)
      for (double v : b) abelian = abelian && v == 0.0;
  if (abelian) return;
  if (!closedness_flags(m).theta_closed()) {
    throw PreconditionError("CS functional needs d Theta = 0; model " + m.name + " has d Theta != 0");
  }
  throw UnsupportedError("CS functional is implemented on the abelian model only");
}

// The straight path descends to T^3 x T^4 only between sections with the
// same period matrix; otherwise the face terms of Stokes do not cancel.
void require_same_class(const AnalyticMap& u0, const AnalyticMap& u1) {
  const Mat43 a = u0.period.value_or(Mat43::Zero());
  const Mat43 b = u1.period.value_or(Mat43::Zero());
  if (!u0.period || !u1.period || (a - b).cwiseAbs().maxCoeff() != 0.0) {
    throw PreconditionError("CS functional: endpoints must be periodic sections with equal period matrices");
  }
}

}  // namespace

template <int N>
Jet<N> PolynomialMap::evaluate(const Eigen::Matrix<double, N, 1>& x) const {
  if (N != vars) throw StructuralError("PolynomialMap: variable count mismatch");
  Jet<N> j;
  std::array<int, 4> a{};
  for (const auto& t : terms) {
    a.fill(0);
    j.value += monomial_derivative<N>(t.exponent, a, x) * t.coeff;
    for (int i = 0; i < N; ++i) {
      a.fill(0);
      ++a[i];
      j.d1.col(i) += monomial_derivative<N>(t.exponent, a, x) * t.coeff;
      for (int k = 0; k < N; ++k) {
        ++a[k];
        const double d2 = monomial_derivative<N>(t.exponent, a, x);
        for (int c = 0; c < 4; ++c) j.d2[c](i, k) += d2 * t.coeff(c);
        for (int l = 0; l < N; ++l) {
          ++a[l];
          const double d3 = monomial_derivative<N>(t.exponent, a, x);
          for (int c = 0; c < 4; ++c) j.d3[c][i](k, l) += d3 * t.coeff(c);
          --a[l];
        }
        --a[k];
      }
    }
  }
  return j;
}

template Jet<3> PolynomialMap::evaluate<3>(const Eigen::Matrix<double, 3, 1>&) const;
template Jet<4> PolynomialMap::evaluate<4>(const Eigen::Matrix<double, 4, 1>&) const;

PolynomialMap PolynomialMap::random(std::mt19937_64& rng, int vars, int degree) {
  PolynomialMap p;
  p.vars = vars;
  std::vector<std::array<int, 4>> exps;
  std::array<int, 4> cur{};
  enumerate_exponents(vars, degree, cur, 0, degree, exps);
  for (const auto& e : exps) p.terms.push_back({e, gaussian_vector(rng, 4)});
  return p;
}

AnalyticMap to_map(const PolynomialMap& p, const std::string& label) {
  if (p.vars != 3) throw StructuralError("to_map: need a polynomial in 3 variables");
  AnalyticMap m;
  m.jet = [p](const Vec3& x) { return p.evaluate<3>(x); };
  m.label = label;
  return m;
}

AmbientMap to_ambient(const PolynomialMap& p, const std::string& label) {
  if (p.vars != 4) throw StructuralError("to_ambient: need a polynomial in 4 variables");
  AmbientMap m;
  m.jet = [p](const Eigen::Vector4d& x) { return p.evaluate<4>(x); };
  m.label = label;
  return m;
}

AnalyticMap affine_map(const Mat43& A, const Vec4& b) {
  AnalyticMap m;
  m.jet = [A, b](const Vec3& x) {
    Jet3 j;
    j.value = A * x + b;
    j.d1 = A;
    return j;
  };
  m.period = A;
  m.label = "affine";
  return m;
}

AnalyticMap affine_fueter_section(const Vec4& a2, const Vec4& a3, const Vec4& b) {
  Mat43 A;
  A.col(0) = -J()[2] * a2 + J()[1] * a3;
  A.col(1) = a2;
  A.col(2) = a3;
  AnalyticMap m = affine_map(A, b);
  m.label = "affine-fueter";
  return m;
}

AnalyticMap newtonian_potential(const Vec4& v0) {
  AnalyticMap m;
  m.jet = [v0](const Vec3& x) {
    const double r = x.norm();
    if (r == 0.0) throw DomainError("newtonian_potential: singular at the origin");
    const double k = 1.0 / (4.0 * std::numbers::pi);
    const double r3 = r * r * r;
    const double r5 = r3 * r * r;
    const double r7 = r5 * r * r;
    Jet3 j;
    j.value = (k / r) * v0;
    for (int i = 0; i < 3; ++i) {
      j.d1.col(i) = (-k * x(i) / r3) * v0;
      for (int a = 0; a < 3; ++a) {
        const double d2 = k * (3.0 * x(i) * x(a) / r5 - (i == a ? 1.0 / r3 : 0.0));
        for (int c = 0; c < 4; ++c) j.d2[c](i, a) = d2 * v0(c);
        for (int b = 0; b < 3; ++b) {
          double d3 = -15.0 * x(i) * x(a) * x(b) / r7;
          d3 += 3.0 * ((i == a ? x(b) : 0.0) + (i == b ? x(a) : 0.0) + (a == b ? x(i) : 0.0)) / r5;
          for (int c = 0; c < 4; ++c) j.d3[c][i](a, b) = k * d3 * v0(c);
        }
      }
    }
    return j;
  };
  m.label = "newtonian";
  return m;
}

AnalyticMap add_maps(const AnalyticMap& u, const AnalyticMap& p, double amplitude) {
  AnalyticMap m;
  m.jet = [u, p, amplitude](const Vec3& x) {
    Jet3 a = u.jet(x);
    const Jet3 b = p.jet(x);
    a.value += amplitude * b.value;
    a.d1 += amplitude * b.d1;
    for (int c = 0; c < 4; ++c) {
      a.d2[c] += amplitude * b.d2[c];
      for (int i = 0; i < 3; ++i) a.d3[c][i] += amplitude * b.d3[c][i];
    }
    a.order = std::min(a.order, b.order);
    return a;
  };
  m.order = std::min(u.order, p.order);
  if (u.period && p.period) m.period = *u.period + amplitude * *p.period;
  m.label = u.label + "+perturbation";
  return m;
}

Vec4 fueter_operator_flat(const Jet3& j) {
  Vec4 out = Vec4::Zero();
  for (int i = 0; i < 3; ++i) out += J()[i] * j.d1.col(i);
  return out;
}

Vec4 fueter_operator_flat(const AnalyticMap& u, const Vec3& x) { return fueter_operator_flat(u.jet(x)); }

AnalyticMap apply_flat_D(const AnalyticMap& F) {
  if (F.order < 1) throw UnsupportedError("apply_flat_D: first-order jets required");
  AnalyticMap m;
  m.order = F.order - 1;
  m.jet = [F](const Vec3& x) {
    const Jet3 f = F.jet(x);
    Jet3 j;
    j.order = f.order - 1;
    j.value = fueter_operator_flat(f);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) {
        Vec4 dik;
        for (int c = 0; c < 4; ++c) dik(c) = f.d2[c](i, k);
        j.d1.col(k) += J()[i] * dik;
        for (int l = 0; l < 3; ++l) {
          Vec4 dikl;
          for (int c = 0; c < 4; ++c) dikl(c) = f.d3[c][i](k, l);
          const Vec4 img = J()[i] * dikl;
          for (int c = 0; c < 4; ++c) j.d2[c](k, l) += img(c);
        }
      }
    }
    return j;
  };
  m.label = "D(" + F.label + ")";
  return m;
}

Vec4 flat_laplacian(const Jet3& j) {
  Vec4 out;
  for (int c = 0; c < 4; ++c) out(c) = j.d2[c].trace();
  return out;
}

Vec4 d_squared_residual(const AnalyticMap& F, const Vec3& x) {
  if (F.order < 2) throw UnsupportedError("d_squared_residual: second-order jets required");
  return fueter_operator_flat(apply_flat_D(F), x) + flat_laplacian(F.jet(x));
}

AnalyticMap harmonic_to_fueter(const AnalyticMap& F, const std::vector<Vec3>& probes) {
  if (F.order < 2) throw UnsupportedError("harmonic_to_fueter: second-order jets required");
  double worst = 0.0;
  for (const auto& x : probes) {
    const Jet3 j = F.jet(x);
    double scale = 1.0;
    for (const auto& h : j.d2) scale = std::max(scale, h.cwiseAbs().maxCoeff());
    worst = std::max(worst, flat_laplacian(j).cwiseAbs().maxCoeff() / scale);
  }
  if (worst > 1e-10) {
    throw PreconditionError("harmonic_to_fueter: input is not harmonic, max |Delta F| = " + std::to_string(worst));
  }
  return apply_flat_D(F);
}

Vec4 graph_fueter_residual(const LieAlgebraModel& m, const AnalyticMap& u, const Vec3& x) {
  if (m.name == "product-flat" || m.name.rfind("heisenberg", 0) == 0) return fueter_operator_flat(u, x);
  throw UnsupportedError("graph_fueter_residual: no flat graph operator on " + m.name);
}

// ---- SU(2) ----

const std::array<Eigen::Matrix4d, 3>& su2_left_fields() {
  static const std::array<Eigen::Matrix4d, 3> L = [] {
    std::array<Eigen::Matrix4d, 3> out;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 4; ++k) out[i].col(k) = to_coords(to_matrix(Eigen::Vector4d::Unit(k)) * generator(i));
    return out;
  }();
  return L;
}

Eigen::Vector4d su2_multiply(const Eigen::Vector4d& g, const Eigen::Vector4d& h) {
  return to_coords(to_matrix(g) * to_matrix(h));
}

Eigen::Vector4d su2_flow(const Eigen::Vector4d& h, int i, double t) {
  return std::cos(t) * h + std::sin(t) * (su2_left_fields()[i] * h);
}

SU2Jet su2_jet(const AmbientMap& f, const Eigen::Vector4d& h) {
  if (f.order < 2) throw UnsupportedError("su2_jet: second-order ambient jets required");
  const auto& L = su2_left_fields();
  const Jet4 a = f.jet(h);
  SU2Jet j;
  j.value = a.value;
  std::array<Eigen::Vector4d, 3> X;
  for (int i = 0; i < 3; ++i) {
    X[i] = L[i] * h;
    j.d1.col(i) = a.d1 * X[i];
  }
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector4d second = L[k] * X[i];
      for (int c = 0; c < 4; ++c) j.d2[i][k](c) = X[i].dot(a.d2[c] * X[k]) + a.d1.row(c).dot(second);
    }
  return j;
}

Vec4 su2_fueter_operator(const SU2Jet& j) {
  Vec4 out = Vec4::Zero();
  for (int i = 0; i < 3; ++i) out += J()[i] * j.d1.col(i);
  return out;
}

Vec4 su2_fueter_operator(const AmbientMap& u, const Eigen::Vector4d& h) { return su2_fueter_operator(su2_jet(u, h)); }

Vec4 su2_laplacian(const SU2Jet& j) { return j.d2[0][0] + j.d2[1][1] + j.d2[2][2]; }

Vec4 su2_identity_residual(const AmbientMap& F, const Eigen::Vector4d& h) {
  const SU2Jet j = su2_jet(F, h);
  Vec4 dd = Vec4::Zero();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) dd += J()[i] * (J()[k] * j.d2[i][k]);
  return dd + su2_laplacian(j) + 2.0 * su2_fueter_operator(j);
}

Vec4 su2_shifted_fueter_residual(const AmbientMap& F, const Eigen::Vector4d& h) {
  const SU2Jet j = su2_jet(F, h);
  Vec4 out = Vec4::Zero();
  for (int k = 0; k < 3; ++k) {
    // e_k u = sum_i J_i e_k(e_i F) + 2 e_k F
    Vec4 eku = 2.0 * j.d1.col(k);
    for (int i = 0; i < 3; ++i) eku += J()[i] * j.d2[k][i];
    out += J()[k] * eku;
  }
  return out;
}

AmbientMap su2_cot_potential(const Eigen::Vector4d& p, double A, double B, const Vec4& v0) {
  AmbientMap m;
  m.jet = [p, A, B, v0](const Eigen::Vector4d& q) {
    const double s = p.dot(q);
    if (std::abs(s) >= std::cos(1e-3)) throw DomainError("su2_cot_potential: point within 1e-3 of +-p");
    const double w = 1.0 - s * s;
    const double g0 = A * s / std::sqrt(w) + B;
    const double g1 = A * std::pow(w, -1.5);
    const double g2 = A * 3.0 * s * std::pow(w, -2.5);
    const double g3 = A * (3.0 * std::pow(w, -2.5) + 15.0 * s * s * std::pow(w, -3.5));
    Jet4 j;
    j.value = g0 * v0;
    j.d1 = v0 * (g1 * p.transpose());
    for (int c = 0; c < 4; ++c) {
      j.d2[c] = g2 * v0(c) * p * p.transpose();
      for (int i = 0; i < 4; ++i) j.d3[c][i] = g3 * v0(c) * p(i) * p * p.transpose();
    }
    return j;
  };
  m.label = "cot-potential";
  return m;
}

AmbientMap su2_left_translate(const AmbientMap& f, const Eigen::Vector4d& g) {
  const Eigen::Matrix4d G = left_multiplication(g);
  AmbientMap m;
  m.order = f.order;
  m.jet = [f, G](const Eigen::Vector4d& q) {
    const Jet4 a = f.jet(G * q);
    Jet4 j;
    j.order = a.order;
    j.value = a.value;
    j.d1 = a.d1 * G;
    for (int c = 0; c < 4; ++c) {
      j.d2[c] = G.transpose() * a.d2[c] * G;
      for (int i = 0; i < 4; ++i) {
        Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
        for (int ip = 0; ip < 4; ++ip) acc += G(ip, i) * (G.transpose() * a.d3[c][ip] * G);
        j.d3[c][i] = acc;
      }
    }
    return j;
  };
  m.label = f.label + "(g.)";
  return m;
}

// ---- Immersions ----

Immersion graph_immersion(const AnalyticMap& u) {
  return [u](const Vec3& x) {
    const Jet3 j = u.jet(x);
    ImmersionJet out;
    out.value.head(3) = x;
    out.value.tail(4) = j.value;
    out.d1.topRows(3).setIdentity();
    out.d1.bottomRows(4) = j.d1;
    return out;
  };
}

Immersion compose(const Immersion& iota, const BaseMap& f) {
  return [iota, f](const Vec3& x) {
    const auto [y, Jf] = f(x);
    ImmersionJet j = iota(y);
    j.d1 = (j.d1 * Jf).eval();
    return j;
  };
}

BaseMap shear_map(double amplitude) {
  return [amplitude](const Vec3& x) {
    Vec3 y = x;
    y(0) += amplitude * std::sin(kTwoPi * x(1));
    Eigen::Matrix3d Jf = Eigen::Matrix3d::Identity();
    Jf(0, 1) = amplitude * kTwoPi * std::cos(kTwoPi * x(1));
    return std::make_pair(y, Jf);
  };
}

BaseMap translation_map(const Vec3& shift) {
  return [shift](const Vec3& x) { return std::make_pair(Vec3(x + shift), Eigen::Matrix3d::Identity().eval()); };
}

BaseMap scaling_map(int c) {
  return [c](const Vec3& x) {
    return std::make_pair(Vec3(static_cast<double>(c) * x), (static_cast<double>(c) * Eigen::Matrix3d::Identity()).eval());
  };
}

std::vector<Vec3> ImmersionGrid::points() const {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) pts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n,
                                                   static_cast<double>(k) / n);
  return pts;
}

EnergyReport immersion_energies(const Immersion& iota, const ImmersionGrid& grid, unsigned threads) {
  const auto pts = grid.points();
  struct Density {
    double vol_h, vol, ve1, ve2, ve3, dirichlet, identity, fueter;
  };
  std::vector<Density> dens(pts.size());
  parallel_for(
      pts.size(),
      [&](std::size_t p) {
        const ImmersionJet j = iota(pts[p]);
        const Eigen::Matrix3d Hm = j.d1.topRows(3);
        const Eigen::Matrix<double, 4, 3> Vm = j.d1.bottomRows(4);
        const double det_h = Hm.determinant();
        if (std::abs(det_h) < 1e-12) {
          throw NotProjectableError("immersion not projectable at grid point (" + std::to_string(pts[p](0)) + ", " +
                                    std::to_string(pts[p](1)) + ", " + std::to_string(pts[p](2)) + ")");
        }
        GraphPlane g;
        g.T = (Vm * Hm.inverse()).transpose();
        const auto ve = ve_series(g, 3);
        const Eigen::Matrix3d gram = j.d1.transpose() * j.d1;
        const Eigen::Matrix3d gh = Hm.transpose() * Hm;
        const double dirichlet_h = 0.5 * (gh.inverse() * gram).trace();
        Density d{};
        d.vol_h = std::abs(det_h);
        d.vol = std::sqrt(gram.determinant());
        d.ve1 = ve[1] * d.vol_h;
        d.ve2 = ve[2] * d.vol_h;
        d.ve3 = ve[3] * d.vol_h;
        d.dirichlet = dirichlet_h * d.vol_h;
        d.identity = std::abs(dirichlet_h - (1.5 + ve[1])) / std::max(1.0, dirichlet_h);
        d.fueter = fueter_vector(g).norm();
        dens[p] = d;
      },
      threads);
  EnergyReport r;
  const double w = grid.weight();
  for (const auto& d : dens) {
    r.vol_h += w * d.vol_h;
    r.vol += w * d.vol;
    r.ve += w * d.ve1;
    r.ve2 += w * d.ve2;
    r.ve3 += w * d.ve3;
    r.dirichlet += w * d.dirichlet;
    r.max_pointwise_identity_residual = std::max(r.max_pointwise_identity_residual, d.identity);
    r.max_fueter_residual = std::max(r.max_fueter_residual, d.fueter);
  }
  r.total_energy = 1.5 * r.vol_h + r.ve;
  return r;
}

long long base_map_degree(int c, int n) {
  if (c == 0) return 0;
  // Grid points k/n with c k / n integral, per axis.
  long long per_axis = 0;
  for (int k = 0; k < n; ++k)
    if ((static_cast<long long>(c) * k) % n == 0) ++per_axis;
  return per_axis * per_axis * per_axis;
}

AnalyticMap trig_perturbation(std::uint64_t seed, std::uint64_t index, int modes, int kmax, int grid_n) {
  auto rng = sample_rng(seed, index);
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  struct Mode {
    Vec3 k;
    Vec4 a, b;
  };
  std::vector<Mode> ms;
  while (static_cast<int>(ms.size()) < modes) {
    Vec3 k(kd(rng), kd(rng), kd(rng));
    if (k.isZero()) continue;
    ms.push_back({k, gaussian_vector(rng, 4), gaussian_vector(rng, 4)});
  }
  auto raw = [ms](const Vec3& x) {
    Jet3 j;
    for (const auto& m : ms) {
      const Vec3 w = kTwoPi * m.k;
      const double th = w.dot(x);
      const double c = std::cos(th);
      const double s = std::sin(th);
      j.value += c * m.a + s * m.b;
      j.d1 += (-s * m.a + c * m.b) * w.transpose();
      const Vec4 second = -c * m.a - s * m.b;
      const Vec4 third = s * m.a - c * m.b;
      for (int q = 0; q < 4; ++q) {
        j.d2[q] += second(q) * w * w.transpose();
        for (int i = 0; i < 3; ++i) j.d3[q][i] += third(q) * w(i) * w * w.transpose();
      }
    }
    return j;
  };
  double sup = 0.0;
  for (const auto& x : ImmersionGrid{grid_n}.points()) sup = std::max(sup, raw(x).value.norm());
  const double scale = sup > 0.0 ? 1.0 / sup : 1.0;
  AnalyticMap m;
  m.jet = [raw, scale](const Vec3& x) {
    Jet3 j = raw(x);
    j.value *= scale;
    j.d1 *= scale;
    for (int q = 0; q < 4; ++q) {
      j.d2[q] *= scale;
      for (int i = 0; i < 3; ++i) j.d3[q][i] *= scale;
    }
    return j;
  };
  m.period = Mat43::Zero();
  m.label = "trig";
  return m;
}

MinimizationReport minimization_experiment(const AnalyticMap& base, std::size_t n, double amplitude,
                                           std::uint64_t seed, const ImmersionGrid& grid, unsigned threads) {
  MinimizationReport r;
  r.samples = n;
  r.amplitude = amplitude;
  const EnergyReport e0 = immersion_energies(graph_immersion(base), grid, 1);
  r.base_ve = e0.ve;
  r.base_total = e0.ve + e0.vol_h;
  r.base_fueter_residual = e0.max_fueter_residual;
  struct Slot {
    bool skipped = false;
    double ve_gap = 0.0;
    double total_gap = 0.0;
  };
  std::vector<Slot> slots(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const AnalyticMap u = add_maps(base, trig_perturbation(seed, i, 4, 2, grid.n), amplitude);
        try {
          const EnergyReport e = immersion_energies(graph_immersion(u), grid, 1);
          slots[i].ve_gap = e.ve - r.base_ve;
          slots[i].total_gap = (e.ve + e.vol_h) - r.base_total;
        } catch (const NotProjectableError&) {
          slots[i].skipped = true;
        }
      },
      threads);
  bool first = true;
  for (const auto& s : slots) {
    if (s.skipped) {
      ++r.skipped;
      continue;
    }
    if (s.ve_gap < -r.tolerance) ++r.ve_violations;
    if (s.total_gap < -r.tolerance) ++r.total_violations;
    r.min_ve_gap = first ? s.ve_gap : std::min(r.min_ve_gap, s.ve_gap);
    r.min_total_gap = first ? s.total_gap : std::min(r.min_total_gap, s.total_gap);
    first = false;
  }
  return r;
}

double reparametrization_residual(const Immersion& iota, const BaseMap& f, const ImmersionGrid& grid) {
  return std::abs(immersion_energies(compose(iota, f), grid).ve - immersion_energies(iota, grid).ve);
}

// ---- CS functional ----

namespace {

// 4-point Gauss-Legendre on [0, 1]: exact for the cubic t-dependence.
constexpr std::array<double, 4> kGLNodes{0.5 * (1.0 - 0.8611363115940526), 0.5 * (1.0 - 0.3399810435848563),
                                         0.5 * (1.0 + 0.3399810435848563), 0.5 * (1.0 + 0.8611363115940526)};
constexpr std::array<double, 4> kGLWeights{0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461,
                                           0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538};

double cs_with_offset(const AnalyticMap& u0, const AnalyticMap& u1, const AnalyticMap* Z, double s,
                      const ImmersionGrid& grid) {
  const Form& theta = standard_pieces().theta;
  const auto pts = grid.points();
  std::vector<double> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t p) {
    const Jet3 a = u0.jet(pts[p]);
    Jet3 b = u1.jet(pts[p]);
    if (Z) {
      const Jet3 z = Z->jet(pts[p]);
      b.value += s * z.value;
      b.d1 += s * z.d1;
    }
    double acc = 0.0;
    Mat F(7, 4);
    for (std::size_t q = 0; q < kGLNodes.size(); ++q) {
      const double t = kGLNodes[q];
      F.col(0).setZero();
      F.col(0).tail(4) = b.value - a.value;
      F.rightCols(3) = graph_frame(a.d1 + t * (b.d1 - a.d1));
      acc += kGLWeights[q] * evaluate(theta, F);
    }
    vals[p] = acc;
  });
  double total = 0.0;
  for (double v : vals) total += v;
  return total * grid.weight();
}

}  // namespace

double cs_functional(const AnalyticMap& u0, const AnalyticMap& u1, const ImmersionGrid& grid,
                     const LieAlgebraModel& m) {
  require_cs_model(m);
  require_same_class(u0, u1);
  return cs_with_offset(u0, u1, nullptr, 0.0, grid);
}

CSVariation cs_first_variation(const AnalyticMap& u0, const AnalyticMap& u1, const AnalyticMap& Z,
                               const ImmersionGrid& grid, double h, const LieAlgebraModel& m) {
  require_cs_model(m);
  require_same_class(u0, u1);
  if (Z.period && !Z.period->isZero()) throw PreconditionError("CS variation: Z must be periodic");
  CSVariation v;
  // CS is a polynomial of degree <= 4 in s, so the 5-point stencil is exact.
  const double fp2 = cs_with_offset(u0, u1, &Z, 2.0 * h, grid);
  const double fp1 = cs_with_offset(u0, u1, &Z, h, grid);
  const double fm1 = cs_with_offset(u0, u1, &Z, -h, grid);
  const double fm2 = cs_with_offset(u0, u1, &Z, -2.0 * h, grid);
  v.numeric = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
  const auto pts = grid.points();
  double acc = 0.0;
  for (const auto& x : pts) acc += Z.jet(x).value.dot(theta_contraction(graph_frame(u1.jet(x).d1)));
  v.boundary = acc * grid.weight();
  return v;
}

AnalyticMap cs_adversarial_variation(const AnalyticMap& u1, const ImmersionGrid& grid) {
  Vec4 mean = Vec4::Zero();
  for (const auto& x : grid.points()) mean += theta_contraction(graph_frame(u1.jet(x).d1));
  mean *= grid.weight();
  AnalyticMap z = affine_map(Mat43::Zero(), mean);
  z.label = "adversarial";
  return z;
}

}  // namespace g2f
