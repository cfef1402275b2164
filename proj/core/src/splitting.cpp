#include "g2f/splitting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "g2f/error.hpp"
#include "g2f/random.hpp"

namespace g2f {

namespace {

constexpr std::uint32_t kVerticalMask = 0b1111000u;  // indices 4..7
constexpr double kFrameTol = 1e-12;
constexpr double kProjectableTol = 1e-10;

Mat standard_block(int first, int count) {
  Mat m = Mat::Zero(7, count);
  for (int j = 0; j < count; ++j) m(first + j, j) = 1.0;
  return m;
}

std::vector<Form> split_by_vertical_degree(const Form& a) {
  std::vector<Form> out(a.degree() + 1, Form(a.dim(), a.degree()));
  for (const auto& t : a.terms()) {
    const int q = std::popcount(t.mask & kVerticalMask);
    if (q < static_cast<int>(out.size())) out[q].add(t.mask, t.coeff);
  }
  return out;
}

}  // namespace

Splitting::Splitting(const Mat& h_frame, const Mat& v_frame, G2Structure g2)
    : h_frame_(h_frame), v_frame_(v_frame), g2_(std::move(g2)) {
  if (h_frame.rows() != 7 || h_frame.cols() != 3 || v_frame.rows() != 7 || v_frame.cols() != 4) {
    throw StructuralError("splitting needs a 7x3 horizontal and a 7x4 vertical frame");
  }
  frame_.resize(7, 7);
  frame_ << h_frame_, v_frame_;
  const double ortho = (frame_.transpose() * g2_.metric * frame_ - Mat::Identity(7, 7)).cwiseAbs().maxCoeff();
  if (ortho > kFrameTol) {
    throw PreconditionError("splitting frame is not orthonormal (residual " + std::to_string(ortho) + ")");
  }
  const double calib = evaluate(g2_.phi, h_frame_);
  const double assoc = chi(h_frame_.col(0), h_frame_.col(1), h_frame_.col(2), g2_).norm();
  if (std::abs(calib - 1.0) > 1e-10 || assoc > 1e-10) {
    throw PreconditionError("horizontal distribution is not an associative plane with phi(H) = +1");
  }
  frame_inv_ = frame_.inverse();
  g2_frame_ = G2Structure{pullback(frame_, g2_.phi), Mat::Identity(7, 7), pullback(frame_, g2_.vol),
                          pullback(frame_, g2_.star_phi),
                          {"e1", "e2", "e3", "eta4", "eta5", "eta6", "eta7"}};
  standard_type_ = approx_equal(g2_frame_.phi, standard_phi()) &&
                   approx_equal(g2_frame_.star_phi, standard_star_phi());

  phi_pieces_ = split_by_vertical_degree(g2_frame_.phi);
  std::vector<Form> comps;
  for (int k = 0; k < 7; ++k) comps.push_back(-interior(Vec::Unit(7, k), g2_frame_.star_phi));
  chi_form_ = VectorValuedForm(comps);
  chi_pieces_.clear();
  for (int q = 0; q <= 3; ++q) {
    std::vector<Form> piece;
    for (int k = 0; k < 7; ++k) piece.push_back(split_by_vertical_degree(comps[k])[q]);
    chi_pieces_.emplace_back(piece);
  }
}

const Splitting& Splitting::standard() {
  static const Splitting s(standard_block(0, 3), standard_block(3, 4), G2Structure::standard());
  return s;
}

Mat Splitting::to_frame_coords(const Mat& ambient) const { return frame_inv_ * ambient; }

Form Splitting::to_frame_coords(const Form& ambient) const { return pullback(frame_, ambient); }

Mat GraphPlane::frame() const {
  Mat F(7, 3);
  F.topRows(3) = Mat::Identity(3, 3);
  F.bottomRows(4) = T.transpose();
  return F;
}

Mat GraphPlane::ambient_frame(const Splitting& S) const { return S.frame() * frame(); }

Plane::Plane(Mat vectors, bool oriented_) : span(std::move(vectors)), oriented(oriented_) {
  if (span.rows() != 7 || span.cols() < 1 || span.cols() > 3) {
    throw StructuralError("plane needs 1..3 vectors in R^7");
  }
  Eigen::JacobiSVD<Mat> svd(span);
  if (svd.singularValues().minCoeff() <= 1e-10) {
    throw PreconditionError("plane spanning vectors are not independent");
  }
}

GraphResult graph_from_plane(const Plane& p, const Splitting& S) {
  if (p.dim() != 3) throw StructuralError("graph_from_plane: need a 3-plane");
  const Mat X = S.to_frame_coords(p.span);
  const Mat Hm = X.topRows(3);
  const Mat Vm = X.bottomRows(4);
  Eigen::JacobiSVD<Mat> svd(Hm);
  if (svd.singularValues().minCoeff() <= kProjectableTol) {
    throw NotProjectableError("not horizontally projectable: p_H restricted to the plane is singular");
  }
  GraphResult r;
  r.graph.T = (Vm * Hm.inverse()).transpose();
  r.orientation_sign = Hm.determinant() > 0.0 ? 1 : -1;
  return r;
}

Form beta_of(const GraphPlane& g) {
  Form beta(7, 2);
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 4; ++a) beta.add((1u << i) | (1u << (3 + a)), g.T(i, a));
  return beta;
}

Mat horizontal_metric(const Plane& p, const Splitting& S) {
  if (p.dim() != 3) throw StructuralError("horizontal_metric: need a 3-plane");
  const Mat Hm = S.to_frame_coords(p.span).topRows(3);
  Eigen::JacobiSVD<Mat> svd(Hm);
  if (svd.singularValues().minCoeff() <= kProjectableTol) {
    throw NotProjectableError("not horizontally projectable");
  }
  return Hm.transpose() * Hm;
}

double horizontal_volume(const Plane& p, const Splitting& S) {
  return std::sqrt(horizontal_metric(p, S).determinant());
}

double plane_volume(const Plane& p, const Splitting& S) {
  return std::sqrt(wedge_norm_sq(p.span, S.g2().metric));
}

std::vector<double> ve_series(const GraphPlane& g, int kmax) {
  if (kmax < 0) throw StructuralError("ve_series: kmax must be >= 0");
  const Eigen::Matrix3d G = g.T * g.T.transpose();
  const Eigen::Vector3d lam = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(G).eigenvalues();
  std::vector<double> binom(kmax + 1);
  binom[0] = 1.0;
  for (int k = 1; k <= kmax; ++k) binom[k] = binom[k - 1] * (0.5 - (k - 1)) / k;
  std::vector<double> acc(kmax + 1, 0.0);
  acc[0] = 1.0;
  for (int i = 0; i < 3; ++i) {
    std::vector<double> next(kmax + 1, 0.0);
    double pw = 1.0;
    for (int k = 0; k <= kmax; ++k, pw *= lam(i)) {
      const double c = binom[k] * pw;
      for (int j = 0; j + k <= kmax; ++j) next[j + k] += acc[j] * c;
    }
    acc = std::move(next);
  }
  return acc;
}

double pv_power_norm_sq(const GraphPlane& g, int k) {
  if (k < 0) throw StructuralError("pv_power_norm_sq: k must be >= 0");
  if (k == 0) return 1.0;
  if (k > 3) return 0.0;
  Form rows[3] = {Form::one_form(g.T.row(0).transpose()), Form::one_form(g.T.row(1).transpose()),
                  Form::one_form(g.T.row(2).transpose())};
  double sum = 0.0;
  for (std::uint32_t subset = 1; subset < 8u; ++subset) {
    if (std::popcount(subset) != k) continue;
    Form p = Form::scalar(4, 1.0);
    for (int i = 0; i < 3; ++i)
      if (subset >> i & 1u) p = wedge(p, rows[i]);
    sum += inner(p, p);
  }
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return fact * sum;
}

std::vector<double> ve_recursive(const GraphPlane& g, int kmax) {
  if (kmax < 0) throw StructuralError("ve_recursive: kmax must be >= 0");
  std::vector<double> ve(kmax + 1, 0.0);
  ve[0] = 1.0;
  double fact = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    fact *= k;
    const double ck = pv_power_norm_sq(g, k) / fact;
    double cross = 0.0;
    for (int i = 1; i < k; ++i) cross += ve[i] * ve[k - i];
    ve[k] = 0.5 * (ck - cross);
  }
  return ve;
}

std::vector<Form> decompose_form(const Form& a, const Splitting& S) {
  if (a.dim() != 7) throw StructuralError("decompose_form: need a form on R^7");
  return split_by_vertical_degree(S.to_frame_coords(a));
}

std::vector<VectorValuedForm> decompose_form(const VectorValuedForm& a, const Splitting& S) {
  std::vector<std::vector<Form>> by_degree(a.degree() + 1);
  for (const auto& c : a.components()) {
    auto parts = decompose_form(c, S);
    for (std::size_t q = 0; q < parts.size(); ++q) by_degree[q].push_back(parts[q]);
  }
  std::vector<VectorValuedForm> out;
  for (auto& parts : by_degree) out.emplace_back(std::move(parts));
  return out;
}

Form adiabatic_family(const Form& a, const Splitting& S, double eps) {
  if (!(eps > 0.0)) throw DomainError("adiabatic_family: eps must be positive");
  const auto parts = decompose_form(a, S);
  Form out(a.dim(), a.degree());
  const double r = std::sqrt(eps);
  for (std::size_t q = 0; q < parts.size(); ++q) out += std::pow(r, static_cast<double>(q)) * parts[q];
  return out;
}

VectorValuedForm adiabatic_family(const VectorValuedForm& a, const Splitting& S, double eps) {
  std::vector<Form> comps;
  for (const auto& c : a.components()) comps.push_back(adiabatic_family(c, S, eps));
  return VectorValuedForm(comps);
}

Mat adiabatic_metric(const Splitting&, double eps) {
  if (!(eps > 0.0)) throw DomainError("adiabatic_metric: eps must be positive");
  Mat g = Mat::Identity(7, 7);
  for (int a = 3; a < 7; ++a) g(a, a) = eps;
  return g;
}

std::vector<Vec> chi_pieces_on(const GraphPlane& g, const Splitting& S) {
  const Mat F = g.frame();
  std::vector<Vec> out;
  for (const auto& piece : S.chi_pieces()) out.push_back(piece.evaluate(F));
  return out;
}

std::vector<double> phi_pieces_on(const GraphPlane& g, const Splitting& S) {
  const Mat F = g.frame();
  std::vector<double> out;
  for (const auto& piece : S.phi_pieces()) out.push_back(evaluate(piece, F));
  return out;
}

double omega_on(const GraphPlane& g, const Splitting& S) {
  return evaluate(S.phi_pieces()[2], g.frame());
}

double LadderReport::max_residual() const {
  double m = 0.0;
  for (const auto* v : {&even, &odd, &ladder})
    for (double r : *v) m = std::max(m, std::abs(r));
  return m;
}

LadderReport equality_ladder(const GraphPlane& g, int lmax, double tol, const Splitting& S) {
  if (lmax < 0) throw StructuralError("equality_ladder: lmax must be >= 0");
  const auto alpha = phi_pieces_on(g, S);
  const auto chis = chi_pieces_on(g, S);
  const auto ve = ve_series(g, std::max(lmax, 3) + 1);
  auto a = [&](int i) { return (i >= 0 && i <= 3) ? alpha[i] : 0.0; };
  auto c = [&](int i) -> Vec { return (i >= 0 && i <= 3) ? chis[i] : Vec::Zero(7); };
  auto pair_sum = [&](int total) {
    double s = 0.0;
    for (int i = 0; i <= total; ++i) s += a(i) * a(total - i) + c(i).dot(c(total - i));
    return s;
  };
  // Scale so the residuals are relative for large planes.
  const double scale = std::max(1.0, std::pow(1.0 + g.T.squaredNorm(), 3));

  LadderReport r;
  for (int l = 0; l <= lmax; ++l) {
    double rhs = 0.0;
    for (int i = 0; i <= l; ++i) rhs += ve[i] * ve[l - i];
    r.even.push_back((pair_sum(2 * l) - rhs) / scale);
    r.odd.push_back(pair_sum(2 * l + 1) / scale);
  }
  const double chi_scale = std::sqrt(scale);
  r.depth = 0;
  while (r.depth < 3 && c(r.depth + 1).norm() / chi_scale < tol) ++r.depth;
  for (int k = 0; k <= std::min(r.depth, lmax - 1); ++k) {
    r.ladder.push_back((a(2 * k + 2) + 0.5 * c(k + 1).squaredNorm() - ve[k + 1]) / scale);
    r.ladder.push_back((a(2 * k + 3) + c(k + 1).dot(c(k + 2))) / scale);
  }
  return r;
}

Mat PlaneSampler::sample(std::uint64_t index) const {
  if (index < injected.size()) return injected[index];
  auto rng = sample_rng(seed, index);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const Mat A = gaussian_matrix(rng, 7, 3);
    Eigen::HouseholderQR<Mat> qr(A);
    Mat Q = qr.householderQ() * Mat::Identity(7, 3);
    if (Eigen::JacobiSVD<Mat>(A).singularValues().minCoeff() < 1e-8) continue;
    if (Q.topRows(3).determinant() < 0.0) Q.col(0).swap(Q.col(1));
    return Q;
  }
  throw Error("plane sampler: too many degenerate draws");
}

GraphPlane GraphPlaneSampler::sample(std::uint64_t index) const {
  if (index < injected.size()) return GraphPlane{injected[index]};
  auto rng = sample_rng(seed, index);
  std::uniform_real_distribution<double> u(std::log(scale_min), std::log(scale_max));
  const double scale = std::exp(u(rng));
  GraphPlane g;
  g.T = scale * gaussian_matrix(rng, 3, 4);
  return g;
}

ScanReport semi_calibration_scan(const Form& a, const Mat& metric, const PlaneSampler& sampler,
                                 std::size_t n, double tol, unsigned threads) {
  if (n < 1) throw StructuralError("scan needs at least one sample");
  if (a.dim() != 7 || a.degree() != 3) throw StructuralError("semi_calibration_scan: need a 3-form on R^7");
  std::vector<double> ratio(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const Mat F = sampler.sample(i);
        ratio[i] = evaluate(a, F) / std::sqrt(wedge_norm_sq(F, metric));
      },
      threads);
  ScanReport r;
  r.form = render(a);
  r.metric = metric;
  r.samples = n;
  r.tolerance = tol;
  r.seed = sampler.seed;
  r.max_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (ratio[i] > r.max_ratio) {
      r.max_ratio = ratio[i];
      r.argmax_index = i;
    }
    if (ratio[i] > 1.0 + tol) ++r.violations;
    if (ratio[i] > 1.0 - tol) ++r.equality_cases;
  }
  r.argmax_frame = sampler.sample(r.argmax_index);
  return r;
}

ScanReport anisotropic_scan(const Splitting& S, const GraphPlaneSampler& sampler, std::size_t n,
                            double tol, unsigned threads) {
  if (n < 1) throw StructuralError("scan needs at least one sample");
  std::vector<double> ratio(n);
  std::vector<double> identity(n);
  std::vector<char> skipped(n, 0);
  parallel_for(
      n,
      [&](std::size_t i) {
        const GraphPlane g = sampler.sample(i);
        const double ve1 = 0.5 * g.T.squaredNorm();
        const double omega = omega_on(g, S);
        const Vec chi1 = chi_pieces_on(g, S)[1];
        identity[i] = std::abs(omega + 0.5 * chi1.squaredNorm() - ve1) / std::max(1.0, ve1);
        if (ve1 < kAnisotropicSkip) {
          skipped[i] = 1;
          ratio[i] = 0.0;
        } else {
          ratio[i] = omega / ve1;
        }
      },
      threads);
  ScanReport r;
  r.form = render(S.phi_pieces()[2]);
  r.metric = S.g2().metric;
  r.samples = n;
  r.tolerance = tol;
  r.seed = sampler.seed;
  r.max_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    r.max_identity_residual = std::max(r.max_identity_residual, identity[i]);
    if (skipped[i]) {
      ++r.skipped;
      continue;
    }
    if (ratio[i] > r.max_ratio) {
      r.max_ratio = ratio[i];
      r.argmax_index = i;
    }
    if (ratio[i] > 1.0 + tol) ++r.violations;
    if (ratio[i] > 1.0 - tol) ++r.equality_cases;
  }
  r.argmax_frame = sampler.sample(r.argmax_index).ambient_frame(S);
  return r;
}

}  // namespace g2f
