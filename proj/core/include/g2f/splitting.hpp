#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "g2f/g2_core.hpp"

namespace g2f {

using TMatrix = Eigen::Matrix<double, 3, 4>;

/// Decomposition R^7 = H + V by an ambient-orthonormal frame (h1,h2,h3 |
/// v4..v7). Forms and vectors "in splitting coordinates" are expressed in
/// this frame; for the standard splitting those are the ambient coordinates.
class Splitting {
 public:
  /// Validates orthonormality and that H is associative with phi(H) = +1.
  Splitting(const Mat& h_frame, const Mat& v_frame, G2Structure g2);

  static const Splitting& standard();

  const Mat& h_frame() const { return h_frame_; }
  const Mat& v_frame() const { return v_frame_; }
  const G2Structure& g2() const { return g2_; }
  /// The 7x7 matrix P = [h_frame | v_frame].
  const Mat& frame() const { return frame_; }
  /// The G2 structure written in splitting coordinates.
  const G2Structure& g2_in_frame() const { return g2_frame_; }
  /// True when the transported 3-form is exactly phi_0.
  bool is_standard_type() const { return standard_type_; }

  Mat to_frame_coords(const Mat& ambient) const;
  Form to_frame_coords(const Form& ambient) const;

  /// Vertical-degree pieces of phi (4 entries) and of chi (4 entries), and
  /// chi itself as a TM-valued 3-form: component k is -i(e_k) *phi.
  const std::vector<Form>& phi_pieces() const { return phi_pieces_; }
  const std::vector<VectorValuedForm>& chi_pieces() const { return chi_pieces_; }
  const VectorValuedForm& chi_form() const { return chi_form_; }

 private:
  Mat h_frame_;
  Mat v_frame_;
  Mat frame_;
  Mat frame_inv_;
  G2Structure g2_;
  G2Structure g2_frame_;
  bool standard_type_ = false;
  std::vector<Form> phi_pieces_;
  std::vector<VectorValuedForm> chi_pieces_;
  VectorValuedForm chi_form_{7, 3, 7};
};

/// Projectable 3-plane spanned by v_i = e_i + sum_a T(i,a) eta_a.
struct GraphPlane {
  TMatrix T = TMatrix::Zero();

  /// 7x3 frame [I; T^T] in splitting coordinates.
  Mat frame() const;
  /// Same frame in ambient coordinates.
  Mat ambient_frame(const Splitting& S) const;
};

/// s independent vectors (columns) in ambient coordinates.
struct Plane {
  Mat span;
  bool oriented = true;

  explicit Plane(Mat vectors, bool oriented = true);
  int dim() const { return static_cast<int>(span.cols()); }
};

struct GraphResult {
  GraphPlane graph;
  /// +1 when the plane's orientation agrees with the projected H-orientation.
  int orientation_sign = 1;
};

GraphResult graph_from_plane(const Plane& p, const Splitting& S = Splitting::standard());
/// beta = sum_i e^i ^ (T e_i)^flat in splitting coordinates.
Form beta_of(const GraphPlane& g);
Mat horizontal_metric(const Plane& p, const Splitting& S = Splitting::standard());
/// vol^H and vol of the plane evaluated on its spanning frame.
double horizontal_volume(const Plane& p, const Splitting& S = Splitting::standard());
double plane_volume(const Plane& p, const Splitting& S = Splitting::standard());

/// Taylor coefficients [ve_0 .. ve_kmax] of prod_i sqrt(1 + eps lambda_i),
/// lambda the eigenvalues of T T^T.
std::vector<double> ve_series(const GraphPlane& g, int kmax);
/// Same coefficients from wedge-power norms of p_V and the quadratic
/// recursion 2 ve_k = c_k - sum_{0<i<k} ve_i ve_{k-i}.
std::vector<double> ve_recursive(const GraphPlane& g, int kmax);
/// |(p_V)^k|^2 = k! sum_{|I|=k} |p_V(v_I1) ^ ... ^ p_V(v_Ik)|^2.
double pv_power_norm_sq(const GraphPlane& g, int k);

/// Pieces alpha_i of a form with exactly i vertical indices, in splitting
/// coordinates; the result has degree+1 entries.
std::vector<Form> decompose_form(const Form& a, const Splitting& S = Splitting::standard());
std::vector<VectorValuedForm> decompose_form(const VectorValuedForm& a,
                                             const Splitting& S = Splitting::standard());

/// sum_i sqrt(eps)^i alpha_i (splitting coordinates); DomainError for eps <= 0.
Form adiabatic_family(const Form& a, const Splitting& S, double eps);
VectorValuedForm adiabatic_family(const VectorValuedForm& a, const Splitting& S, double eps);
/// g_eps = g|_H + eps g|_V in splitting coordinates.
Mat adiabatic_metric(const Splitting& S, double eps);

/// chi_i(v) for i = 0..3 on a graph plane (values in splitting coordinates).
std::vector<Vec> chi_pieces_on(const GraphPlane& g, const Splitting& S = Splitting::standard());
/// alpha_i(v) for i = 0..3 of phi on a graph plane.
std::vector<double> phi_pieces_on(const GraphPlane& g, const Splitting& S = Splitting::standard());

/// omega(v) with omega the vertical-degree-2 piece of phi.
double omega_on(const GraphPlane& g, const Splitting& S = Splitting::standard());

struct LadderReport {
  std::vector<double> even;    // index l: coefficient of eps^l
  std::vector<double> odd;     // index l: coefficient of eps^(l+1/2)
  std::vector<double> ladder;  // two entries per verified vanishing depth
  int depth = 0;               // k-vanishing depth (3 = fully vanishing)
  double max_residual() const;
};

/// Residuals of the associator-equality expansion in powers of sqrt(eps).
LadderReport equality_ladder(const GraphPlane& g, int lmax, double tol = 1e-10,
                             const Splitting& S = Splitting::standard());

/// Seeded plane source: injected planes first, then Gaussian 7x3 frames
/// orthonormalized by thin QR with the H-orientation made positive.
struct PlaneSampler {
  std::uint64_t seed = 0;
  std::vector<Mat> injected;
  Mat sample(std::uint64_t index) const;
};

/// Seeded graph-plane source: injected planes first, then Gaussian T with a
/// log-uniform scale in [scale_min, scale_max].
struct GraphPlaneSampler {
  std::uint64_t seed = 0;
  std::vector<TMatrix> injected;
  double scale_min = 1e-2;
  double scale_max = 1e2;
  GraphPlane sample(std::uint64_t index) const;
};

struct ScanReport {
  std::string form;
  Mat metric;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  double max_ratio = 0.0;
  Mat argmax_frame;
  std::size_t argmax_index = 0;
  std::size_t violations = 0;
  std::size_t equality_cases = 0;
  double max_identity_residual = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
};

/// max over sampled planes of a(frame) / vol_metric(frame).
ScanReport semi_calibration_scan(const Form& a, const Mat& metric, const PlaneSampler& sampler,
                                 std::size_t n, double tol = 1e-10, unsigned threads = 0);
/// max over sampled graph planes of omega(v) / ve_1, skipping ve_1 < 1e-8,
/// plus the identity residual |omega(v) + |chi_1(v)|^2 / 2 - ve_1|.
ScanReport anisotropic_scan(const Splitting& S, const GraphPlaneSampler& sampler, std::size_t n,
                            double tol = 1e-10, unsigned threads = 0);

inline constexpr double kAnisotropicSkip = 1e-8;

}  // namespace g2f
