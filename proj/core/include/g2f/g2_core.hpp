#pragma once

#include <array>
#include <string>
#include <vector>

#include "g2f/exterior.hpp"

namespace g2f {

/// A G2-structure on R^7: the 3-form together with the metric, volume form
/// and 4-form it determines.
struct G2Structure {
  Form phi{7, 3};
  Mat metric = Mat::Identity(7, 7);
  Form vol{7, 7};
  Form star_phi{7, 4};
  std::vector<std::string> frame_labels;

  /// phi_0 = dx123 + dx145 + dx167 + dx246 - dx257 - dx347 - dx356.
  static G2Structure standard();
  /// Recovers metric, volume and star from a 3-form; throws NotG2FormError.
  static G2Structure from_phi(const Form& phi);
};

Form standard_phi();
/// Pinned value of the standard star: dx4567 + dx2367 + dx2345 + dx1357
/// - dx1346 - dx1256 - dx1247.
Form standard_star_phi();

/// Pieces of phi_0 and *phi_0 relative to H = span(e1,e2,e3),
/// V = span(eta4..eta7).
struct StandardPieces {
  std::array<Form, 3> omega_i;  // anti-self-dual triple on V
  Form lambda;                  // e123
  Form omega;                   // sum e^i ^ omega_i
  Form theta;                   // e23^omega_1 + e31^omega_2 + e12^omega_3
  Form mu;                      // eta4567
};
const StandardPieces& standard_pieces();

/// g with g_ij vol0 = (1/6) i(e_i)phi ^ i(e_j)phi ^ phi, normalized by det^{1/9}.
Mat metric_from_phi(const Form& phi);

/// Hodge star, inner product and volume form for a metric g (SPD, matching
/// orientation dx1...n), evaluated by changing to a g-orthonormal coframe.
Form hodge_metric(const Form& a, const Mat& g);
double inner_metric(const Form& a, const Form& b, const Mat& g);
Form volume_metric(const Mat& g);

Vec cross(const Vec& u, const Vec& v, const G2Structure& G);
Vec chi(const Vec& u, const Vec& v, const Vec& w, const G2Structure& G);
Vec tau(const Vec& u, const Vec& v, const Vec& w, const Vec& x, const G2Structure& G);

/// |u ^ v ^ ...|^2 in the metric g: the Gram determinant of the columns.
double wedge_norm_sq(const Mat& vectors, const Mat& g);

/// |phi(u,v,w)|^2 + |chi(u,v,w)|^2 - |u^v^w|^2.
double associator_residual(const Vec& u, const Vec& v, const Vec& w, const G2Structure& G);
/// |*phi(u,v,w,x)|^2 + |tau(u,v,w,x)|^2 - |u^v^w^x|^2.
double coassociator_residual(const Vec& u, const Vec& v, const Vec& w, const Vec& x,
                             const G2Structure& G);

/// lambda^2(a) = i(a#)phi / sqrt(3), lambda^4(a) = a ^ phi / 2, lambda^6(a) = *a.
Form lambda_k(const Vec& alpha, int k, const G2Structure& G);
/// Adjoint of lambda^2 for the metric inner products (returns 1-form coords).
Vec lambda2_adjoint(const Form& beta, const G2Structure& G);
/// Adjoint of lambda^4 (1-form coords).
Vec lambda4_adjoint(const Form& gamma, const G2Structure& G);

Form project_2_7(const Form& beta, const G2Structure& G);
Form project_2_14(const Form& beta, const G2Structure& G);

}  // namespace g2f
