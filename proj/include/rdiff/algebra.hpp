#pragma once

#include "rdiff/types.hpp"

namespace rdiff {

/// Minkowski tensor eta = diag(1, -1, ..., -1) on R^{1,d}, n = d+1.
Mat eta_matrix(int n);

/// <u, v>_eta = u^0 v^0 - sum_{i>=1} u^i v^i.
double eta_inner(const Vec& u, const Vec& v);

/// Interior product of u^v: w -> <u,w>_eta v - <v,w>_eta u.
/// The result is the so(1,d) endomorphism of u^v applied to w.
Vec wedge_action(const Vec& u, const Vec& v, const Vec& w);

/// An element of so(1,d) stored as the antisymmetric component matrix
/// B^{ij} of a bivector; simple bivectors are u v^T - v u^T.
struct Bivector {
  Mat m;

  explicit Bivector(int n) : m(Mat::Zero(n, n)) {}
  explicit Bivector(Mat mm) : m(std::move(mm)) {}
  int dim() const { return static_cast<int>(m.rows()); }
};

/// u^v as a Bivector.
Bivector wedge(const Vec& u, const Vec& v);

/// The endomorphism of a bivector applied to w; agrees with
/// wedge_action(u, v, w) when B = wedge(u, v).
Vec apply(const Bivector& b, const Vec& w);

/// Lie bracket of so(1,d), bilinear in both arguments.
Bivector so_bracket(const Bivector& a, const Bivector& b);

/// Extension of the Minkowski product to bivectors:
/// <u^v, a^b> = <u,a><v,b> - <u,b><v,a>, extended bilinearly.
double eta_inner_bivec(const Bivector& a, const Bivector& b);

/// A frame at a point: columns e_0..e_d in chart components, together with
/// the chart metric there. Pseudo-orthonormal means e^T g e = eta.
struct Frame {
  Vec point;  ///< chart coordinates of the base point
  Mat g;      ///< chart metric at the base point
  Mat e;      ///< column j is e_j

  int dim() const { return static_cast<int>(e.rows()); }
};

/// Max |e^T g e - eta| over all entries.
double frame_orthonormality_error(const Frame& f);

/// g-pseudo-orthonormalization. e_0 is normalized first (direction kept,
/// never mixed into the spatial vectors), then e_1..e_d in order.
/// Throws DegenerateFrame when an intermediate vector has |g-norm| < 1e-10.
Frame gram_schmidt_g(const Frame& frame);

}  // namespace rdiff
