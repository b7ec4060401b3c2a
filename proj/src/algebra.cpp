#include "rdiff/algebra.hpp"

#include <cmath>

namespace rdiff {

namespace {

void check_same_dim(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    throw DimensionMismatch(std::string(where) + ": dimensions " +
                            std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

Mat eta_matrix(int n) {
  Mat eta = -Mat::Identity(n, n);
  eta(0, 0) = 1.0;
  return eta;
}

double eta_inner(const Vec& u, const Vec& v) {
  check_same_dim(u.size(), v.size(), "eta_inner");
  double s = u(0) * v(0);
  for (Eigen::Index i = 1; i < u.size(); ++i) s -= u(i) * v(i);
  return s;
}

Vec wedge_action(const Vec& u, const Vec& v, const Vec& w) {
  check_same_dim(u.size(), v.size(), "wedge_action");
  check_same_dim(u.size(), w.size(), "wedge_action");
  return eta_inner(u, w) * v - eta_inner(v, w) * u;
}

Bivector wedge(const Vec& u, const Vec& v) {
  check_same_dim(u.size(), v.size(), "wedge");
  return Bivector(u * v.transpose() - v * u.transpose());
}

Vec apply(const Bivector& b, const Vec& w) {
  check_same_dim(b.m.rows(), w.size(), "apply");
  // (u^v)(w) = (v u^T - u v^T) eta w = -B eta w for B = u v^T - v u^T.
  Vec ew = w;
  ew.tail(w.size() - 1) *= -1.0;
  return -(b.m * ew);
}

Bivector so_bracket(const Bivector& a, const Bivector& b) {
  check_same_dim(a.m.rows(), b.m.rows(), "so_bracket");
  const Mat eta = eta_matrix(a.dim());
  // Commutator of the associated endomorphisms, pulled back to a bivector.
  return Bivector(b.m * eta * a.m - a.m * eta * b.m);
}

double eta_inner_bivec(const Bivector& a, const Bivector& b) {
  check_same_dim(a.m.rows(), b.m.rows(), "eta_inner_bivec");
  const Mat eta = eta_matrix(a.dim());
  return 0.5 * (eta * a.m.transpose() * eta * b.m).trace();
}

double frame_orthonormality_error(const Frame& f) {
  const Mat gram = f.e.transpose() * f.g * f.e;
  return (gram - eta_matrix(f.dim())).cwiseAbs().maxCoeff();
}

Frame gram_schmidt_g(const Frame& frame) {
  constexpr double kDegenerate = 1e-10;
  const int n = frame.dim();
  Frame out = frame;

  const auto gdot = [&](const Vec& a, const Vec& b) -> double {
    return a.dot(frame.g * b);
  };

  Vec e0 = frame.e.col(0);
  const double n0 = gdot(e0, e0);
  if (!(n0 > kDegenerate)) {
    throw DegenerateFrame("gram_schmidt_g: e_0 is not timelike (g-norm " +
                          std::to_string(n0) + ")");
  }
  out.e.col(0) = e0 / std::sqrt(n0);

  for (int i = 1; i < n; ++i) {
    Vec v = frame.e.col(i);
    v -= gdot(v, out.e.col(0)) * out.e.col(0);
    for (int j = 1; j < i; ++j) {
      // Spatial basis vectors have g-norm -1.
      v += gdot(v, out.e.col(j)) * out.e.col(j);
    }
    const double nv = -gdot(v, v);
    if (!(nv > kDegenerate)) {
      throw DegenerateFrame("gram_schmidt_g: vector " + std::to_string(i) +
                            " degenerate (g-norm " + std::to_string(-nv) + ")");
    }
    out.e.col(i) = v / std::sqrt(nv);
  }
  return out;
}

}  // namespace rdiff
