#include "rdiff/curvature.hpp"

#include "rdiff/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace rdiff {

namespace {

void finish_pack(const ModelSpec& model, const Vec& p, CurvaturePack* pack) {
  const int n = model.dim();
  pack->point = p;
  pack->ricci = Mat::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int pp = 0; pp < n; ++pp) {
      double s = 0.0;
      for (int nn = 0; nn < n; ++nn)
        for (int q = 0; q < n; ++q)
          s += pack->riemann(m, nn, pp, q) * pack->g_inv(nn, q);
      pack->ricci(m, pp) = s;
    }
  pack->scalar = (pack->ricci.cwiseProduct(pack->g_inv)).sum();
  pack->energy_momentum = pack->ricci - 0.5 * pack->scalar * pack->g;
}

}  // namespace

CurvaturePack chart_curvature(const ModelSpec& model, const Vec& p) {
  model.check_point(p);
  const int n = model.dim();
  const int d = model.spatial_dim();
  CurvaturePack pack;
  const MetricPair mp = metric_at(model, p);
  pack.g = mp.g;
  pack.g_inv = mp.g_inv;
  pack.riemann = Tensor4(n);

  if (model.kind() != ModelKind::Minkowski) {
    const double t = p(0);
    const double a = model.alpha()(t);
    const double a1 = model.alpha().deriv1(t);
    const double a2 = model.alpha().deriv2(t);
    const Vec xs = p.tail(d);
    const Mat h = model.factor().metric(xs);
    const Tensor4 K = model.factor().curvature(xs);
    const double aa2 = a * a2;
    const double aa1_sq = (a * a1) * (a * a1);

    for (int nn = 1; nn < n; ++nn)
      for (int q = 1; q < n; ++q) {
        const double v = aa2 * h(nn - 1, q - 1);
        pack.riemann(0, nn, 0, q) = v;
        pack.riemann(nn, 0, 0, q) = -v;
        pack.riemann(0, nn, q, 0) = -v;
        pack.riemann(nn, 0, q, 0) = v;
      }
    for (int m = 1; m < n; ++m)
      for (int nn = 1; nn < n; ++nn)
        for (int pp = 1; pp < n; ++pp)
          for (int q = 1; q < n; ++q)
            pack.riemann(m, nn, pp, q) =
                aa1_sq * (h(m - 1, q - 1) * h(nn - 1, pp - 1) -
                          h(m - 1, pp - 1) * h(nn - 1, q - 1)) -
                a * a * K(m - 1, nn - 1, pp - 1, q - 1);
  }

  finish_pack(model, p, &pack);
  return pack;
}

CurvaturePack chart_curvature_fd(const ModelSpec& model, const Vec& p,
                                 double step) {
  model.check_point(p);
  const int n = model.dim();
  CurvaturePack pack;
  const MetricPair mp = metric_at(model, p);
  pack.g = mp.g;
  pack.g_inv = mp.g_inv;
  pack.riemann = Tensor4(n);

  const std::vector<Mat> gam = christoffel_at(model, p);
  // dgam[l][r] = d Gamma^r / d xi^l, central differences
  std::vector<std::vector<Mat>> dgam(n);
  for (int l = 0; l < n; ++l) {
    Vec pp = p, pm = p;
    pp(l) += step;
    pm(l) -= step;
    const std::vector<Mat> gp = christoffel_at(model, pp);
    const std::vector<Mat> gm = christoffel_at(model, pm);
    dgam[l].resize(n);
    for (int r = 0; r < n; ++r) dgam[l][r] = (gp[r] - gm[r]) / (2.0 * step);
  }

  for (int m = 0; m < n; ++m)
    for (int nn = 0; nn < n; ++nn)
      for (int pp = 0; pp < n; ++pp)
        for (int q = 0; q < n; ++q) {
          double s = 0.0;
          for (int r = 0; r < n; ++r) {
            double term = dgam[pp][r](nn, q) - dgam[q][r](nn, pp);
            for (int ss = 0; ss < n; ++ss)
              term += gam[r](pp, ss) * gam[ss](nn, q) -
                      gam[r](q, ss) * gam[ss](nn, pp);
            s += pack.g(m, r) * term;
          }
          pack.riemann(m, nn, pp, q) = s;
        }

  finish_pack(model, p, &pack);
  return pack;
}

double energy_at(const CurvaturePack& pack, const Vec& xdot) {
  if (xdot.size() != pack.g.rows())
    throw DimensionMismatch("energy_at: velocity dimension mismatch");
  const double norm = xdot.dot(pack.g * xdot);
  if (std::abs(norm - 1.0) > 1e-8)
    throw NotUnitVelocity("energy_at: g(xdot,xdot) = " + std::to_string(norm));
  return xdot.dot(pack.energy_momentum * xdot);
}

FrameComponents frame_components(const CurvaturePack& pack, const Frame& frame) {
  const int n = pack.dim();
  if (frame.dim() != n)
    throw DimensionMismatch("frame_components: dimension mismatch");
  if ((frame.point - pack.point).cwiseAbs().maxCoeff() > 1e-12)
    throw FrameMismatch("frame_components: frame base point differs from pack");

  FrameComponents out;
  const Mat& e = frame.e;

  // Contract one index at a time.
  Tensor4 t1(n), t2(n), t3(n);
  out.riemann_dddd = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          double acc = 0.0;
          for (int k = 0; k < n; ++k) acc += pack.riemann(k, l, r, s) * e(k, i);
          t1(i, l, r, s) = acc;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l) acc += t1(i, l, r, s) * e(l, j);
          t2(i, j, r, s) = acc;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int s = 0; s < n; ++s) {
          double acc = 0.0;
          for (int r = 0; r < n; ++r) acc += t2(i, j, r, s) * e(r, a);
          t3(i, j, a, s) = acc;
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double acc = 0.0;
          for (int s = 0; s < n; ++s) acc += t3(i, j, a, s) * e(s, b);
          out.riemann_dddd(i, j, a, b) = acc;
        }

  // Raise the last pair with eta: eta^{kk} = +1 for k=0, -1 otherwise.
  const auto sgn = [](int k) { return k == 0 ? 1.0 : -1.0; };
  out.riemann_ud = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          out.riemann_ud(i, j, k, l) =
              out.riemann_dddd(i, j, k, l) * sgn(k) * sgn(l);

  out.ricci_ud = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += out.riemann_ud(i, j, k, j);
      out.ricci_ud(i, k) = acc;
    }
  out.ricci_dd = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.ricci_dd(i, j) = out.ricci_ud(i, j) * sgn(j);

  out.energy = e.col(0).dot(pack.energy_momentum * e.col(0));
  return out;
}

FluidDecomposition perfect_fluid_decompose(const CurvaturePack& pack) {
  const int n = pack.dim();
  const int d = n - 1;
  FluidDecomposition out;
  out.U = Vec::Zero(n);

  const Mat mixed = pack.g_inv * pack.energy_momentum;
  const double tscale = std::max(mixed.cwiseAbs().maxCoeff(), 1e-300);

  // Comoving fallback: g-normalized d/dt.
  const auto comoving = [&]() {
    Vec u = Vec::Zero(n);
    u(0) = 1.0 / std::sqrt(pack.g(0, 0));
    return u;
  };

  if (tscale < 1e-13) {
    out.q = 0.0;
    out.p = 0.0;
    out.p_tilde = 0.0;
    out.U = comoving();
    out.is_perfect = true;
    return out;
  }

  Eigen::EigenSolver<Mat> es(mixed);
  const Eigen::VectorXcd ev = es.eigenvalues();
  if (ev.imag().cwiseAbs().maxCoeff() > 1e-8 * tscale) {
    out.is_perfect = false;
    return out;
  }
  const Vec lam = ev.real();

  // Try each eigenvalue as the simple (timelike) one; the other d must
  // cluster. Pick the split with the smallest spacelike spread.
  int best = -1;
  double best_spread = std::numeric_limits<double>::infinity();
  double best_mean = 0.0;
  for (int cand = 0; cand < n; ++cand) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == cand) continue;
      lo = std::min(lo, lam(i));
      hi = std::max(hi, lam(i));
      sum += lam(i);
    }
    const double spread = hi - lo;
    if (spread < best_spread) {
      best_spread = spread;
      best = cand;
      best_mean = sum / d;
    }
  }
  out.eigen_spread = best_spread / tscale;
  if (out.eigen_spread > 1e-8) {
    out.is_perfect = false;
    return out;
  }

  out.p = -best_mean;
  out.q = lam(best) + out.p;

  const double full_spread =
      (lam.maxCoeff() - lam.minCoeff()) / tscale;
  if (full_spread <= 1e-8) {
    // All eigenvalues equal: q = 0 and the fluid direction is not pinned
    // down by T~; report the comoving one.
    out.q = 0.0;
    out.U = comoving();
    out.is_perfect = true;
    out.p_tilde = (2.0 * out.p - out.q) / (d > 1 ? (d - 1) : 1);
    return out;
  }

  Vec u = es.eigenvectors().col(best).real();
  const double uu = u.dot(pack.g * u);
  if (uu <= 0.0) {
    out.is_perfect = false;
    return out;
  }
  u /= std::sqrt(uu);
  if (u(0) < 0.0) u = -u;
  out.U = u;
  out.is_perfect = true;
  out.p_tilde = (2.0 * out.p - out.q) / (d > 1 ? (d - 1) : 1);
  return out;
}

std::vector<double> default_t_grid(const ModelSpec& model, int n) {
  std::vector<double> grid;
  grid.reserve(n);
  double lo = model.t_lo(), hi = model.t_hi();
  if (!std::isfinite(lo) || lo <= 0.0) lo = 0.0;
  if (!std::isfinite(hi)) {
    // log-spaced over three decades around O(1) times
    const double a = std::max(lo, 0.0) + 0.05, b = 50.0;
    for (int i = 0; i < n; ++i)
      grid.push_back(a * std::pow(b / a, double(i) / (n - 1)));
  } else {
    const double a = lo + 1e-3 * (hi - lo), b = hi - 1e-3 * (hi - lo);
    for (int i = 0; i < n; ++i)
      grid.push_back(a + (b - a) * double(i) / (n - 1));
  }
  return grid;
}

WecResult weak_energy_check(const ModelSpec& model,
                            const std::vector<double>& t_grid,
                            int n_velocity_samples, std::uint64_t seed) {
  WecResult res;
  if (model.kind() == ModelKind::Minkowski) {
    res.ok = true;
    res.worst_margin = 0.0;
    return res;
  }
  const std::vector<double> grid =
      t_grid.empty() ? default_t_grid(model) : t_grid;
  const auto& al = model.alpha();
  const int d = model.spatial_dim();

  double margin = std::numeric_limits<double>::infinity();
  const bool constant_curv_3d = (d == 3);
  if (constant_curv_3d) {
    // Robertson-Walker predicate: alpha'^2 + k >= (alpha alpha'')^+
    const double k = model.curvature_k();
    for (double t : grid) {
      const double a = al(t), a1 = al.deriv1(t), a2 = al.deriv2(t);
      margin = std::min(margin, a1 * a1 + k - std::max(a * a2, 0.0));
    }
  } else {
    double sup_c = -std::numeric_limits<double>::infinity();
    double inf_a1sq = std::numeric_limits<double>::infinity();
    for (double t : grid) {
      const double a = al(t), a1 = al.deriv1(t), a2 = al.deriv2(t);
      sup_c = std::max(sup_c, a * a2 - a1 * a1);
      inf_a1sq = std::min(inf_a1sq, a1 * a1);
    }
    const double m1 = model.factor().ricci_lower_bound() - (d - 1) * sup_c;
    const double m2 = model.factor().scalar() + d * (d - 1) * inf_a1sq;
    margin = std::min(m1, m2);
  }
  res.ok = margin >= 0.0;

  // Cross-validation: minimize E directly over sampled unit velocities.
  NormalStream ns(seed, 0);
  Philox4x64 uni(seed, 1);
  double worst_e = std::numeric_limits<double>::infinity();
  const int n_points = 24;
  for (int ip = 0; ip < n_points; ++ip) {
    const double t = grid[(ip * grid.size()) / n_points];
    Vec p = Vec::Zero(model.dim());
    p(0) = t;
    if (model.chart() == Chart::Spherical) {
      p(1) = 0.2 + 0.6 * uni.next_uniform();
      p(2) = 0.4 + 2.0 * uni.next_uniform();
      p(3) = uni.next_uniform();
    }
    const CurvaturePack pack = chart_curvature(model, p);
    for (int iv = 0; iv < n_velocity_samples / n_points + 1; ++iv) {
      Vec dir(d);
      for (int i = 0; i < d; ++i) dir(i) = ns.next();
      const double hn = std::sqrt(
          dir.dot(-pack.g.bottomRightCorner(d, d) * dir));
      if (hn < 1e-12) continue;
      const double chi = 3.0 * uni.next_uniform();
      Vec v = Vec::Zero(model.dim());
      v(0) = std::cosh(chi);
      v.tail(d) = (std::sinh(chi) / hn) * dir;
      worst_e = std::min(worst_e, energy_at(pack, v));
    }
  }
  res.worst_margin = std::min(margin, worst_e);
  if (res.ok && worst_e < -1e-9) res.ok = false;
  return res;
}

bool scalar_sign_check(const ModelSpec& model,
                       const std::vector<double>& t_grid) {
  if (model.kind() == ModelKind::Minkowski) return true;
  if (model.kind() == ModelKind::EdSLike)
    return model.power_exponent().value() >= 0.5;
  const std::vector<double> grid =
      t_grid.empty() ? default_t_grid(model) : t_grid;
  const auto& al = model.alpha();
  const int d = model.spatial_dim();
  const double rm = model.factor().scalar();
  for (double t : grid) {
    const double a = al(t), a1 = al.deriv1(t), a2 = al.deriv2(t);
    const double R =
        -rm / (a * a) - d * ((d - 1) * (a1 / a) * (a1 / a) + 2.0 * a2 / a);
    if (R > 1e-14) return false;
  }
  return true;
}

bool sectional_sign_check(const ModelSpec& model,
                          const std::vector<double>& t_grid) {
  if (model.kind() == ModelKind::Minkowski) return true;
  if (model.kind() == ModelKind::EdSLike)
    return model.power_exponent().value() <= 1.0;
  const std::vector<double> grid =
      t_grid.empty() ? default_t_grid(model) : t_grid;
  const auto& al = model.alpha();
  double sup_c = -std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const double a = al(t), a1 = al.deriv1(t), a2 = al.deriv2(t);
    if (a2 > 1e-14) return false;
    sup_c = std::max(sup_c, a * a2 - a1 * a1);
  }
  return model.factor().sectional_inf() >= sup_c;
}

}  // namespace rdiff
