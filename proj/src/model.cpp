#include "rdiff/model.hpp"

#include "rdiff/algebra.hpp"

#include <cmath>

namespace rdiff {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Minkowski: return "minkowski";
    case ModelKind::WarpedProduct: return "warped";
    case ModelKind::RobertsonWalker: return "rw";
    case ModelKind::EdSLike: return "eds";
  }
  return "?";
}

std::string to_string(Chart c) {
  return c == Chart::Cartesian ? "cartesian" : "spherical";
}

ScaleFactor power_scale(double c) {
  ScaleFactor a;
  a.value = [c](double t) { return std::pow(t, c); };
  a.deriv1 = [c](double t) { return c * std::pow(t, c - 1.0); };
  a.deriv2 = [c](double t) { return c * (c - 1.0) * std::pow(t, c - 2.0); };
  a.name = "power";
  a.exponent = c;
  return a;
}

ScaleFactor cosh_scale() {
  ScaleFactor a;
  a.value = [](double t) { return std::cosh(t); };
  a.deriv1 = [](double t) { return std::sinh(t); };
  a.deriv2 = [](double t) { return std::cosh(t); };
  a.name = "cosh";
  return a;
}

ScaleFactor const_scale(double a0) {
  ScaleFactor a;
  a.value = [a0](double) { return a0; };
  a.deriv1 = [](double) { return 0.0; };
  a.deriv2 = [](double) { return 0.0; };
  a.name = "const";
  return a;
}

// ---------------------------------------------------------------------------
// RiemannFactor

Mat RiemannFactor::metric(const Vec& x) const {
  if (chart == Chart::Cartesian) return Mat::Identity(dim, dim);
  const double r = x(0), phi = x(1);
  Mat h = Mat::Zero(dim, dim);
  h(0, 0) = 1.0 / (1.0 - k * r * r);
  h(1, 1) = r * r;
  h(2, 2) = r * r * std::sin(phi) * std::sin(phi);
  return h;
}

Mat RiemannFactor::metric_inverse(const Vec& x) const {
  if (chart == Chart::Cartesian) return Mat::Identity(dim, dim);
  const double r = x(0), phi = x(1);
  Mat hi = Mat::Zero(dim, dim);
  hi(0, 0) = 1.0 - k * r * r;
  hi(1, 1) = 1.0 / (r * r);
  hi(2, 2) = 1.0 / (r * r * std::sin(phi) * std::sin(phi));
  return hi;
}

std::vector<Mat> RiemannFactor::christoffel(const Vec& x) const {
  std::vector<Mat> gam(dim, Mat::Zero(dim, dim));
  if (chart == Chart::Cartesian) return gam;
  const double r = x(0), phi = x(1);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double f = 1.0 - k * r * r;
  // r
  gam[0](0, 0) = k * r / f;
  gam[0](1, 1) = -r * f;
  gam[0](2, 2) = -r * f * sp * sp;
  // phi
  gam[1](0, 1) = gam[1](1, 0) = 1.0 / r;
  gam[1](2, 2) = -sp * cp;
  // psi
  gam[2](0, 2) = gam[2](2, 0) = 1.0 / r;
  gam[2](1, 2) = gam[2](2, 1) = cp / sp;
  return gam;
}

Tensor4 RiemannFactor::curvature(const Vec& x) const {
  Tensor4 K(dim);
  if (k == 0) return K;
  const Mat h = metric(x);
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n)
      for (int p = 0; p < dim; ++p)
        for (int q = 0; q < dim; ++q)
          K(m, n, p, q) = k * (h(m, p) * h(n, q) - h(m, q) * h(n, p));
  return K;
}

Mat RiemannFactor::ricci(const Vec& x) const {
  return static_cast<double>((dim - 1) * k) * metric(x);
}

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec ModelSpec::minkowski(int d) {
  if (d < 1) throw ConfigError("minkowski: d must be >= 1");
  ModelSpec m;
  m.kind_ = ModelKind::Minkowski;
  m.d_ = d;
  m.alpha_ = const_scale();
  m.factor_ = RiemannFactor{d, 0, Chart::Cartesian};
  m.t_lo_ = -std::numeric_limits<double>::infinity();
  return m;
}

ModelSpec ModelSpec::eds_like(double c, Chart chart) {
  if (!(c > 0.0)) throw ConfigError("eds: c must be positive");
  ModelSpec m;
  m.kind_ = ModelKind::EdSLike;
  m.d_ = 3;
  m.alpha_ = power_scale(c);
  m.factor_ = RiemannFactor{3, 0, chart};
  return m;
}

ModelSpec ModelSpec::robertson_walker(int k, ScaleFactor alpha, Chart chart) {
  if (k < -1 || k > 1) throw ConfigError("rw: k must be in {-1,0,1}");
  if (chart == Chart::Cartesian && k != 0)
    throw ConfigError("rw: Cartesian chart requires k = 0");
  ModelSpec m;
  m.kind_ = ModelKind::RobertsonWalker;
  m.d_ = 3;
  m.alpha_ = std::move(alpha);
  m.factor_ = RiemannFactor{3, k, chart};
  return m;
}

ModelSpec ModelSpec::warped_product(int d, ScaleFactor alpha,
                                    RiemannFactor factor, double t_lo,
                                    double t_hi) {
  if (d < 1) throw ConfigError("warped: d must be >= 1");
  if (factor.chart == Chart::Cartesian && factor.k != 0)
    throw ConfigError("warped: Cartesian chart requires k = 0");
  if (factor.chart == Chart::Spherical && d != 3)
    throw ConfigError("warped: spherical chart requires d = 3");
  ModelSpec m;
  m.kind_ = ModelKind::WarpedProduct;
  m.d_ = d;
  m.alpha_ = std::move(alpha);
  m.factor_ = factor;
  m.factor_.dim = d;
  m.t_lo_ = t_lo;
  m.t_hi_ = t_hi;
  return m;
}

std::optional<double> ModelSpec::power_exponent() const {
  if (is_warped() && alpha_.name == "power") return alpha_.exponent;
  return std::nullopt;
}

bool ModelSpec::in_domain(const Vec& p) const {
  if (p.size() != dim()) return false;
  if (!p.allFinite()) return false;
  if (kind_ == ModelKind::Minkowski) return true;
  const double t = p(0);
  if (!(t > t_lo_ && t < t_hi_)) return false;
  if (chart() == Chart::Spherical) {
    const double r = p(1), phi = p(2);
    if (!(r > 0.0)) return false;
    if (curvature_k() == 1 && !(r < 1.0)) return false;
    if (!(phi > 0.0 && phi < M_PI)) return false;
  }
  return true;
}

void ModelSpec::check_point(const Vec& p) const {
  if (p.size() != dim())
    throw DimensionMismatch("point has " + std::to_string(p.size()) +
                            " coordinates, model needs " + std::to_string(dim()));
  if (!in_domain(p)) {
    std::string msg = "point outside chart domain:";
    for (Eigen::Index i = 0; i < p.size(); ++i)
      msg += " " + std::to_string(p(i));
    throw ChartDomainError(msg);
  }
}

// ---------------------------------------------------------------------------

MetricPair metric_at(const ModelSpec& model, const Vec& p) {
  model.check_point(p);
  const int n = model.dim();
  const int d = model.spatial_dim();
  MetricPair out{Mat::Zero(n, n), Mat::Zero(n, n)};
  if (model.kind() == ModelKind::Minkowski) {
    out.g = eta_matrix(n);
    out.g_inv = out.g;
    return out;
  }
  const double t = p(0);
  const double a = model.alpha()(t);
  const Vec xs = p.tail(d);
  out.g(0, 0) = 1.0;
  out.g_inv(0, 0) = 1.0;
  out.g.bottomRightCorner(d, d) = -(a * a) * model.factor().metric(xs);
  out.g_inv.bottomRightCorner(d, d) =
      (-1.0 / (a * a)) * model.factor().metric_inverse(xs);
  return out;
}

std::vector<Mat> christoffel_at(const ModelSpec& model, const Vec& p) {
  model.check_point(p);
  const int n = model.dim();
  const int d = model.spatial_dim();
  std::vector<Mat> gam(n, Mat::Zero(n, n));
  if (model.kind() == ModelKind::Minkowski) return gam;

  const double t = p(0);
  const double a = model.alpha()(t);
  const double a1 = model.alpha().deriv1(t);
  const double H = a1 / a;
  const Vec xs = p.tail(d);
  const Mat h = model.factor().metric(xs);
  const std::vector<Mat> gam_h = model.factor().christoffel(xs);

  // Gamma^0_{mn} = alpha alpha' h_mn
  gam[0].bottomRightCorner(d, d) = (a * a1) * h;
  for (int pidx = 1; pidx < n; ++pidx) {
    // Gamma^p_{0n} = H delta^p_n
    gam[pidx](0, pidx) = H;
    gam[pidx](pidx, 0) = H;
    gam[pidx].bottomRightCorner(d, d) = gam_h[pidx - 1];
  }
  return gam;
}

double hubble(const ModelSpec& model, double t) {
  if (model.kind() == ModelKind::Minkowski) return 0.0;
  return model.alpha().deriv1(t) / model.alpha()(t);
}

bool eternal_check(const ModelSpec& model) {
  if (model.kind() == ModelKind::Minkowski) return true;
  if (std::isfinite(model.t_hi())) return false;
  if (auto c = model.power_exponent()) {
    // alpha / sqrt(1 + alpha^2) -> 1 for any c > 0, so the integral
    // diverges linearly.
    return *c > 0.0;
  }
  // Quadrature over dyadic panels with a divergence heuristic.
  const auto& alpha = model.alpha();
  const auto integrand = [&](double t) {
    const double a = alpha(t);
    return a / std::sqrt(1.0 + a * a);
  };
  double total = 0.0;
  double prev_panel = -1.0;
  double lo = std::max(model.t_lo(), 0.0) + 1.0;
  for (int j = 0; j < 60; ++j) {
    const double hi = 2.0 * lo;
    // Simpson with 64 panels per dyad
    const int m = 64;
    const double dt = (hi - lo) / m;
    double s = integrand(lo) + integrand(hi);
    for (int i = 1; i < m; ++i)
      s += integrand(lo + i * dt) * ((i % 2) ? 4.0 : 2.0);
    const double panel = s * dt / 3.0;
    total += panel;
    if (total > 1e6) return true;
    if (prev_panel > 0.0 && panel < 0.5 * prev_panel && panel < 1e-12)
      return false;  // geometric tail, integral converges
    prev_panel = panel;
    lo = hi;
  }
  return true;
}

void spherical_to_cartesian(const Vec& p_sph, const Vec& v_sph, Vec* p_cart,
                            Vec* v_cart) {
  const double r = p_sph(1), phi = p_sph(2), psi = p_sph(3);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double ss = std::sin(psi), cs = std::cos(psi);
  Vec p(4), v(4);
  p << p_sph(0), r * sp * cs, r * sp * ss, r * cp;
  const double rd = v_sph(1), pd = v_sph(2), sd = v_sph(3);
  v(0) = v_sph(0);
  v(1) = rd * sp * cs + r * cp * cs * pd - r * sp * ss * sd;
  v(2) = rd * sp * ss + r * cp * ss * pd + r * sp * cs * sd;
  v(3) = rd * cp - r * sp * pd;
  *p_cart = p;
  *v_cart = v;
}

}  // namespace rdiff
