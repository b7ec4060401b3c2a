#pragma once

#include "rdiff/types.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace rdiff {

enum class ModelKind { Minkowski, WarpedProduct, RobertsonWalker, EdSLike };
enum class Chart { Cartesian, Spherical };

std::string to_string(ModelKind k);
std::string to_string(Chart c);

/// Expansion factor alpha(t) with analytic first and second derivatives.
struct ScaleFactor {
  std::function<double(double)> value;
  std::function<double(double)> deriv1;
  std::function<double(double)> deriv2;
  std::string name;  // "power" | "cosh" | "const" | custom
  double exponent = std::numeric_limits<double>::quiet_NaN();  // power law only

  double operator()(double t) const { return value(t); }
};

ScaleFactor power_scale(double c);
ScaleFactor cosh_scale();
ScaleFactor const_scale(double a0 = 1.0);

/// Riemannian factor (M, h) of a warped product, with constant-curvature
/// closed forms for metric, Christoffel symbols and curvature.
/// Spherical chart coordinates (r, phi, psi) are supported for dim == 3;
/// the Cartesian chart requires k == 0.
struct RiemannFactor {
  int dim = 3;
  int k = 0;  // constant sectional curvature, in {-1, 0, 1}
  Chart chart = Chart::Cartesian;

  Mat metric(const Vec& x) const;
  Mat metric_inverse(const Vec& x) const;
  /// christoffel(x)[p] is the matrix Gamma^p_{mn}(h).
  std::vector<Mat> christoffel(const Vec& x) const;
  /// Curvature tensor K_{mnpq} of (M, h): k (h_mp h_nq - h_mq h_np).
  Tensor4 curvature(const Vec& x) const;
  /// Ricci tensor (d-1) k h_{mp}.
  Mat ricci(const Vec& x) const;

  double scalar() const { return dim * (dim - 1) * k; }
  double ricci_lower_bound() const { return (dim - 1) * k; }
  double sectional_inf() const { return k; }
};

/// A spacetime from the catalog: Minkowski, a warped product I x M with
/// metric dt^2 - alpha(t)^2 h, a Robertson-Walker manifold, or the
/// power-law k=0 case alpha(t) = t^c.
class ModelSpec {
 public:
  static ModelSpec minkowski(int d = 3);
  static ModelSpec eds_like(double c, Chart chart = Chart::Cartesian);
  static ModelSpec robertson_walker(int k, ScaleFactor alpha,
                                    Chart chart = Chart::Spherical);
  static ModelSpec warped_product(int d, ScaleFactor alpha, RiemannFactor factor,
                                  double t_lo = 0.0,
                                  double t_hi = std::numeric_limits<double>::infinity());

  ModelKind kind() const { return kind_; }
  int spatial_dim() const { return d_; }
  int dim() const { return d_ + 1; }
  Chart chart() const { return factor_.chart; }
  int curvature_k() const { return factor_.k; }
  const ScaleFactor& alpha() const { return alpha_; }
  const RiemannFactor& factor() const { return factor_; }
  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }

  bool is_warped() const { return kind_ != ModelKind::Minkowski; }

  /// Exponent c when alpha is a power law, otherwise empty.
  std::optional<double> power_exponent() const;

  /// Throws ChartDomainError when p lies outside the chart domain.
  void check_point(const Vec& p) const;
  bool in_domain(const Vec& p) const;

 private:
  ModelSpec() = default;
  ModelKind kind_ = ModelKind::Minkowski;
  int d_ = 3;
  ScaleFactor alpha_;
  RiemannFactor factor_;
  double t_lo_ = 0.0;
  double t_hi_ = std::numeric_limits<double>::infinity();
};

struct MetricPair {
  Mat g;
  Mat g_inv;
};

/// Chart metric and its inverse at p. Warped products: g_00 = 1, g_0i = 0,
/// g_ij = -alpha(t)^2 h_ij.
MetricPair metric_at(const ModelSpec& model, const Vec& p);

/// Christoffel symbols; result[k] is the symmetric matrix Gamma^k_{ij}.
std::vector<Mat> christoffel_at(const ModelSpec& model, const Vec& p);

/// Hubble function alpha'(t)/alpha(t); 0 for Minkowski.
double hubble(const ModelSpec& model, double t);

/// Whether future-directed timelike half-geodesics are complete:
/// I = (0, inf) and the integral of alpha/sqrt(1+alpha^2) diverges.
/// Analytic for power-law alpha, quadrature heuristic otherwise.
bool eternal_check(const ModelSpec& model);

/// Spherical (t, r, phi, psi) -> Cartesian (t, x, y, z), with velocity.
/// Only meaningful for k = 0, d = 3.
void spherical_to_cartesian(const Vec& p_sph, const Vec& v_sph, Vec* p_cart,
                            Vec* v_cart);

}  // namespace rdiff
