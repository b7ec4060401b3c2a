#pragma once

#include "rdiff/algebra.hpp"
#include "rdiff/model.hpp"
#include "rdiff/types.hpp"

#include <cstdint>

namespace rdiff {

/// Chart-component curvature data at a point.
///
/// Sign convention: riemann(m,n,p,q) is the chart curvature tensor defined
/// through <R(dm ^ dn), dp ^ dq>_g, assembled from Christoffel symbols as
///   g_mr ( G^r_ps G^s_nq - G^r_qs G^s_np + d_p G^r_nq - d_q G^r_np ),
/// with ricci(m,p) = riemann(m,n,p,q) g^{nq}. Everything downstream (energy,
/// fluid split, SDE coefficients) uses this one convention; it is validated
/// self-consistently against the warped-product closed forms rather than
/// against any external tabulation.
struct CurvaturePack {
  Vec point;
  Mat g;
  Mat g_inv;
  Tensor4 riemann;       ///< R~_{mnpq}, all indices down
  Mat ricci;             ///< R~_{mp}
  double scalar = 0.0;   ///< R = R~_{mp} g^{mp}
  Mat energy_momentum;   ///< T~_{lm} = R~_{lm} - R/2 g_{lm}

  int dim() const { return static_cast<int>(g.rows()); }
};

/// Closed-form curvature for the catalog models (warped products use the
/// product structure; Minkowski is zero).
CurvaturePack chart_curvature(const ModelSpec& model, const Vec& p);

/// Generic assembly from Christoffel symbols and their central finite
/// differences. Exists as an independent oracle for the closed forms.
CurvaturePack chart_curvature_fd(const ModelSpec& model, const Vec& p,
                                 double step = 1e-5);

/// Energy <T~ xdot, xdot> of a unit line element.
/// Throws NotUnitVelocity unless |g(xdot,xdot) - 1| <= 1e-8.
double energy_at(const CurvaturePack& pack, const Vec& xdot);

/// Curvature in a pseudo-orthonormal frame. riemann_ud holds R_{ij}^{kl}
/// (first pair down, second pair up, moved with eta); ricci_ud holds R_i^k.
struct FrameComponents {
  Tensor4 riemann_dddd;  ///< R_{ijab}
  Tensor4 riemann_ud;    ///< R_{ij}^{kl}
  Mat ricci_ud;          ///< R_i^k = sum_j R_{ij}^{kj}
  Mat ricci_dd;          ///< R_{ij}
  double energy = 0.0;   ///< T_{00} for this frame's e_0
};

FrameComponents frame_components(const CurvaturePack& pack, const Frame& frame);

/// Eigen-split of the energy-momentum tensor relative to g:
/// T~_{kl} = q U_k U_l - p g_{kl} with unit timelike U.
struct FluidDecomposition {
  double q = 0.0;
  double p = 0.0;
  double p_tilde = 0.0;  ///< (2p - q)/(d-1)
  Vec U;
  bool is_perfect = false;
  double eigen_spread = 0.0;  ///< relative spread of the spacelike eigenvalues
};

FluidDecomposition perfect_fluid_decompose(const CurvaturePack& pack);

struct WecResult {
  bool ok = false;
  double worst_margin = 0.0;
};

/// Weak energy condition. Robertson-Walker models use the pointwise
/// predicate alpha'^2 + k >= (alpha alpha'')^+ on a t-grid; generic warped
/// products check the Ricci and scalar lower bounds of the factor. Both are
/// cross-checked by direct minimization of E over sampled unit velocities.
WecResult weak_energy_check(const ModelSpec& model,
                            const std::vector<double>& t_grid = {},
                            int n_velocity_samples = 200,
                            std::uint64_t seed = 1);

/// True iff the scalar curvature is <= 0 on the grid.
/// EdS-like models are decided analytically: c >= 1/2.
bool scalar_sign_check(const ModelSpec& model,
                       const std::vector<double>& t_grid = {});

/// Non-negativity of timelike sectional curvatures: alpha'' <= 0 on I and
/// inf sectional curvature of the factor >= sup_I(alpha alpha'' - alpha'^2).
/// EdS-like models are decided analytically: c <= 1.
bool sectional_sign_check(const ModelSpec& model,
                          const std::vector<double>& t_grid = {});

/// Default log-spaced evaluation grid inside the model's time interval.
std::vector<double> default_t_grid(const ModelSpec& model, int n = 96);

}  // namespace rdiff
