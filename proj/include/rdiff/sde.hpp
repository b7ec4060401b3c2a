#pragma once

#include "rdiff/curvature.hpp"
#include "rdiff/model.hpp"
#include "rdiff/rng.hpp"
#include "rdiff/types.hpp"

#include <cstdint>
#include <optional>

namespace rdiff {

enum class DiffusionKind { Geodesic, Basic, RDiffusion, EDiffusion, Sectional };

std::string to_string(DiffusionKind k);
DiffusionKind diffusion_kind_from_string(const std::string& s);

/// Which diffusion to run and its noise scale. `validated` enforces the
/// sign condition the kind needs on the given model:
/// R-diffusion needs R <= 0, E-diffusion the weak energy condition,
/// the sectional diffusion non-negative timelike sectional curvatures.
struct DiffusionSpec {
  DiffusionKind kind = DiffusionKind::Geodesic;
  double rho = 1.0;

  static DiffusionSpec validated(DiffusionKind kind, double rho,
                                 const ModelSpec& model);
};

struct StepConfig {
  double h = 1e-2;
  int renorm_every = 1;
  double explosion_tdot = 1e6;
  double s_max = 100.0;
  double psd_clamp = 0.0;  ///< 0 means 1e-10 * ||a||
  double t_min = 0.1;
  int output_stride = 1;  ///< <= 0 keeps only first and last sample

  void validate() const;
};

/// A point of the unit tangent bundle in chart coordinates.
struct PhaseState {
  Vec x;
  Vec v;
};

/// Unit state with hyperbolic angle tdot moving along the chart-space
/// direction `dir` (need not be normalized).
PhaseState make_phase_state(const ModelSpec& model, const Vec& x, double tdot,
                            const Vec& dir);

double pseudo_norm(const ModelSpec& model, const PhaseState& st);

/// A frame-bundle state; column 0 of e is the velocity.
struct FrameState {
  Vec x;
  Mat e;

  Vec velocity() const { return e.col(0); }
  PhaseState phase() const { return PhaseState{x, e.col(0)}; }
};

/// Completes the velocity to a pseudo-orthonormal frame using the chart
/// basis, via gram_schmidt_g.
FrameState make_frame_state(const ModelSpec& model, const PhaseState& st);

enum class PathStatus { Completed, Exploded, ChartExit };
std::string to_string(PathStatus s);

struct PathSample {
  double s = 0.0;
  Vec x;
  Vec v;
  double energy = 0.0;
  double hyp_angle = 0.0;  ///< tdot
  double lambda = 0.0;     ///< t / tdot
  double a_func = 0.0;     ///< t^c sqrt(tdot^2-1) for power-law k=0 models
  double xi = 0.0;
  double pnorm_err = 0.0;
};

struct SnapshotRecord {
  double s = 0.0;
  bool alive = false;
  double t = 0.0, tdot = 0.0, lambda = 0.0, a_func = 0.0, energy = 0.0;
  Vec x_spatial;
};

struct PathSeries {
  std::vector<PathSample> samples;
  std::vector<SnapshotRecord> snapshots;
  PathStatus status = PathStatus::Completed;
  double s_term = 0.0;
  long steps = 0;
  int rank_drops = 0;   ///< sectional diffusion: changes of covariance rank
  bool cone_exit = false;  ///< explosion detected by the velocity leaving the
                           ///< timelike cone at the step resolution, rather
                           ///< than by crossing explosion_tdot
};

/// Classical RK4 on the geodesic equation.
PathSeries geodesic_integrate(const ModelSpec& model, const PhaseState& init,
                              const StepConfig& config,
                              const std::vector<double>& snapshot_s = {});

/// Noise intensity of the diffusion at a state: rho^2 (basic),
/// -rho^2 R (R-diffusion), rho^2 E (E-diffusion), 0 (geodesic).
/// Values in [-1e-10, 0) clamp to 0; anything lower throws NegativeXi.
double xi_evaluate(const DiffusionSpec& spec, const CurvaturePack& pack,
                   const PhaseState& state);

/// The velocity drift contributed by the angular dependence of the noise
/// intensity; zero except for the E-diffusion, where it is
/// rho^2 (E v - T~ v) with the index raised by g.
Vec xi_vertical_drift(const DiffusionSpec& spec, const CurvaturePack& pack,
                      const PhaseState& state);

/// Full deterministic drift of dv for one Euler step (geodesic term +
/// (d/2) Xi v + vertical drift).
Vec xi_drift(const ModelSpec& model, const DiffusionSpec& spec,
             const CurvaturePack& pack, const std::vector<Mat>& gamma,
             const PhaseState& state);

/// Instantaneous covariance of dv per unit proper time: Xi (v v^T - g^{-1}).
Mat xi_covariance(const DiffusionSpec& spec, const CurvaturePack& pack,
                  const PhaseState& state);

/// One Euler-Maruyama update of the frame-bundle system. `noise` holds d
/// independent N(0, h) increments. Renormalizes the frame when asked.
FrameState xi_step(const ModelSpec& model, const DiffusionSpec& spec,
                   const FrameState& state, double h, const Vec& noise,
                   bool renormalize = true);

struct SectionalCoefficients {
  Vec drift;       ///< b^k = -Gamma^k_{ij} v^i v^j + (rho^2/2) v^n R~_n^k
  Mat covariance;  ///< a^{kl} = -rho^2 v^p v^q R~_p^k_q^l, symmetrized
};

SectionalCoefficients sectional_coefficients(const ModelSpec& model,
                                             const CurvaturePack& pack,
                                             const PhaseState& state,
                                             double rho);

/// One Euler-Maruyama update of the sectional diffusion. `noise` holds d+1
/// independent N(0, h) increments. The covariance is factored by symmetric
/// eigendecomposition with eigenvalues in [-clamp, 0) clamped to zero;
/// an eigenvalue below -clamp throws PSDError. `rank_out`, when given,
/// receives the number of zero modes after clamping.
PhaseState sectional_step(const ModelSpec& model, const PhaseState& state,
                          double rho, double h, const Vec& noise,
                          double psd_clamp = 0.0, int* rank_out = nullptr);

/// Runs a full path. Bit-reproducible given (seed, path_index, config,
/// model, spec); the noise stream is keyed by (seed, path_index) so
/// ensembles may run their paths in any order.
PathSeries simulate_path(const ModelSpec& model, const DiffusionSpec& spec,
                         const FrameState& init, const StepConfig& config,
                         std::uint64_t seed, std::uint64_t path_index = 0,
                         const std::vector<double>& snapshot_s = {});

}  // namespace rdiff
