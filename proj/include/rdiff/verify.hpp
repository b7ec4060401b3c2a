#pragma once

#include "rdiff/ensemble.hpp"
#include "rdiff/sde.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rdiff {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  double error = 0.0;      ///< worst observed error / statistic
  double threshold = 0.0;  ///< the gate it was compared against
  std::string detail;
};

/// Explicit sub-diffusion coefficients of (tdot, rdot) for the power-law
/// k = 0 model in the spherical chart. This is the oracle side: typed
/// directly from the closed-form SDEs, independent of CurvaturePack.
struct EdsSubDiffusion {
  double drift_tdot = 0;
  double drift_rdot = 0;
  double cov_tt = 0;
  double cov_tr = 0;
  double cov_rr = 0;
};
EdsSubDiffusion eds_explicit_coefficients(DiffusionKind kind, double c,
                                          double rho, double t, double r,
                                          double tdot, double rdot);

/// Explicit sectional generator coefficients for the power-law k = 0 model
/// in the Cartesian chart (drift, second-order matrix). The mixed
/// tdot-xdot covariance entry is included; it follows from the same
/// curvature contraction and is pinned by tangency to the unit hyperboloid.
struct EdsSectional {
  Vec drift;       // d+1
  Mat covariance;  // (d+1) x (d+1)
};
EdsSectional eds_explicit_sectional(double c, double rho, double t,
                                    const Vec& v);

// --- individual checks -----------------------------------------------------

/// Closed-form curvature against the finite-difference assembly, EdS
/// c in {1/2, 2/3, 1} and RW k in {-1,0,1} with alpha = t^{2/3}.
CheckResult check_curvature_oracle(std::uint64_t seed, int points_per_model = 100);

/// R, q, p, E closed forms reproduced by the generic pipeline at random
/// (c, t, tdot), tolerance 1e-12.
CheckResult check_eds_closed_scalars(std::uint64_t seed, int n_points = 1000);

/// Riemann symmetries, first Bianchi, trace identity, RW Ricci diagonal.
std::vector<CheckResult> check_tensor_invariants(std::uint64_t seed);

/// c = 1/2 geodesic against the closed-form time parametrization, and
/// constancy of a_s = t^c sqrt(tdot^2 - 1).
std::vector<CheckResult> check_geodesic_closed_form();

/// Frame-perturbation finite differences for the curvature derivative
/// identity, the vertical Laplacian of E, and V_j E = 2 R_{0j}.
std::vector<CheckResult> check_frame_derivative_identities(std::uint64_t seed);

/// Generator applied to E by finite differences against the explicit
/// energy drifts (basic and energy diffusions), plus the non-negativity
/// of the energy quadratic-variation coefficient.
std::vector<CheckResult> check_energy_drift_identities(std::uint64_t seed,
                                                       int n_points = 100);

/// Generic step coefficients against the explicit (tdot, rdot) equations,
/// 100 random spherical-chart phase points per diffusion, rel. tol 1e-9.
std::vector<CheckResult> check_coefficient_oracles(std::uint64_t seed,
                                                   int n_points = 100);

/// sectional_coefficients against the explicit power-law generator
/// (tolerance 1e-10), tangency of its covariance, and rejection of the
/// construction when the sign condition fails (c = 1.2).
std::vector<CheckResult> check_sectional_oracle(std::uint64_t seed,
                                                int n_points = 100);

/// Monte Carlo one-step moments of xi_step against the explicit
/// coefficients, 1e5 samples per diffusion at a fixed phase point.
std::vector<CheckResult> check_one_step_moments(std::uint64_t seed,
                                                int n_samples = 100000);

/// Halving h halves the pseudo-norm drift (coupled increments, 20 seeds).
CheckResult check_pseudo_norm_scaling(std::uint64_t seed, int n_seeds = 20);

/// Frame completeness sum_j e_j e_j^T = v v^T - g^{-1} along a simulated
/// path, and renormalized pseudo-norm error below 1e-12.
std::vector<CheckResult> check_frame_consistency(std::uint64_t seed);

/// R- and E-diffusions on Minkowski space coincide with the geodesic flow.
CheckResult check_minkowski_reduction(std::uint64_t seed);

/// Same seed gives identical paths; ensembles identical across thread counts.
std::vector<CheckResult> check_determinism(std::uint64_t seed);

/// Single-path quadratic-variation regression for the basic diffusion.
CheckResult check_qv_regression(std::uint64_t seed);

// --- suites ----------------------------------------------------------------

/// Suites: "algebra", "curvature", "identities", "coefficients", "sde", "all".
std::vector<CheckResult> run_verify_suite(const std::string& suite,
                                          std::uint64_t seed);

/// Formats one result as a fixed-layout report line.
std::string format_check_line(const CheckResult& r);

}  // namespace rdiff
