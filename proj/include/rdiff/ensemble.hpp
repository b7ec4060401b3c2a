#pragma once

#include "rdiff/sde.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace rdiff {

struct EnsembleConfig {
  EnsembleConfig(ModelSpec m, DiffusionSpec sp, PhaseState in, StepConfig st)
      : model(std::move(m)), spec(sp), init(std::move(in)), step(st) {}

  ModelSpec model;
  DiffusionSpec spec;
  PhaseState init;
  StepConfig step;
  int n_paths = 1;
  std::uint64_t master_seed = 0;
  std::vector<double> snapshot_s;
  int n_threads = 0;  ///< 0 = hardware concurrency

  void validate() const;
};

/// Quantiles (5/25/50/75/95%) and mean of one observable at one snapshot.
struct QuantileSummary {
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0, mean = 0;
  int n = 0;
};

/// Linear-interpolation sample quantile on sorted copies of the data
/// (index (n-1)p, interpolated). Exposed for the estimator sanity tests.
double quantile(std::vector<double> values, double p);
QuantileSummary summarize(const std::vector<double>& values);

/// Two-sided Wilson score interval for a binomial fraction.
struct WilsonInterval {
  double fraction = 0, low = 0, high = 0;
};
WilsonInterval wilson_interval(long count, long n, double z = 1.959963984540054);

struct SnapshotStats {
  double s = 0;
  int n_alive = 0;
  QuantileSummary tdot, energy, lambda, a_func, dx;
};

struct EnsembleStats {
  int n_paths = 0;
  int n_completed = 0, n_exploded = 0, n_chart_exit = 0;
  WilsonInterval explosion;
  std::vector<SnapshotStats> snapshots;
  std::vector<PathStatus> statuses;      // per path
  std::vector<double> terminal_s;        // per path
  std::vector<double> terminal_tdot;     // per path
  std::vector<double> terminal_lambda;   // per path
  std::vector<double> min_a;             // per path, min of a_s over the run
  // raw per-snapshot values (row-major: path-major), for the verdicts
  std::vector<std::vector<double>> snap_tdot, snap_a, snap_dx;
  std::vector<std::vector<bool>> snap_alive;
};

/// Runs n_paths independent paths. Deterministic for a given master seed
/// regardless of thread count: path i always uses stream (seed, i) and
/// results are merged by path index.
EnsembleStats run_ensemble(const EnsembleConfig& config);

struct Verdict {
  std::string name;
  std::string outcome;  ///< "pass" | "fail" | "skip"
  std::string detail;

  bool passed() const { return outcome == "pass"; }
  bool skipped() const { return outcome == "skip"; }
};

/// Gate values frozen from the committed pilot runs (see pilot/ directory).
struct AsymptoticGates {
  double tdot_final_band = 1.10;     ///< final median tdot must be below this
  int tdot_max_inversions = 1;       ///< allowed median increases
  double afunc_min = 1e-12;          ///< no path's a_s may fall below this
  double space_shrink = 0.75;        ///< median |dx| decay factor per gap
  double dichotomy_slack = 0.05;     ///< Wilson slack against 1 - 1/n
  double dichotomy_band = 0.05;      ///< "tdot near 1" means tdot < 1 + band
  double dichotomy_calm_level = 0.90;///< required calm fraction in scenario B
};

/// Median hyperbolic angle decreasing to 1 across snapshots.
Verdict test_tdot_to_one(const EnsembleStats& stats,
                         const AsymptoticGates& gates);

/// Median a_s = t^c sqrt(tdot^2 - 1) increasing, and never vanishing.
/// Skipped at c = 1/2 where a_s is a conserved quantity.
Verdict test_afunc_divergence(const EnsembleStats& stats, double c,
                              const AsymptoticGates& gates);

/// Median inter-snapshot displacement shrinking geometrically over the
/// last three gaps.
Verdict test_space_convergence(const EnsembleStats& stats,
                               const AsymptoticGates& gates);

/// Two-ensemble energy dichotomy: explosion-heavy scenario A against the
/// 1 - 1/n bound, calm scenario B against the pilot-frozen level.
Verdict test_energy_dichotomy(const EnsembleStats& stats_a,
                              const EnsembleStats& stats_b, double n_bound,
                              const AsymptoticGates& gates);

struct QvRegression {
  double slope = 0;
  double r_squared = 0;
  long n_increments = 0;
  int n_windows = 0;
};

/// Windowed realized quadratic variation of tdot regressed (through the
/// origin) on the predicted integrand (tdot^2 - 1) Xi. Needs a path sampled
/// at every step; throws InsufficientSamples below 10^4 increments.
QvRegression qv_regression(const PathSeries& path, int window = 100);

}  // namespace rdiff
