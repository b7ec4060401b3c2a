#include "rdiff/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace rdiff {

void EnsembleConfig::validate() const {
  step.validate();
  if (n_paths < 1) throw ConfigError("n_paths must be >= 1");
  for (double s : snapshot_s)
    if (s > step.s_max + 1e-12)
      throw ConfigError("snapshot time " + std::to_string(s) +
                        " exceeds s_max");
  if (!std::is_sorted(snapshot_s.begin(), snapshot_s.end()))
    throw ConfigError("snapshot times must be increasing");
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double idx = p * (values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(idx));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = idx - lo;
  return (1.0 - w) * values[lo] + w * values[hi];
}

QuantileSummary summarize(const std::vector<double>& values) {
  QuantileSummary q;
  q.n = static_cast<int>(values.size());
  if (values.empty()) {
    q.q05 = q.q25 = q.q50 = q.q75 = q.q95 = q.mean =
        std::numeric_limits<double>::quiet_NaN();
    return q;
  }
  q.q05 = quantile(values, 0.05);
  q.q25 = quantile(values, 0.25);
  q.q50 = quantile(values, 0.50);
  q.q75 = quantile(values, 0.75);
  q.q95 = quantile(values, 0.95);
  double s = 0;
  for (double v : values) s += v;
  q.mean = s / values.size();
  return q;
}

WilsonInterval wilson_interval(long count, long n, double z) {
  WilsonInterval w;
  if (n <= 0) return w;
  const double phat = double(count) / double(n);
  w.fraction = phat;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  w.low = std::max(0.0, (center - half) / denom);
  w.high = std::min(1.0, (center + half) / denom);
  return w;
}

namespace {

struct PathOutcome {
  PathStatus status = PathStatus::Completed;
  double s_term = 0, tdot = 0, lambda = 0, min_a = 0;
  std::vector<SnapshotRecord> snapshots;
};

PathOutcome run_one(const EnsembleConfig& cfg, const FrameState& init,
                    std::uint64_t index) {
  StepConfig step = cfg.step;
  step.output_stride = 0;  // endpoints only; snapshots carry the statistics
  const PathSeries series =
      simulate_path(cfg.model, cfg.spec, init, step, cfg.master_seed, index,
                    cfg.snapshot_s);
  PathOutcome out;
  out.status = series.status;
  out.s_term = series.s_term;
  const PathSample& last = series.samples.back();
  out.tdot = last.hyp_angle;
  out.lambda = last.lambda;
  out.min_a = std::numeric_limits<double>::infinity();
  for (const PathSample& smp : series.samples)
    if (std::isfinite(smp.a_func)) out.min_a = std::min(out.min_a, smp.a_func);
  for (const SnapshotRecord& r : series.snapshots)
    if (r.alive && std::isfinite(r.a_func))
      out.min_a = std::min(out.min_a, r.a_func);
  out.snapshots = series.snapshots;
  return out;
}

}  // namespace

EnsembleStats run_ensemble(const EnsembleConfig& cfg) {
  cfg.validate();
  const FrameState init = make_frame_state(cfg.model, cfg.init);
  const int n = cfg.n_paths;

  std::vector<PathOutcome> outcomes(n);
  int n_threads = cfg.n_threads;
  if (n_threads <= 0)
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, n));

  if (n_threads == 1) {
    for (int i = 0; i < n; ++i) outcomes[i] = run_one(cfg, init, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
          outcomes[i] = run_one(cfg, init, i);
      });
    }
    for (auto& th : pool) th.join();
  }

  EnsembleStats st;
  st.n_paths = n;
  st.statuses.reserve(n);
  for (const auto& o : outcomes) {
    st.statuses.push_back(o.status);
    st.terminal_s.push_back(o.s_term);
    st.terminal_tdot.push_back(o.tdot);
    st.terminal_lambda.push_back(o.lambda);
    st.min_a.push_back(o.min_a);
    switch (o.status) {
      case PathStatus::Completed: ++st.n_completed; break;
      case PathStatus::Exploded: ++st.n_exploded; break;
      case PathStatus::ChartExit: ++st.n_chart_exit; break;
    }
  }
  st.explosion = wilson_interval(st.n_exploded, n);

  const size_t m = cfg.snapshot_s.size();
  st.snapshots.resize(m);
  st.snap_tdot.assign(m, {});
  st.snap_a.assign(m, {});
  st.snap_dx.assign(m, {});
  st.snap_alive.assign(m, std::vector<bool>(n, false));
  for (size_t j = 0; j < m; ++j) {
    std::vector<double> tdot, energy, lambda, a_func, dx;
    for (int i = 0; i < n; ++i) {
      const SnapshotRecord& r = outcomes[i].snapshots[j];
      st.snap_alive[j][i] = r.alive;
      if (!r.alive) continue;
      tdot.push_back(r.tdot);
      energy.push_back(r.energy);
      lambda.push_back(r.lambda);
      if (std::isfinite(r.a_func)) a_func.push_back(r.a_func);
      const Vec& prev = j == 0 ? cfg.init.x.tail(cfg.init.x.size() - 1)
                               : outcomes[i].snapshots[j - 1].x_spatial;
      if (j == 0 || outcomes[i].snapshots[j - 1].alive)
        dx.push_back((r.x_spatial - prev).norm());
    }
    SnapshotStats& out = st.snapshots[j];
    out.s = cfg.snapshot_s[j];
    out.n_alive = static_cast<int>(tdot.size());
    out.tdot = summarize(tdot);
    out.energy = summarize(energy);
    out.lambda = summarize(lambda);
    out.a_func = summarize(a_func);
    out.dx = summarize(dx);
    st.snap_tdot[j] = std::move(tdot);
    st.snap_a[j] = std::move(a_func);
    st.snap_dx[j] = std::move(dx);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Verdicts

Verdict test_tdot_to_one(const EnsembleStats& stats,
                         const AsymptoticGates& gates) {
  Verdict v{"tdot_to_one", "fail", ""};
  if (stats.snapshots.size() < 2) {
    v.outcome = "skip";
    v.detail = "needs at least two snapshots";
    return v;
  }
  int inversions = 0;
  for (size_t j = 1; j < stats.snapshots.size(); ++j)
    if (stats.snapshots[j].tdot.q50 >
        stats.snapshots[j - 1].tdot.q50 + 1e-9)
      ++inversions;
  const double final_med = stats.snapshots.back().tdot.q50;
  const bool ok = inversions <= gates.tdot_max_inversions &&
                  final_med >= 1.0 - 1e-9 &&
                  final_med <= gates.tdot_final_band;
  v.outcome = ok ? "pass" : "fail";
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "final median tdot %.6f (band %.6f), %d median inversions",
                final_med, gates.tdot_final_band, inversions);
  v.detail = buf;
  return v;
}

Verdict test_afunc_divergence(const EnsembleStats& stats, double c,
                              const AsymptoticGates& gates) {
  Verdict v{"afunc_divergence", "fail", ""};
  if (std::abs(c - 0.5) < 1e-12) {
    v.outcome = "skip";
    v.detail = "a_s is conserved along geodesics at c = 1/2";
    return v;
  }
  if (stats.snapshots.size() < 2) {
    v.outcome = "skip";
    v.detail = "needs at least two snapshots";
    return v;
  }
  bool increasing = true;
  for (size_t j = 1; j < stats.snapshots.size(); ++j)
    if (stats.snapshots[j].a_func.q50 <= stats.snapshots[j - 1].a_func.q50)
      increasing = false;
  double global_min = std::numeric_limits<double>::infinity();
  for (double m : stats.min_a) global_min = std::min(global_min, m);
  const bool ok = increasing && global_min > gates.afunc_min;
  v.outcome = ok ? "pass" : "fail";
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "median a_s %s, min over paths %.3e (floor %.1e)",
                increasing ? "increasing" : "not increasing", global_min,
                gates.afunc_min);
  v.detail = buf;
  return v;
}

Verdict test_space_convergence(const EnsembleStats& stats,
                               const AsymptoticGates& gates) {
  Verdict v{"space_convergence", "fail", ""};
  const size_t m = stats.snapshots.size();
  if (m < 3) {
    v.outcome = "skip";
    v.detail = "needs at least three snapshots";
    return v;
  }
  const double d1 = stats.snapshots[m - 3].dx.q50;
  const double d2 = stats.snapshots[m - 2].dx.q50;
  const double d3 = stats.snapshots[m - 1].dx.q50;
  const bool ok =
      d2 <= gates.space_shrink * d1 && d3 <= gates.space_shrink * d2;
  v.outcome = ok ? "pass" : "fail";
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "median |dx| over last gaps: %.3e -> %.3e -> %.3e (factor %.2f)",
                d1, d2, d3, gates.space_shrink);
  v.detail = buf;
  return v;
}

Verdict test_energy_dichotomy(const EnsembleStats& stats_a,
                              const EnsembleStats& stats_b, double n_bound,
                              const AsymptoticGates& gates) {
  Verdict v{"energy_dichotomy", "fail", ""};
  const double target = 1.0 - 1.0 / n_bound - gates.dichotomy_slack;
  const bool ok_a = stats_a.explosion.low >= target;
  long calm = 0;
  for (double td : stats_b.terminal_tdot)
    if (td < 1.0 + gates.dichotomy_band) ++calm;
  const double calm_frac =
      stats_b.n_paths > 0 ? double(calm) / stats_b.n_paths : 0.0;
  const bool ok_b = calm_frac >= gates.dichotomy_calm_level;
  v.outcome = (ok_a && ok_b) ? "pass" : "fail";
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "A: explosion wilson_low %.4f (needs >= %.4f); "
                "B: calm fraction %.4f (needs >= %.4f, band %.3f)",
                stats_a.explosion.low, target, calm_frac,
                gates.dichotomy_calm_level, gates.dichotomy_band);
  v.detail = buf;
  return v;
}

QvRegression qv_regression(const PathSeries& path, int window) {
  QvRegression out;
  const auto& smp = path.samples;
  if (smp.size() < 2) throw InsufficientSamples("qv_regression: empty path");
  out.n_increments = static_cast<long>(smp.size()) - 1;
  if (out.n_increments < 10000)
    throw InsufficientSamples("qv_regression: need >= 1e4 increments, have " +
                              std::to_string(out.n_increments));

  std::vector<double> realized, predicted;
  double acc_r = 0, acc_p = 0;
  int in_window = 0;
  for (size_t i = 1; i < smp.size(); ++i) {
    const double dtdot = smp[i].hyp_angle - smp[i - 1].hyp_angle;
    const double ds = smp[i].s - smp[i - 1].s;
    const double td = smp[i - 1].hyp_angle;
    acc_r += dtdot * dtdot;
    acc_p += (td * td - 1.0) * smp[i - 1].xi * ds;
    if (++in_window == window) {
      realized.push_back(acc_r);
      predicted.push_back(acc_p);
      acc_r = acc_p = 0;
      in_window = 0;
    }
  }
  out.n_windows = static_cast<int>(realized.size());

  double sxy = 0, sxx = 0, sy = 0;
  for (size_t i = 0; i < realized.size(); ++i) {
    sxy += predicted[i] * realized[i];
    sxx += predicted[i] * predicted[i];
    sy += realized[i];
  }
  if (sxx == 0.0) {
    // geodesic: zero predicted and zero realized counts as slope 1
    double max_r = 0;
    for (double r : realized) max_r = std::max(max_r, std::abs(r));
    out.slope = max_r == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    out.r_squared = 1.0;
    return out;
  }
  out.slope = sxy / sxx;
  const double ybar = sy / realized.size();
  double ss_res = 0, ss_tot = 0;
  for (size_t i = 0; i < realized.size(); ++i) {
    const double fit = out.slope * predicted[i];
    ss_res += (realized[i] - fit) * (realized[i] - fit);
    ss_tot += (realized[i] - ybar) * (realized[i] - ybar);
  }
  out.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return out;
}

}  // namespace rdiff
