#include <doctest.h>

#include "rdiff/ensemble.hpp"

#include <cmath>

using namespace rdiff;

namespace {

const double kC = 2.0 / 3.0;

PhaseState standard_init(const ModelSpec& model, double t0, double tdot0) {
  Vec x = Vec::Zero(4);
  x(0) = t0;
  Vec dir(3);
  dir << 1.0, 0.0, 0.0;
  return make_phase_state(model, x, tdot0, dir);
}

}  // namespace

TEST_CASE("quantile interpolation on a known sample") {
  // 0..10: quantile p sits at index 10 p exactly
  std::vector<double> v;
  for (int i = 0; i <= 10; ++i) v.push_back(i);
  CHECK(quantile(v, 0.0) == 0.0);
  CHECK(quantile(v, 1.0) == 10.0);
  CHECK(quantile(v, 0.5) == 5.0);
  CHECK(quantile(v, 0.25) == doctest::Approx(2.5));
  CHECK(quantile(v, 0.05) == doctest::Approx(0.5));
  // unsorted input is sorted internally
  std::vector<double> w{3.0, 1.0, 2.0};
  CHECK(quantile(w, 0.5) == 2.0);
  const QuantileSummary q = summarize(v);
  CHECK(q.q50 == 5.0);
  CHECK(q.mean == 5.0);
  CHECK(q.n == 11);
  CHECK(q.q05 <= q.q25);
  CHECK(q.q25 <= q.q50);
  CHECK(q.q50 <= q.q75);
  CHECK(q.q75 <= q.q95);
}

TEST_CASE("wilson interval against reference values") {
  // reference values from an independent implementation
  const WilsonInterval a = wilson_interval(8, 10);
  CHECK(a.fraction == 0.8);
  CHECK(a.low == doctest::Approx(0.490162471536642).epsilon(1e-12));
  CHECK(a.high == doctest::Approx(0.943317848545625).epsilon(1e-12));
  const WilsonInterval b = wilson_interval(300, 400);
  CHECK(b.low == doctest::Approx(0.705322867069326).epsilon(1e-12));
  CHECK(b.high == doctest::Approx(0.789920985763526).epsilon(1e-12));
  CHECK(b.low <= b.fraction);
  CHECK(b.fraction <= b.high);
  const WilsonInterval z = wilson_interval(0, 50);
  CHECK(z.low == 0.0);
  CHECK(z.high > 0.0);
}

TEST_CASE("single-path ensemble reproduces the path observables") {
  const ModelSpec eds = ModelSpec::eds_like(kC);
  const DiffusionSpec spec{DiffusionKind::Basic, 0.3};
  EnsembleConfig cfg(eds, spec, standard_init(eds, 1.0, 1.5), StepConfig{});
  cfg.step.h = 0.01;
  cfg.step.s_max = 2.0;
  cfg.n_paths = 1;
  cfg.master_seed = 11;
  cfg.snapshot_s = {1.0, 2.0};
  const EnsembleStats st = run_ensemble(cfg);

  const FrameState init = make_frame_state(eds, cfg.init);
  StepConfig one = cfg.step;
  one.output_stride = 0;
  const PathSeries path =
      simulate_path(eds, spec, init, one, cfg.master_seed, 0, cfg.snapshot_s);
  REQUIRE(st.snapshots.size() == 2);
  for (size_t j = 0; j < 2; ++j) {
    CHECK(st.snapshots[j].n_alive == 1);
    CHECK(st.snapshots[j].tdot.q50 == path.snapshots[j].tdot);
    CHECK(st.snapshots[j].tdot.q05 == st.snapshots[j].tdot.q95);
    CHECK(st.snapshots[j].energy.mean == path.snapshots[j].energy);
  }
  CHECK(st.terminal_tdot[0] == path.samples.back().hyp_angle);
}

TEST_CASE("geodesic ensembles have zero spread and zero explosions") {
  const ModelSpec eds = ModelSpec::eds_like(0.7);
  const DiffusionSpec spec{DiffusionKind::Geodesic, 1.0};
  EnsembleConfig cfg(eds, spec, standard_init(eds, 1.0, 3.0), StepConfig{});
  cfg.step.h = 0.01;
  cfg.step.s_max = 10.0;
  cfg.n_paths = 16;
  cfg.master_seed = 5;
  cfg.snapshot_s = {5.0, 10.0};
  const EnsembleStats st = run_ensemble(cfg);
  CHECK(st.n_exploded == 0);
  CHECK(st.explosion.fraction == 0.0);
  for (const SnapshotStats& s : st.snapshots) {
    CHECK(s.n_alive == 16);
    CHECK(s.tdot.q05 == s.tdot.q95);  // deterministic dynamics
    CHECK(s.dx.q05 == s.dx.q95);
  }
  // tdot decreases along geodesics here, toward 1
  CHECK(st.snapshots[1].tdot.q50 < st.snapshots[0].tdot.q50);
  const AsymptoticGates gates;
  CHECK(test_tdot_to_one(st, gates).passed());
}

TEST_CASE("ensembles are invariant under the worker count") {
  const ModelSpec eds = ModelSpec::eds_like(kC);
  const DiffusionSpec spec{DiffusionKind::Basic, 0.4};
  EnsembleConfig cfg(eds, spec, standard_init(eds, 1.0, 2.0), StepConfig{});
  cfg.step.h = 0.01;
  cfg.step.s_max = 3.0;
  cfg.n_paths = 24;
  cfg.master_seed = 31;
  cfg.snapshot_s = {1.0, 3.0};
  cfg.n_threads = 1;
  const EnsembleStats a = run_ensemble(cfg);
  cfg.n_threads = 3;
  const EnsembleStats b = run_ensemble(cfg);
  REQUIRE(a.terminal_tdot.size() == b.terminal_tdot.size());
  for (size_t i = 0; i < a.terminal_tdot.size(); ++i)
    CHECK(a.terminal_tdot[i] == b.terminal_tdot[i]);
  for (size_t j = 0; j < a.snapshots.size(); ++j) {
    CHECK(a.snapshots[j].tdot.q50 == b.snapshots[j].tdot.q50);
    CHECK(a.snapshots[j].energy.mean == b.snapshots[j].energy.mean);
  }
}

TEST_CASE("basic diffusion fails the tdot-to-one verdict") {
  // the basic diffusion has tdot -> infinity; the verdict must reject it
  const ModelSpec eds = ModelSpec::eds_like(0.7);
  const DiffusionSpec spec{DiffusionKind::Basic, 1.0};
  EnsembleConfig cfg(eds, spec, standard_init(eds, 1.0, 5.0), StepConfig{});
  cfg.step.h = 0.005;
  cfg.step.s_max = 10.0;
  cfg.n_paths = 32;
  cfg.master_seed = 17;
  cfg.snapshot_s = {1.0, 5.0, 10.0};
  const EnsembleStats st = run_ensemble(cfg);
  const AsymptoticGates gates;
  const Verdict v = test_tdot_to_one(st, gates);
  CHECK(v.outcome == "fail");
}

TEST_CASE("afunc verdict is skipped in the conserved case") {
  EnsembleStats dummy;
  const AsymptoticGates gates;
  CHECK(test_afunc_divergence(dummy, 0.5, gates).skipped());
}

TEST_CASE("dichotomy verdict with geodesics has zero explosions") {
  const ModelSpec eds = ModelSpec::eds_like(kC);
  const DiffusionSpec spec{DiffusionKind::Geodesic, 1.0};
  EnsembleConfig a(eds, spec, standard_init(eds, 1.0, 11.0), StepConfig{});
  a.step.h = 0.005;
  a.step.s_max = 5.0;
  a.n_paths = 8;
  a.master_seed = 3;
  const EnsembleStats sa = run_ensemble(a);
  CHECK(sa.explosion.fraction == 0.0);
  EnsembleConfig b(eds, spec, standard_init(eds, 1000.0, 1.1), StepConfig{});
  b.step.h = 0.01;
  b.step.s_max = 5.0;
  b.n_paths = 8;
  b.master_seed = 4;
  const EnsembleStats sb = run_ensemble(b);
  const AsymptoticGates gates;
  // scenario A cannot reach the explosion bound with geodesics
  CHECK(test_energy_dichotomy(sa, sb, 4.0, gates).outcome == "fail");
}

TEST_CASE("qv regression requires enough increments") {
  const ModelSpec eds = ModelSpec::eds_like(kC);
  const DiffusionSpec spec{DiffusionKind::Basic, 0.2};
  const FrameState init =
      make_frame_state(eds, standard_init(eds, 1.0, 1.5));
  StepConfig cfg;
  cfg.h = 0.01;
  cfg.s_max = 5.0;
  cfg.output_stride = 1;
  const PathSeries path = simulate_path(eds, spec, init, cfg, 7, 0);
  CHECK_THROWS_AS(qv_regression(path), InsufficientSamples);
}

TEST_CASE("qv regression on geodesics reports unit slope") {
  const ModelSpec eds = ModelSpec::eds_like(kC);
  const DiffusionSpec spec{DiffusionKind::Geodesic, 1.0};
  const FrameState init =
      make_frame_state(eds, standard_init(eds, 1.0, 2.0));
  StepConfig cfg;
  cfg.h = 0.005;
  cfg.s_max = 100.0;
  cfg.output_stride = 1;
  const PathSeries path = simulate_path(eds, spec, init, cfg, 7, 0);
  const QvRegression qv = qv_regression(path);
  CHECK(qv.slope == 1.0);  // zero realized, zero predicted
}
