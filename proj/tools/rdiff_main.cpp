#include "rdiff/io.hpp"
#include "rdiff/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace rdiff;

int env_threads() {
  const char* v = std::getenv("RDIFF_THREADS");
  if (!v) return 0;
  return std::atoi(v);
}

void emit_error(const std::string& msg, int code) {
  Json j{{"error", msg}, {"code", code}};
  std::cerr << j.dump() << "\n";
}

Vec parse_point(const std::string& s, int n) {
  Vec p(n);
  std::stringstream ss(s);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= n) throw ConfigError("point has too many coordinates");
    p(i++) = std::stod(item);
  }
  if (i != n)
    throw ConfigError("point needs " + std::to_string(n) + " coordinates");
  return p;
}

void write_or_print(const Json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(out);
    if (!f) throw Error("cannot open " + out);
    f << j.dump(2) << "\n";
  }
}

struct CommonFlags {
  std::string config_file;
  RunConfig cfg;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON config file");
    sub->add_option("--model", cfg.model, "minkowski|warped|rw|eds");
    sub->add_option("--c", cfg.c, "power-law exponent of the expansion");
    sub->add_option("--k", cfg.k, "spatial curvature (-1, 0, 1)");
    sub->add_option("--d", cfg.d, "spatial dimension");
    sub->add_option("--chart", cfg.chart, "cartesian|spherical");
    sub->add_option("--alpha", cfg.alpha, "power|cosh");
    sub->add_option("--kind", cfg.kind,
                    "geodesic|basic|r|energy|sectional");
    sub->add_option("--rho", cfg.rho, "noise scale");
    sub->add_option("--h", cfg.step.h, "proper-time step");
    sub->add_option("--s-max", cfg.step.s_max, "proper-time horizon");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--paths", cfg.n_paths, "ensemble size");
    sub->add_option("--t0", cfg.t0, "initial cosmological time");
    sub->add_option("--tdot0", cfg.tdot0, "initial hyperbolic angle");
    sub->add_option("--stride", cfg.step.output_stride, "sample stride");
    sub->add_option("--threads", cfg.threads, "worker cap (0 = auto)");
    sub->add_option("--out", cfg.out, "output file");
  }

  /// Loads the config file (if any), then re-applies explicit flags on top.
  RunConfig resolve(CLI::App* sub) {
    if (config_file.empty()) return cfg;
    RunConfig merged = load_config_file(config_file);
    const auto over = [&](const char* flag, auto member,
                          auto RunConfig::* dst) {
      if (sub->count(flag)) merged.*dst = member;
    };
    over("--model", cfg.model, &RunConfig::model);
    over("--c", cfg.c, &RunConfig::c);
    over("--k", cfg.k, &RunConfig::k);
    over("--d", cfg.d, &RunConfig::d);
    over("--chart", cfg.chart, &RunConfig::chart);
    over("--alpha", cfg.alpha, &RunConfig::alpha);
    over("--kind", cfg.kind, &RunConfig::kind);
    over("--rho", cfg.rho, &RunConfig::rho);
    over("--seed", cfg.seed, &RunConfig::seed);
    over("--paths", cfg.n_paths, &RunConfig::n_paths);
    over("--t0", cfg.t0, &RunConfig::t0);
    over("--tdot0", cfg.tdot0, &RunConfig::tdot0);
    over("--threads", cfg.threads, &RunConfig::threads);
    over("--out", cfg.out, &RunConfig::out);
    if (sub->count("--h")) merged.step.h = cfg.step.h;
    if (sub->count("--s-max")) merged.step.s_max = cfg.step.s_max;
    if (sub->count("--stride")) merged.step.output_stride = cfg.step.output_stride;
    return merged;
  }
};

int run_curvature(const RunConfig& cfg, const std::string& point_str) {
  const ModelSpec model = cfg.build_model();
  Vec p;
  if (point_str.empty()) {
    p = Vec::Zero(model.dim());
    p(0) = cfg.t0;
    if (model.chart() == Chart::Spherical) {
      p(1) = 0.5;
      p(2) = M_PI / 2.0;
    }
  } else {
    p = parse_point(point_str, model.dim());
  }
  write_or_print(curvature_report(model, p), cfg.out);
  return 0;
}

int run_simulate(const RunConfig& cfg, bool force_rk4_geodesic) {
  const ModelSpec model = cfg.build_model();
  const PhaseState init = cfg.build_init(model);
  PathSeries series;
  if (force_rk4_geodesic || cfg.kind == "geodesic") {
    if (force_rk4_geodesic) {
      series = geodesic_integrate(model, init, cfg.step);
    } else {
      const DiffusionSpec spec = cfg.build_spec(model);
      series = simulate_path(model, spec, make_frame_state(model, init),
                             cfg.step, cfg.seed, 0);
    }
  } else {
    const DiffusionSpec spec = cfg.build_spec(model);
    series = simulate_path(model, spec, make_frame_state(model, init),
                           cfg.step, cfg.seed, 0);
  }
  const std::string out = cfg.out.empty() ? "path.csv" : cfg.out;
  write_path_csv(out, model, series);
  write_path_footer(out, series);
  std::cout << "wrote " << out << " (" << series.samples.size()
            << " samples), status " << to_string(series.status) << "\n";
  switch (series.status) {
    case PathStatus::Completed: return 0;
    case PathStatus::Exploded: return 3;
    case PathStatus::ChartExit: return 4;
  }
  return 0;
}

int run_ensemble_cmd(const RunConfig& cfg) {
  const ModelSpec model = cfg.build_model();
  const DiffusionSpec spec = cfg.build_spec(model);
  const PhaseState init = cfg.build_init(model);

  EnsembleConfig ec(model, spec, init, cfg.step);
  ec.n_paths = cfg.n_paths;
  ec.master_seed = cfg.seed;
  ec.snapshot_s = cfg.snapshots;
  ec.n_threads = cfg.threads > 0 ? cfg.threads : env_threads();
  const EnsembleStats stats = run_ensemble(ec);

  const AsymptoticGates gates;
  std::vector<Verdict> verdicts;
  Json extra;
  for (const std::string& t : cfg.tests) {
    if (t == "tdot_to_one") {
      verdicts.push_back(test_tdot_to_one(stats, gates));
    } else if (t == "afunc_divergence") {
      verdicts.push_back(test_afunc_divergence(
          stats, model.power_exponent().value_or(0.0), gates));
    } else if (t == "space_convergence") {
      verdicts.push_back(test_space_convergence(stats, gates));
    } else if (t == "energy_dichotomy") {
      StepConfig step_b = cfg.step;
      step_b.s_max = cfg.b_s_max;
      step_b.h = cfg.b_h;
      EnsembleConfig eb(model, spec, cfg.build_init_b(model), step_b);
      eb.n_paths = cfg.n_paths;
      eb.master_seed = cfg.seed + 1;
      eb.snapshot_s = cfg.snapshots;
      eb.n_threads = ec.n_threads;
      const EnsembleStats stats_b = run_ensemble(eb);
      verdicts.push_back(
          test_energy_dichotomy(stats, stats_b, cfg.dichotomy_n, gates));
      extra["scenario_b"] = stats_to_json(stats_b);
    } else {
      throw ConfigError("unknown ensemble test: " + t);
    }
  }

  Json report = ensemble_report(cfg.to_json(), stats, verdicts);
  if (!extra.is_null()) report["extra"] = extra;
  const std::string out = cfg.out.empty() ? "ensemble.json" : cfg.out;
  write_or_print(report, out);

  bool all_ok = true;
  for (const Verdict& v : verdicts) {
    std::cout << "verdict " << v.name << ": " << v.outcome << " (" << v.detail
              << ")\n";
    if (v.outcome == "fail") all_ok = false;
  }
  std::cout << "wrote " << out << "\n";
  return all_ok ? 0 : 5;
}

int run_verify(const std::string& suite, std::uint64_t seed) {
  const std::vector<CheckResult> results = run_verify_suite(suite, seed);
  int failed = 0;
  for (const CheckResult& r : results) {
    std::cout << format_check_line(r) << "\n";
    if (!r.pass) ++failed;
  }
  std::cout << (failed == 0 ? "OK" : "FAILED") << " " << results.size()
            << " checks, " << failed << " failures (suite=" << suite
            << ", seed=" << seed << ")\n";
  return failed == 0 ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "relativistic diffusions driven by curvature on warped-product "
      "spacetimes"};
  app.set_help_flag("--help", "print help");  // frees -h / --h for the step size
  app.require_subcommand(1);

  CommonFlags curv_flags, geo_flags, sim_flags, ens_flags;
  std::string point_str;
  std::string suite = "all";
  std::uint64_t verify_seed = 7;

  CLI::App* curv = app.add_subcommand("curvature",
                                      "curvature tensors at a chart point");
  curv_flags.attach(curv);
  curv->add_option("--point", point_str, "comma-separated chart coordinates");

  CLI::App* geo = app.add_subcommand("geodesic", "RK4 geodesic integration");
  geo_flags.attach(geo);

  CLI::App* sim = app.add_subcommand("simulate", "single diffusion path");
  sim_flags.attach(sim);

  CLI::App* ens = app.add_subcommand("ensemble",
                                     "Monte Carlo ensemble with verdicts");
  ens_flags.attach(ens);

  CLI::App* ver = app.add_subcommand("verify", "invariant and oracle suites");
  ver->add_option("--suite", suite,
                  "algebra|curvature|identities|coefficients|sde|all");
  ver->add_option("--seed", verify_seed, "seed for the randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (curv->parsed()) return run_curvature(curv_flags.resolve(curv), point_str);
    if (geo->parsed()) {
      RunConfig cfg = geo_flags.resolve(geo);
      cfg.kind = "geodesic";
      return run_simulate(cfg, true);
    }
    if (sim->parsed()) return run_simulate(sim_flags.resolve(sim), false);
    if (ens->parsed()) return run_ensemble_cmd(ens_flags.resolve(ens));
    if (ver->parsed()) return run_verify(suite, verify_seed);
  } catch (const ConfigError& e) {
    emit_error(e.what(), 2);
    return 2;
  } catch (const SignConditionError& e) {
    emit_error(e.what(), 2);
    return 2;
  } catch (const ChartDomainError& e) {
    emit_error(e.what(), 2);
    return 2;
  } catch (const DimensionMismatch& e) {
    emit_error(e.what(), 2);
    return 2;
  } catch (const Error& e) {
    emit_error(e.what(), 1);
    return 1;
  } catch (const std::exception& e) {
    emit_error(e.what(), 1);
    return 1;
  }
  return 0;
}
