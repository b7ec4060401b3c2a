#pragma once

#include "rdiff/ensemble.hpp"
#include "rdiff/sde.hpp"
#include "rdiff/verify.hpp"

#include <json.hpp>

#include <string>

namespace rdiff {

using Json = nlohmann::ordered_json;

/// %.17g, so text output round-trips doubles and diffs bytewise.
std::string fmt_g17(double x);

std::string path_csv_header(int d);
void write_path_csv(const std::string& file, const ModelSpec& model,
                    const PathSeries& series);
/// Writes <file>.footer.json with the terminal status.
void write_path_footer(const std::string& file, const PathSeries& series);

Json curvature_report(const ModelSpec& model, const Vec& point);
Json ensemble_report(const Json& config_echo, const EnsembleStats& stats,
                     const std::vector<Verdict>& verdicts);
Json stats_to_json(const EnsembleStats& stats);

/// Flat run configuration mirrored by the JSON config file. Unknown keys
/// anywhere in the file are rejected.
struct RunConfig {
  // model
  std::string model = "eds";
  double c = 2.0 / 3.0;
  int k = 0;
  int d = 3;
  std::string chart;          // "" = model default
  std::string alpha = "power";  // "power" | "cosh"
  // diffusion
  std::string kind = "geodesic";
  double rho = 1.0;
  // integration
  StepConfig step;
  // initial state
  double t0 = 1.0;
  double tdot0 = 2.0;
  std::vector<double> x0;    // spatial chart coordinates, default zeros/chart
  std::vector<double> dir0;  // spatial direction, default e_1
  // ensemble
  int n_paths = 200;
  std::uint64_t seed = 1;
  int threads = 0;
  std::vector<double> snapshots;
  std::vector<std::string> tests;
  double dichotomy_n = 4.0;
  double b_t0 = 1000.0;
  double b_tdot0 = 1.1;
  double b_s_max = 1000.0;  // calm scenario: longer horizon, larger step
  double b_h = 0.01;
  // output
  std::string out;

  static RunConfig from_json(const Json& j);
  Json to_json() const;

  ModelSpec build_model() const;
  DiffusionSpec build_spec(const ModelSpec& model) const;
  PhaseState build_init(const ModelSpec& model) const;
  PhaseState build_init_b(const ModelSpec& model) const;
};

RunConfig load_config_file(const std::string& path);

}  // namespace rdiff
