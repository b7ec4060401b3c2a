#include "rdiff/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace rdiff {

std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

std::string path_csv_header(int d) {
  std::string h = "s,t,dt";
  for (int i = 1; i <= d; ++i) h += ",x" + std::to_string(i);
  for (int i = 1; i <= d; ++i) h += ",dx" + std::to_string(i);
  h += ",energy,hyp_angle,lambda,a_func,xi,pnorm_err";
  return h;
}

void write_path_csv(const std::string& file, const ModelSpec& model,
                    const PathSeries& series) {
  std::ofstream out(file);
  if (!out) throw Error("cannot open " + file + " for writing");
  const int d = model.spatial_dim();
  out << path_csv_header(d) << "\n";
  for (const PathSample& s : series.samples) {
    out << fmt_g17(s.s) << ',' << fmt_g17(s.x(0)) << ',' << fmt_g17(s.v(0));
    for (int i = 1; i <= d; ++i) out << ',' << fmt_g17(s.x(i));
    for (int i = 1; i <= d; ++i) out << ',' << fmt_g17(s.v(i));
    out << ',' << fmt_g17(s.energy) << ',' << fmt_g17(s.hyp_angle) << ','
        << fmt_g17(s.lambda) << ',' << fmt_g17(s.a_func) << ','
        << fmt_g17(s.xi) << ',' << fmt_g17(s.pnorm_err) << "\n";
  }
}

void write_path_footer(const std::string& file, const PathSeries& series) {
  Json j;
  j["status"] = to_string(series.status);
  j["s_term"] = series.s_term;
  j["steps"] = series.steps;
  j["samples"] = series.samples.size();
  j["rank_drops"] = series.rank_drops;
  j["cone_exit"] = series.cone_exit;
  const PathSample& last = series.samples.back();
  j["terminal"] = {{"s", last.s},
                   {"t", last.x(0)},
                   {"tdot", last.hyp_angle},
                   {"lambda", last.lambda},
                   {"a_func", last.a_func},
                   {"energy", last.energy}};
  std::ofstream out(file + ".footer.json");
  if (!out) throw Error("cannot open footer for writing");
  out << j.dump(2) << "\n";
}

namespace {

Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json vec_to_json(const Vec& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Json summary_to_json(const QuantileSummary& q) {
  return Json{{"q05", q.q05}, {"q25", q.q25}, {"q50", q.q50},
              {"q75", q.q75}, {"q95", q.q95}, {"mean", q.mean},
              {"n", q.n}};
}

}  // namespace

Json curvature_report(const ModelSpec& model, const Vec& point) {
  const CurvaturePack pack = chart_curvature(model, point);
  const std::vector<Mat> gamma = christoffel_at(model, point);
  const int n = model.dim();

  Json j;
  j["point"] = vec_to_json(point);
  j["metric"] = {{"g", mat_to_json(pack.g)}, {"g_inv", mat_to_json(pack.g_inv)}};

  Json chr = Json::array();
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        if (gamma[k](a, b) != 0.0)
          chr.push_back(Json{{"upper", k}, {"lower", Json::array({a, b})},
                             {"value", gamma[k](a, b)}});
  j["christoffel"] = chr;

  Json rie = Json::array();
  for (int m = 0; m < n; ++m)
    for (int nn = 0; nn < n; ++nn)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          if (pack.riemann(m, nn, p, q) != 0.0)
            rie.push_back(Json{{"index", Json::array({m, nn, p, q})},
                               {"value", pack.riemann(m, nn, p, q)}});
  j["riemann"] = rie;

  j["ricci"] = mat_to_json(pack.ricci);
  j["scalar"] = pack.scalar;
  j["energy_momentum"] = mat_to_json(pack.energy_momentum);

  const FluidDecomposition fl = perfect_fluid_decompose(pack);
  j["fluid"] = {{"q", fl.q},
                {"p", fl.p},
                {"p_tilde", fl.p_tilde},
                {"U", vec_to_json(fl.U)},
                {"is_perfect", fl.is_perfect}};

  const WecResult wec = weak_energy_check(model);
  j["checks"] = {{"wec", Json{{"ok", wec.ok}, {"worst_margin", wec.worst_margin}}},
                 {"scalar_sign", scalar_sign_check(model)},
                 {"sectional_sign", sectional_sign_check(model)}};
  return j;
}

Json stats_to_json(const EnsembleStats& stats) {
  Json j;
  j["n_paths"] = stats.n_paths;
  j["statuses"] = {{"completed", stats.n_completed},
                   {"exploded", stats.n_exploded},
                   {"chart_exit", stats.n_chart_exit}};
  j["explosion"] = {{"count", stats.n_exploded},
                    {"fraction", stats.explosion.fraction},
                    {"wilson_low", stats.explosion.low},
                    {"wilson_high", stats.explosion.high}};
  Json snaps = Json::array();
  for (const SnapshotStats& s : stats.snapshots) {
    snaps.push_back(Json{{"s", s.s},
                         {"n_alive", s.n_alive},
                         {"tdot", summary_to_json(s.tdot)},
                         {"energy", summary_to_json(s.energy)},
                         {"lambda", summary_to_json(s.lambda)},
                         {"a_func", summary_to_json(s.a_func)},
                         {"dx", summary_to_json(s.dx)}});
  }
  j["snapshots"] = snaps;
  return j;
}

Json ensemble_report(const Json& config_echo, const EnsembleStats& stats,
                     const std::vector<Verdict>& verdicts) {
  Json j;
  j["config"] = config_echo;
  j["stats"] = stats_to_json(stats);
  Json vs = Json::array();
  for (const Verdict& v : verdicts)
    vs.push_back(
        Json{{"name", v.name}, {"outcome", v.outcome}, {"detail", v.detail}});
  j["verdicts"] = vs;
  return j;
}

// ---------------------------------------------------------------------------
// RunConfig

namespace {

void reject_unknown(const Json& j, const char* where,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (item.key() == a) ok = true;
    if (!ok)
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void get_if(const Json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig cfg;
  reject_unknown(j, "config",
                 {"model", "diffusion", "step", "init", "ensemble", "output"});

  if (j.contains("model")) {
    const Json& m = j.at("model");
    reject_unknown(m, "model", {"kind", "c", "k", "d", "chart", "alpha"});
    get_if(m, "kind", &cfg.model);
    get_if(m, "c", &cfg.c);
    get_if(m, "k", &cfg.k);
    get_if(m, "d", &cfg.d);
    get_if(m, "chart", &cfg.chart);
    get_if(m, "alpha", &cfg.alpha);
  }
  if (j.contains("diffusion")) {
    const Json& m = j.at("diffusion");
    reject_unknown(m, "diffusion", {"kind", "rho"});
    get_if(m, "kind", &cfg.kind);
    get_if(m, "rho", &cfg.rho);
  }
  if (j.contains("step")) {
    const Json& m = j.at("step");
    reject_unknown(m, "step",
                   {"h", "s_max", "renorm_every", "explosion_tdot", "t_min",
                    "psd_clamp", "output_stride"});
    get_if(m, "h", &cfg.step.h);
    get_if(m, "s_max", &cfg.step.s_max);
    get_if(m, "renorm_every", &cfg.step.renorm_every);
    get_if(m, "explosion_tdot", &cfg.step.explosion_tdot);
    get_if(m, "t_min", &cfg.step.t_min);
    get_if(m, "psd_clamp", &cfg.step.psd_clamp);
    get_if(m, "output_stride", &cfg.step.output_stride);
  }
  if (j.contains("init")) {
    const Json& m = j.at("init");
    reject_unknown(m, "init", {"t", "tdot", "x", "dir"});
    get_if(m, "t", &cfg.t0);
    get_if(m, "tdot", &cfg.tdot0);
    get_if(m, "x", &cfg.x0);
    get_if(m, "dir", &cfg.dir0);
  }
  if (j.contains("ensemble")) {
    const Json& m = j.at("ensemble");
    reject_unknown(m, "ensemble",
                   {"n_paths", "master_seed", "snapshots", "tests", "threads",
                    "dichotomy_n", "b_t0", "b_tdot0", "b_s_max", "b_h"});
    get_if(m, "n_paths", &cfg.n_paths);
    get_if(m, "master_seed", &cfg.seed);
    get_if(m, "snapshots", &cfg.snapshots);
    get_if(m, "tests", &cfg.tests);
    get_if(m, "threads", &cfg.threads);
    get_if(m, "dichotomy_n", &cfg.dichotomy_n);
    get_if(m, "b_t0", &cfg.b_t0);
    get_if(m, "b_tdot0", &cfg.b_tdot0);
    get_if(m, "b_s_max", &cfg.b_s_max);
    get_if(m, "b_h", &cfg.b_h);
  }
  if (j.contains("output")) {
    const Json& m = j.at("output");
    reject_unknown(m, "output", {"out"});
    get_if(m, "out", &cfg.out);
  }
  return cfg;
}

Json RunConfig::to_json() const {
  Json j;
  j["model"] = {{"kind", model}, {"c", c},         {"k", k},
                {"d", d},        {"chart", chart}, {"alpha", alpha}};
  j["diffusion"] = {{"kind", kind}, {"rho", rho}};
  j["step"] = {{"h", step.h},
               {"s_max", step.s_max},
               {"renorm_every", step.renorm_every},
               {"explosion_tdot", step.explosion_tdot},
               {"t_min", step.t_min},
               {"psd_clamp", step.psd_clamp},
               {"output_stride", step.output_stride}};
  j["init"] = {{"t", t0}, {"tdot", tdot0}, {"x", x0}, {"dir", dir0}};
  j["ensemble"] = {{"n_paths", n_paths},     {"master_seed", seed},
                   {"snapshots", snapshots}, {"tests", tests},
                   {"threads", threads},     {"dichotomy_n", dichotomy_n},
                   {"b_t0", b_t0},           {"b_tdot0", b_tdot0},
                   {"b_s_max", b_s_max},     {"b_h", b_h}};
  j["output"] = {{"out", out}};
  return j;
}

ModelSpec RunConfig::build_model() const {
  const auto chart_or = [&](Chart dflt) {
    if (chart.empty()) return dflt;
    if (chart == "cartesian") return Chart::Cartesian;
    if (chart == "spherical") return Chart::Spherical;
    throw ConfigError("unknown chart: " + chart);
  };
  const auto make_alpha = [&]() -> ScaleFactor {
    if (alpha == "power") return power_scale(c);
    if (alpha == "cosh") return cosh_scale();
    throw ConfigError("unknown alpha form: " + alpha);
  };
  if (model == "minkowski") return ModelSpec::minkowski(d);
  if (model == "eds") {
    if (!(c > 0.0)) throw ConfigError("c must be positive");
    return ModelSpec::eds_like(c, chart_or(Chart::Cartesian));
  }
  if (model == "rw")
    return ModelSpec::robertson_walker(k, make_alpha(),
                                       chart_or(Chart::Spherical));
  if (model == "warped") {
    RiemannFactor factor{d, k,
                         chart_or(k == 0 ? Chart::Cartesian : Chart::Spherical)};
    return ModelSpec::warped_product(d, make_alpha(), factor);
  }
  throw ConfigError("unknown model kind: " + model);
}

DiffusionSpec RunConfig::build_spec(const ModelSpec& m) const {
  return DiffusionSpec::validated(diffusion_kind_from_string(kind), rho, m);
}

PhaseState RunConfig::build_init(const ModelSpec& m) const {
  const int dd = m.spatial_dim();
  Vec x(m.dim());
  x(0) = t0;
  if (!x0.empty()) {
    if (static_cast<int>(x0.size()) != dd)
      throw ConfigError("init.x needs d entries");
    for (int i = 0; i < dd; ++i) x(i + 1) = x0[i];
  } else if (m.chart() == Chart::Spherical) {
    x(1) = 0.5;
    x(2) = M_PI / 2.0;
    x(3) = 0.0;
  } else {
    x.tail(dd).setZero();
  }
  Vec dir = Vec::Zero(dd);
  if (!dir0.empty()) {
    if (static_cast<int>(dir0.size()) != dd)
      throw ConfigError("init.dir needs d entries");
    for (int i = 0; i < dd; ++i) dir(i) = dir0[i];
  } else {
    dir(0) = 1.0;
  }
  return make_phase_state(m, x, tdot0, dir);
}

PhaseState RunConfig::build_init_b(const ModelSpec& m) const {
  RunConfig alt = *this;
  alt.t0 = b_t0;
  alt.tdot0 = b_tdot0;
  return alt.build_init(m);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return RunConfig::from_json(j);
}

}  // namespace rdiff
