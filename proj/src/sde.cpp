#include "rdiff/sde.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace rdiff {

std::string to_string(DiffusionKind k) {
  switch (k) {
    case DiffusionKind::Geodesic: return "geodesic";
    case DiffusionKind::Basic: return "basic";
    case DiffusionKind::RDiffusion: return "r";
    case DiffusionKind::EDiffusion: return "energy";
    case DiffusionKind::Sectional: return "sectional";
  }
  return "?";
}

DiffusionKind diffusion_kind_from_string(const std::string& s) {
  if (s == "geodesic") return DiffusionKind::Geodesic;
  if (s == "basic") return DiffusionKind::Basic;
  if (s == "r") return DiffusionKind::RDiffusion;
  if (s == "energy" || s == "e") return DiffusionKind::EDiffusion;
  if (s == "sectional") return DiffusionKind::Sectional;
  throw ConfigError("unknown diffusion kind: " + s);
}

DiffusionSpec DiffusionSpec::validated(DiffusionKind kind, double rho,
                                       const ModelSpec& model) {
  if (!(rho > 0.0) && kind != DiffusionKind::Geodesic)
    throw ConfigError("rho must be positive");
  switch (kind) {
    case DiffusionKind::RDiffusion:
      if (!scalar_sign_check(model))
        throw SignConditionError(
            "r-diffusion needs non-positive scalar curvature on this model");
      break;
    case DiffusionKind::EDiffusion:
      if (!weak_energy_check(model).ok)
        throw SignConditionError(
            "energy diffusion needs the weak energy condition on this model");
      break;
    case DiffusionKind::Sectional:
      if (!sectional_sign_check(model))
        throw SignConditionError(
            "sectional diffusion needs non-negative timelike sectional "
            "curvatures on this model");
      break;
    default:
      break;
  }
  return DiffusionSpec{kind, rho};
}

void StepConfig::validate() const {
  if (!(h > 0.0) || h > 0.1) throw ConfigError("step h must be in (0, 0.1]");
  if (renorm_every < 1) throw ConfigError("renorm_every must be >= 1");
  if (explosion_tdot < 1e3) throw ConfigError("explosion_tdot must be >= 1e3");
  if (!(s_max > 0.0)) throw ConfigError("s_max must be positive");
  if (psd_clamp < 0.0) throw ConfigError("psd_clamp must be >= 0");
}

PhaseState make_phase_state(const ModelSpec& model, const Vec& x, double tdot,
                            const Vec& dir) {
  model.check_point(x);
  const int d = model.spatial_dim();
  if (dir.size() != d) throw DimensionMismatch("direction needs d components");
  if (model.is_warped() && tdot < 1.0)
    throw ConfigError("warped models need tdot >= 1");
  PhaseState st;
  st.x = x;
  st.v = Vec::Zero(model.dim());
  st.v(0) = tdot;
  const double spatial = tdot * tdot - 1.0;
  if (spatial > 0.0) {
    const Mat g = metric_at(model, x).g;
    const Mat hs = -g.bottomRightCorner(d, d);
    const double nn = dir.dot(hs * dir);
    if (nn <= 0.0)
      throw ConfigError("direction must be spacelike and nonzero");
    st.v.tail(d) = (std::sqrt(spatial / nn)) * dir;
  }
  return st;
}

double pseudo_norm(const ModelSpec& model, const PhaseState& st) {
  return st.v.dot(metric_at(model, st.x).g * st.v);
}

FrameState make_frame_state(const ModelSpec& model, const PhaseState& st) {
  const int n = model.dim();
  Frame f;
  f.point = st.x;
  f.g = metric_at(model, st.x).g;
  f.e = Mat::Identity(n, n);
  f.e.col(0) = st.v;
  const Frame ortho = gram_schmidt_g(f);
  return FrameState{st.x, ortho.e};
}

std::string to_string(PathStatus s) {
  switch (s) {
    case PathStatus::Completed: return "completed";
    case PathStatus::Exploded: return "exploded";
    case PathStatus::ChartExit: return "chart_exit";
  }
  return "?";
}

namespace {

double a_functional(const ModelSpec& model, double t, double tdot) {
  const auto c = model.power_exponent();
  if (!c || model.curvature_k() != 0)
    return std::numeric_limits<double>::quiet_NaN();
  const double s = tdot * tdot - 1.0;
  return std::pow(t, *c) * std::sqrt(std::max(s, 0.0));
}

PathSample make_sample(const ModelSpec& model, double s, const Vec& x,
                       const Vec& v, const CurvaturePack& pack, double xi) {
  PathSample out;
  out.s = s;
  out.x = x;
  out.v = v;
  out.energy = v.dot(pack.energy_momentum * v);
  out.hyp_angle = v(0);
  out.lambda = x(0) / v(0);
  out.a_func = a_functional(model, x(0), v(0));
  out.xi = xi;
  out.pnorm_err = std::abs(v.dot(pack.g * v) - 1.0);
  return out;
}

SnapshotRecord make_snapshot(const ModelSpec& model, double s_target,
                             bool alive, double s, const Vec& x, const Vec& v,
                             const CurvaturePack& pack) {
  SnapshotRecord r;
  r.s = s_target;
  r.alive = alive;
  r.t = x(0);
  r.tdot = v(0);
  r.lambda = x(0) / v(0);
  r.a_func = a_functional(model, x(0), v(0));
  r.energy = v.dot(pack.energy_momentum * v);
  r.x_spatial = x.tail(x.size() - 1);
  (void)s;
  return r;
}

/// Shared bookkeeping for all integrators: sample recording, snapshot
/// recording, termination checks.
class PathRecorder {
 public:
  PathRecorder(const ModelSpec& model, const StepConfig& config,
               std::vector<double> snapshot_s)
      : model_(model), config_(config), snapshot_s_(std::move(snapshot_s)) {
    series_.snapshots.reserve(snapshot_s_.size());
  }

  void record(double s, const Vec& x, const Vec& v, const CurvaturePack& pack,
              double xi, bool force_sample) {
    ++tick_;
    const bool want_sample =
        force_sample ||
        (config_.output_stride > 0 && (tick_ - 1) % config_.output_stride == 0);
    if (want_sample)
      series_.samples.push_back(make_sample(model_, s, x, v, pack, xi));
    while (next_snap_ < snapshot_s_.size() &&
           s >= snapshot_s_[next_snap_] -
                    1e-9 * std::max(1.0, snapshot_s_[next_snap_])) {
      series_.snapshots.push_back(make_snapshot(
          model_, snapshot_s_[next_snap_], true, s, x, v, pack));
      ++next_snap_;
    }
    last_x_ = x;
    last_v_ = v;
    last_pack_ = pack;
    last_s_ = s;
  }

  /// Marks the path terminated; unfilled snapshots keep the last state.
  void finish(PathStatus status, double s_term) {
    series_.status = status;
    series_.s_term = s_term;
    while (next_snap_ < snapshot_s_.size()) {
      series_.snapshots.push_back(make_snapshot(model_, snapshot_s_[next_snap_],
                                                false, last_s_, last_x_,
                                                last_v_, last_pack_));
      ++next_snap_;
    }
    if (series_.samples.empty() || series_.samples.back().s != last_s_)
      series_.samples.push_back(
          make_sample(model_, last_s_, last_x_, last_v_, last_pack_, 0.0));
  }

  PathSeries take() { return std::move(series_); }

 private:
  const ModelSpec& model_;
  const StepConfig& config_;
  std::vector<double> snapshot_s_;
  size_t next_snap_ = 0;
  long tick_ = 0;
  PathSeries series_;
  Vec last_x_, last_v_;
  CurvaturePack last_pack_;
  double last_s_ = 0.0;
};

Vec geodesic_rhs(const ModelSpec& model, const Vec& x, const Vec& v) {
  const std::vector<Mat> gam = christoffel_at(model, x);
  const int n = model.dim();
  Vec acc(n);
  for (int k = 0; k < n; ++k) acc(k) = -v.dot(gam[k] * v);
  return acc;
}

}  // namespace

PathSeries geodesic_integrate(const ModelSpec& model, const PhaseState& init,
                              const StepConfig& config,
                              const std::vector<double>& snapshot_s) {
  config.validate();
  model.check_point(init.x);
  PathRecorder rec(model, config, snapshot_s);
  Vec x = init.x, v = init.v;
  double s = 0.0;
  rec.record(s, x, v, chart_curvature(model, x), 0.0, true);

  const double h = config.h;
  const long steps = static_cast<long>(std::ceil(config.s_max / h - 1e-9));
  PathStatus status = PathStatus::Completed;
  for (long i = 0; i < steps; ++i) {
    // classical RK4 on (x, v)
    const Vec k1x = v, k1v = geodesic_rhs(model, x, v);
    Vec x2 = x + 0.5 * h * k1x, v2 = v + 0.5 * h * k1v;
    if (!model.in_domain(x2)) { status = PathStatus::ChartExit; break; }
    const Vec k2x = v2, k2v = geodesic_rhs(model, x2, v2);
    Vec x3 = x + 0.5 * h * k2x, v3 = v + 0.5 * h * k2v;
    if (!model.in_domain(x3)) { status = PathStatus::ChartExit; break; }
    const Vec k3x = v3, k3v = geodesic_rhs(model, x3, v3);
    Vec x4 = x + h * k3x, v4 = v + h * k3v;
    if (!model.in_domain(x4)) { status = PathStatus::ChartExit; break; }
    const Vec k4x = v4, k4v = geodesic_rhs(model, x4, v4);

    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    s = (i + 1) * h;

    if (!x.allFinite() || !v.allFinite() ||
        v(0) > config.explosion_tdot) {
      status = PathStatus::Exploded;
      break;
    }
    if (!model.in_domain(x) ||
        (model.is_warped() && x(0) < 0.5 * config.t_min)) {
      status = PathStatus::ChartExit;
      break;
    }
    rec.record(s, x, v, chart_curvature(model, x), 0.0, false);
  }
  rec.finish(status, s);
  PathSeries out = rec.take();
  out.steps = steps;
  return out;
}

double xi_evaluate(const DiffusionSpec& spec, const CurvaturePack& pack,
                   const PhaseState& state) {
  double xi = 0.0;
  switch (spec.kind) {
    case DiffusionKind::Geodesic:
      return 0.0;
    case DiffusionKind::Basic:
      return spec.rho * spec.rho;
    case DiffusionKind::RDiffusion:
      xi = -spec.rho * spec.rho * pack.scalar;
      break;
    case DiffusionKind::EDiffusion:
      xi = spec.rho * spec.rho *
           state.v.dot(pack.energy_momentum * state.v);
      break;
    case DiffusionKind::Sectional:
      throw Error("xi_evaluate: sectional diffusion has no scalar intensity");
  }
  if (xi < -1e-10)
    throw NegativeXi("noise intensity " + std::to_string(xi) +
                     " is negative; sign condition violated at t=" +
                     std::to_string(state.x(0)));
  return std::max(xi, 0.0);
}

Vec xi_vertical_drift(const DiffusionSpec& spec, const CurvaturePack& pack,
                      const PhaseState& state) {
  if (spec.kind != DiffusionKind::EDiffusion)
    return Vec::Zero(state.v.size());
  const double e = state.v.dot(pack.energy_momentum * state.v);
  const Vec tv = pack.g_inv * (pack.energy_momentum * state.v);
  return (spec.rho * spec.rho) * (e * state.v - tv);
}

Vec xi_drift(const ModelSpec& model, const DiffusionSpec& spec,
             const CurvaturePack& pack, const std::vector<Mat>& gamma,
             const PhaseState& state) {
  const int n = model.dim();
  const int d = model.spatial_dim();
  const double xi = xi_evaluate(spec, pack, state);
  Vec drift(n);
  for (int k = 0; k < n; ++k) drift(k) = -state.v.dot(gamma[k] * state.v);
  drift += (0.5 * d * xi) * state.v;
  drift += xi_vertical_drift(spec, pack, state);
  return drift;
}

Mat xi_covariance(const DiffusionSpec& spec, const CurvaturePack& pack,
                  const PhaseState& state) {
  const double xi = xi_evaluate(spec, pack, state);
  return xi * (state.v * state.v.transpose() - pack.g_inv);
}

namespace {

/// One raw Euler-Maruyama update from precomputed curvature data at the
/// current point; no renormalization, no domain check.
FrameState xi_step_core(const ModelSpec& model, const DiffusionSpec& spec,
                        const FrameState& state, double h, const Vec& noise,
                        const CurvaturePack& pack,
                        const std::vector<Mat>& gamma) {
  const int n = model.dim();
  const int d = model.spatial_dim();
  if (noise.size() != d)
    throw DimensionMismatch("xi_step: expected d noise increments");

  const PhaseState ph = state.phase();
  const Vec v = ph.v;
  const double xi = xi_evaluate(spec, pack, ph);
  const double sqrt_xi = std::sqrt(xi);
  const Vec drift = xi_drift(model, spec, pack, gamma, ph);

  FrameState out;
  out.x = state.x + h * v;
  out.e = state.e;

  Vec v_new = v + h * drift;
  for (int j = 1; j <= d; ++j) v_new += sqrt_xi * noise(j - 1) * state.e.col(j);

  for (int j = 1; j <= d; ++j) {
    const Vec ej = state.e.col(j);
    Vec dej(n);
    for (int k = 0; k < n; ++k) dej(k) = -v.dot(gamma[k] * ej);
    dej += 0.5 * xi * ej;
    if (spec.kind == DiffusionKind::EDiffusion) {
      // V_j Xi = 2 rho^2 R_{0j} in frame components
      const double vjxi = 2.0 * spec.rho * spec.rho * v.dot(pack.ricci * ej);
      dej += (0.5 * vjxi) * v;
    }
    out.e.col(j) = ej + h * dej + sqrt_xi * noise(j - 1) * v;
  }
  out.e.col(0) = v_new;
  return out;
}

}  // namespace

FrameState xi_step(const ModelSpec& model, const DiffusionSpec& spec,
                   const FrameState& state, double h, const Vec& noise,
                   bool renormalize) {
  const CurvaturePack pack = chart_curvature(model, state.x);
  const std::vector<Mat> gamma = christoffel_at(model, state.x);
  FrameState out = xi_step_core(model, spec, state, h, noise, pack, gamma);
  if (!model.in_domain(out.x))
    throw ChartDomainError("xi_step: left the chart domain");
  if (renormalize) {
    Frame f{out.x, metric_at(model, out.x).g, out.e};
    out.e = gram_schmidt_g(f).e;
  }
  return out;
}

SectionalCoefficients sectional_coefficients(const ModelSpec& model,
                                             const CurvaturePack& pack,
                                             const PhaseState& state,
                                             double rho) {
  const int n = model.dim();
  const std::vector<Mat> gamma = christoffel_at(model, state.x);
  const Vec& v = state.v;
  const double r2 = rho * rho;

  SectionalCoefficients out;
  out.drift = Vec(n);
  // mixed Ricci R~_n^k = R~_{nm} g^{mk}
  const Mat ricci_mixed = pack.ricci * pack.g_inv;
  for (int k = 0; k < n; ++k)
    out.drift(k) = -v.dot(gamma[k] * v) + 0.5 * r2 * v.dot(ricci_mixed.col(k));

  // a^{kl} = -rho^2 v^p v^q R~_p^k_q^l, indices 2 and 4 raised with g
  out.covariance = Mat::Zero(n, n);
  Mat contracted = Mat::Zero(n, n);  // C_{m l} = v^p v^q R~_{p m q l}
  for (int m = 0; m < n; ++m)
    for (int l = 0; l < n; ++l) {
      double acc = 0.0;
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          acc += v(p) * v(q) * pack.riemann(p, m, q, l);
      contracted(m, l) = acc;
    }
  out.covariance = -r2 * pack.g_inv * contracted * pack.g_inv;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

namespace {

PhaseState sectional_step_core(const ModelSpec& model, const PhaseState& state,
                               double rho, double h, const Vec& noise,
                               double psd_clamp, int* rank_out,
                               const CurvaturePack& pack) {
  const int n = model.dim();
  if (noise.size() != n)
    throw DimensionMismatch("sectional_step: expected d+1 noise increments");

  const SectionalCoefficients co =
      sectional_coefficients(model, pack, state, rho);

  Eigen::SelfAdjointEigenSolver<Mat> es(co.covariance);
  const Vec lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  const double clamp = psd_clamp > 0.0 ? psd_clamp : 1e-10 * scale;
  Vec lam_pos = lam;
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    if (lam(i) < -clamp)
      throw PSDError("sectional covariance has eigenvalue " +
                     std::to_string(lam(i)) + " < -" + std::to_string(clamp));
    if (lam(i) <= clamp) {
      lam_pos(i) = 0.0;
      ++zeros;
    }
  }
  if (rank_out) *rank_out = n - zeros;

  const Mat sigma = es.eigenvectors() * lam_pos.cwiseSqrt().asDiagonal();

  PhaseState out;
  out.v = state.v + h * co.drift + sigma * noise;
  out.x = state.x + h * out.v;
  return out;
}

void renormalize_velocity(PhaseState* st, const Mat& g) {
  const double nn = st->v.dot(g * st->v);
  if (!(nn > 0.0))
    throw DegenerateFrame("sectional_step: velocity left the timelike cone");
  st->v /= std::sqrt(nn);
}

}  // namespace

PhaseState sectional_step(const ModelSpec& model, const PhaseState& state,
                          double rho, double h, const Vec& noise,
                          double psd_clamp, int* rank_out) {
  const CurvaturePack pack = chart_curvature(model, state.x);
  PhaseState out =
      sectional_step_core(model, state, rho, h, noise, psd_clamp, rank_out,
                          pack);
  if (!model.in_domain(out.x))
    throw ChartDomainError("sectional_step: left the chart domain");
  renormalize_velocity(&out, metric_at(model, out.x).g);
  return out;
}

PathSeries simulate_path(const ModelSpec& model, const DiffusionSpec& spec,
                         const FrameState& init, const StepConfig& config,
                         std::uint64_t seed, std::uint64_t path_index,
                         const std::vector<double>& snapshot_s) {
  config.validate();
  model.check_point(init.x);
  {
    Frame f{init.x, metric_at(model, init.x).g, init.e};
    if (frame_orthonormality_error(f) > 1e-9)
      throw Error("simulate_path: initial frame is not pseudo-orthonormal");
    if (model.is_warped() && init.e(0, 0) < 1.0 - 1e-9)
      throw Error("simulate_path: warped models need tdot >= 1");
  }

  const int d = model.spatial_dim();
  const bool sectional = spec.kind == DiffusionKind::Sectional;
  const int n_noise = sectional ? d + 1 : d;
  NormalStream rng(seed, path_index);

  PathRecorder rec(model, config, snapshot_s);
  FrameState fs = init;
  PhaseState ps = init.phase();
  double s = 0.0;
  CurvaturePack pack = chart_curvature(model, fs.x);
  std::vector<Mat> gamma = christoffel_at(model, fs.x);
  rec.record(s, fs.x, fs.e.col(0), pack,
             sectional ? 0.0 : xi_evaluate(spec, pack, ps), true);

  const double h = config.h;
  const long steps = static_cast<long>(std::ceil(config.s_max / h - 1e-9));
  PathStatus status = PathStatus::Completed;
  Vec noise(n_noise);
  int prev_rank = -1;
  int rank_drops = 0;

  long i = 0;
  bool cone_exit = false;
  for (; i < steps; ++i) {
    rng.fill(noise, n_noise, h);
    try {
      if (sectional) {
        int rank = 0;
        ps = sectional_step_core(model, ps, spec.rho, h, noise,
                                 config.psd_clamp, &rank, pack);
        if (prev_rank >= 0 && rank != prev_rank) ++rank_drops;
        prev_rank = rank;
        fs.x = ps.x;
        fs.e.col(0) = ps.v;
      } else {
        fs = xi_step_core(model, spec, fs, h, noise, pack, gamma);
        ps = fs.phase();
      }
    } catch (const DegenerateFrame&) {
      status = PathStatus::Exploded;
      cone_exit = true;
      break;
    }
    s = (i + 1) * h;

    const Vec& x = fs.x;
    {
      const Vec v = fs.e.col(0);
      if (!x.allFinite() || !v.allFinite() || v(0) > config.explosion_tdot) {
        status = PathStatus::Exploded;
        if (x.allFinite() && v.allFinite() && model.in_domain(x)) {
          // keep the crossing state visible in samples and snapshots
          rec.record(s, x, v, chart_curvature(model, x), 0.0, true);
        }
        break;
      }
    }
    if (!model.in_domain(x) ||
        (model.is_warped() && x(0) < 0.5 * config.t_min)) {
      status = PathStatus::ChartExit;
      break;
    }

    pack = chart_curvature(model, x);
    if (!sectional) gamma = christoffel_at(model, x);
    try {
      if (sectional) {
        // the sectional diffusion renormalizes after every step
        renormalize_velocity(&ps, pack.g);
        fs.e.col(0) = ps.v;
      } else if (((i + 1) % config.renorm_every) == 0) {
        Frame f{x, pack.g, fs.e};
        fs.e = gram_schmidt_g(f).e;
        ps = fs.phase();
      }
    } catch (const DegenerateFrame&) {
      // The velocity left the timelike cone within one step: the state can
      // no longer be represented at this resolution, which operationally is
      // an explosion of the hyperbolic angle.
      status = PathStatus::Exploded;
      cone_exit = true;
      break;
    }
    rec.record(s, fs.x, fs.e.col(0), pack,
               sectional ? 0.0 : xi_evaluate(spec, pack, ps), false);
  }

  rec.finish(status, s);
  PathSeries out = rec.take();
  out.steps = i;
  out.rank_drops = rank_drops;
  out.cone_exit = cone_exit;
  return out;
}

}  // namespace rdiff
