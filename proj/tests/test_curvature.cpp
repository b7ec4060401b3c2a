#include <doctest.h>

#include "rdiff/curvature.hpp"
#include "rdiff/rng.hpp"
#include "rdiff/verify.hpp"

#include <cmath>

using namespace rdiff;

namespace {

Vec pt(double t, double x1, double x2, double x3) {
  Vec p(4);
  p << t, x1, x2, x3;
  return p;
}

Vec random_point(const ModelSpec& model, Philox4x64& uni) {
  Vec p(model.dim());
  p(0) = 0.6 + 2.0 * uni.next_uniform();
  if (model.chart() == Chart::Spherical) {
    p(1) = 0.2 + 0.6 * uni.next_uniform();
    p(2) = 0.4 + 2.2 * uni.next_uniform();
    p(3) = 6.0 * uni.next_uniform();
  } else {
    for (int i = 1; i < model.dim(); ++i) p(i) = 2.0 * uni.next_uniform() - 1.0;
  }
  return p;
}

Vec comoving_unit(const CurvaturePack& pack) {
  Vec v = Vec::Zero(pack.dim());
  v(0) = 1.0 / std::sqrt(pack.g(0, 0));
  return v;
}

/// Unit velocity with hyperbolic angle tdot at a warped-chart point.
Vec boosted_unit(const CurvaturePack& pack, double tdot, const Vec& dir) {
  const int d = pack.dim() - 1;
  Vec v = Vec::Zero(pack.dim());
  v(0) = tdot;
  const Mat hs = -pack.g.bottomRightCorner(d, d);
  const double n = std::sqrt(dir.dot(hs * dir));
  v.tail(d) = (std::sqrt(tdot * tdot - 1.0) / n) * dir;
  return v;
}

void check_riemann_symmetries(const Tensor4& r, double tol) {
  const int n = r.dim();
  double bad = 0.0;
  for (int m = 0; m < n; ++m)
    for (int nn = 0; nn < n; ++nn)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          bad = std::max(bad, std::abs(r(m, nn, p, q) + r(nn, m, p, q)));
          bad = std::max(bad, std::abs(r(m, nn, p, q) + r(m, nn, q, p)));
          bad = std::max(bad, std::abs(r(m, nn, p, q) - r(p, q, m, nn)));
          bad = std::max(bad, std::abs(r(m, nn, p, q) + r(m, p, q, nn) +
                                       r(m, q, nn, p)));
        }
  const double scale = std::max(1.0, r.max_abs());
  CHECK(bad / scale < tol);
}

}  // namespace

TEST_CASE("minkowski curvature vanishes") {
  const auto pack =
      chart_curvature(ModelSpec::minkowski(3), pt(2, -1, 0.5, 3));
  CHECK(pack.riemann.max_abs() == 0.0);
  CHECK(pack.ricci.cwiseAbs().maxCoeff() == 0.0);
  CHECK(pack.scalar == 0.0);
  CHECK(pack.energy_momentum.cwiseAbs().maxCoeff() == 0.0);
  CHECK(energy_at(pack, comoving_unit(pack)) == 0.0);
}

TEST_CASE("power-law closed forms") {
  const double c = 2.0 / 3.0;
  const ModelSpec eds = ModelSpec::eds_like(c);
  const double t = 1.37;
  const auto pack = chart_curvature(eds, pt(t, 0.2, -0.4, 0.9));
  for (int n = 1; n < 4; ++n)
    for (int q = 1; q < 4; ++q) {
      const double expect =
          (n == q) ? c * (c - 1.0) * std::pow(t, 2 * c - 2) : 0.0;
      CHECK(pack.riemann(0, n, 0, q) ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  CHECK(pack.scalar ==
        doctest::Approx(-6.0 * c * (2 * c - 1) / (t * t)).epsilon(1e-12));

  const auto pack1 = chart_curvature(eds, pt(1, 0, 0, 0));
  CHECK(pack1.scalar == doctest::Approx(-4.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("energy closed form") {
  {
    const double c = 2.0 / 3.0;
    const auto pack = chart_curvature(ModelSpec::eds_like(c), pt(1, 0, 0, 0));
    CHECK(energy_at(pack, comoving_unit(pack)) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  }
  {
    const double c = 0.5, t = 2.0, tdot = 3.0;
    const auto pack =
        chart_curvature(ModelSpec::eds_like(c), pt(t, 0.1, 0.2, 0.3));
    Vec dir(3);
    dir << 0.3, -1.2, 0.5;
    const double e = energy_at(pack, boosted_unit(pack, tdot, dir));
    CHECK(e == doctest::Approx(35.0 / 16.0).epsilon(1e-12));
    CHECK(e == doctest::Approx(c / (t * t) * (2 * tdot * tdot + 3 * c - 2))
                   .epsilon(1e-12));
  }
  {
    const auto pack =
        chart_curvature(ModelSpec::eds_like(0.7), pt(1.5, 0, 0, 0));
    Vec bad = comoving_unit(pack) * 1.01;
    CHECK_THROWS_AS(energy_at(pack, bad), NotUnitVelocity);
  }
}

TEST_CASE("closed-form pack matches the finite-difference assembly") {
  const std::vector<ModelSpec> models = {
      ModelSpec::eds_like(0.5),
      ModelSpec::eds_like(2.0 / 3.0),
      ModelSpec::eds_like(1.0),
      ModelSpec::robertson_walker(0, power_scale(2.0 / 3.0)),
      ModelSpec::robertson_walker(1, power_scale(2.0 / 3.0)),
      ModelSpec::robertson_walker(-1, power_scale(2.0 / 3.0)),
  };
  Philox4x64 uni(31, 0);
  for (const auto& model : models) {
    for (int rep = 0; rep < 20; ++rep) {
      const Vec p = random_point(model, uni);
      const auto cf = chart_curvature(model, p);
      const auto fd = chart_curvature_fd(model, p);
      const double scale = std::max(1.0, cf.riemann.max_abs());
      double bad = 0.0;
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              bad = std::max(bad, std::abs(cf.riemann(m, n, a, b) -
                                           fd.riemann(m, n, a, b)));
      CHECK(bad / scale < 1e-6);
      CHECK((cf.ricci - fd.ricci).cwiseAbs().maxCoeff() /
                std::max(1.0, cf.ricci.cwiseAbs().maxCoeff()) <
            1e-6);
      CHECK(std::abs(cf.scalar - fd.scalar) /
                std::max(1.0, std::abs(cf.scalar)) <
            1e-6);
    }
  }
}

TEST_CASE("riemann symmetries and first bianchi identity") {
  const ModelSpec rw = ModelSpec::robertson_walker(1, power_scale(2.0 / 3.0));
  const ModelSpec eds = ModelSpec::eds_like(0.8);
  Philox4x64 uni(37, 0);
  for (int rep = 0; rep < 20; ++rep) {
    check_riemann_symmetries(
        chart_curvature(rw, random_point(rw, uni)).riemann, 1e-12);
    check_riemann_symmetries(
        chart_curvature(eds, random_point(eds, uni)).riemann, 1e-12);
    check_riemann_symmetries(
        chart_curvature_fd(eds, random_point(eds, uni)).riemann, 1e-6);
  }
}

TEST_CASE("energy-momentum trace identity") {
  const std::vector<ModelSpec> models = {
      ModelSpec::eds_like(0.9),
      ModelSpec::robertson_walker(-1, cosh_scale()),
  };
  Philox4x64 uni(41, 0);
  for (const auto& model : models) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto pack = chart_curvature(model, random_point(model, uni));
      const double trace = (pack.g_inv * pack.energy_momentum).trace();
      const double d = model.spatial_dim();
      CHECK(std::abs(trace + 0.5 * (d - 1) * pack.scalar) /
                std::max(1.0, std::abs(pack.scalar)) <
            1e-10);
    }
  }
}

TEST_CASE("robertson-walker ricci diagonal") {
  const ModelSpec rw = ModelSpec::robertson_walker(1, power_scale(2.0 / 3.0));
  Philox4x64 uni(43, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Vec p = random_point(rw, uni);
    const double t = p(0), r = p(1), phi = p(2);
    const auto& al = rw.alpha();
    const double a = al(t), a1 = al.deriv1(t), a2 = al.deriv2(t);
    const double k = 1.0;
    const double A = a * a2 + 2 * a1 * a1 + 2 * k;
    const auto pack = chart_curvature(rw, p);
    Vec expect(4);
    expect << -3 * a2 / a, A / (1 - k * r * r), A * r * r,
        A * r * r * std::sin(phi) * std::sin(phi);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(pack.ricci(i, i) - expect(i)) < 1e-10);
      for (int j = i + 1; j < 4; ++j)
        CHECK(std::abs(pack.ricci(i, j)) < 1e-12);
    }
  }
}

TEST_CASE("frame components") {
  const ModelSpec eds = ModelSpec::eds_like(2.0 / 3.0);
  // At t = 1 the chart metric is eta, so the identity frame is
  // pseudo-orthonormal and frame components equal chart components.
  const Vec p = pt(1, 0.3, 0.4, -0.2);
  const auto pack = chart_curvature(eds, p);
  Frame f{p, pack.g, Mat::Identity(4, 4)};
  const auto fc = frame_components(pack, f);
  double bad = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          bad = std::max(bad, std::abs(fc.riemann_dddd(i, j, a, b) -
                                       pack.riemann(i, j, a, b)));
  CHECK(bad < 1e-12);
  CHECK(fc.energy == doctest::Approx(energy_at(pack, f.e.col(0))));

  // Ricci contraction of the frame tensor reproduces the converted Ricci.
  Mat ric_from_pack(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      ric_from_pack(i, j) = f.e.col(i).dot(pack.ricci * f.e.col(j));
  CHECK((fc.ricci_dd - ric_from_pack).cwiseAbs().maxCoeff() < 1e-12);

  // Boosted frame: T_00 changes, the scalar does not.
  Frame boosted = f;
  const double chi = 0.7;
  boosted.e.col(0) = std::cosh(chi) * f.e.col(0) + std::sinh(chi) * f.e.col(1);
  boosted.e.col(1) = std::sinh(chi) * f.e.col(0) + std::cosh(chi) * f.e.col(1);
  const auto fb = frame_components(pack, boosted);
  CHECK(std::abs(fb.energy - fc.energy) > 1e-3);
  // scalar from frame components: R = sum_k R_k^k with indices via eta
  double r_frame = 0.0, r_boost = 0.0;
  for (int k = 0; k < 4; ++k) {
    r_frame += fc.ricci_ud(k, k);
    r_boost += fb.ricci_ud(k, k);
  }
  CHECK(r_frame == doctest::Approx(pack.scalar).epsilon(1e-10));
  CHECK(r_boost == doctest::Approx(pack.scalar).epsilon(1e-10));

  Frame wrong = f;
  wrong.point = pt(2, 0, 0, 0);
  CHECK_THROWS_AS(frame_components(pack, wrong), FrameMismatch);
}

TEST_CASE("perfect fluid split") {
  Philox4x64 uni(47, 0);
  for (double c : {0.5, 2.0 / 3.0, 1.1}) {
    const ModelSpec eds = ModelSpec::eds_like(c);
    for (int rep = 0; rep < 10; ++rep) {
      const Vec p = random_point(eds, uni);
      const double t = p(0);
      const auto fl = perfect_fluid_decompose(chart_curvature(eds, p));
      CHECK(fl.is_perfect);
      CHECK(fl.q == doctest::Approx(2 * c / (t * t)).epsilon(1e-10));
      CHECK(fl.p ==
            doctest::Approx((2 - 3 * c) * c / (t * t)).epsilon(1e-10));
      CHECK(fl.p_tilde ==
            doctest::Approx((2 * fl.p - fl.q) / 2.0).epsilon(1e-10));
      // U = normalized d/dt
      CHECK(fl.U(0) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(fl.U.tail(3).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  // c = 2/3: dust, p = 0
  const auto fl = perfect_fluid_decompose(
      chart_curvature(ModelSpec::eds_like(2.0 / 3.0), pt(1.9, 0, 0.2, 0)));
  CHECK(std::abs(fl.p) < 1e-12);

  const auto flm = perfect_fluid_decompose(
      chart_curvature(ModelSpec::minkowski(3), pt(0, 0, 0, 0)));
  CHECK(flm.is_perfect);
  CHECK(flm.q == 0.0);
  CHECK(flm.p == 0.0);
  CHECK(flm.U(0) == 1.0);

  // And the fluid form reassembles T~ when the split is declared perfect.
  const auto pack = chart_curvature(ModelSpec::eds_like(0.8), pt(1.3, 0, 0, 0));
  const auto f2 = perfect_fluid_decompose(pack);
  const Vec u_down = pack.g * f2.U;
  const Mat rebuilt = f2.q * u_down * u_down.transpose() - f2.p * pack.g;
  CHECK((rebuilt - pack.energy_momentum).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("sign-condition checkers") {
  CHECK(weak_energy_check(ModelSpec::eds_like(0.3)).ok);
  CHECK(weak_energy_check(ModelSpec::eds_like(1.5)).ok);
  CHECK(weak_energy_check(ModelSpec::minkowski(3)).ok);
  const ModelSpec coshrw = ModelSpec::robertson_walker(0, cosh_scale(),
                                                       Chart::Spherical);
  const auto wec = weak_energy_check(coshrw);
  CHECK(!wec.ok);
  CHECK(wec.worst_margin < 0.0);

  CHECK(scalar_sign_check(ModelSpec::eds_like(0.7)));
  CHECK(!scalar_sign_check(ModelSpec::eds_like(0.4)));
  CHECK(scalar_sign_check(ModelSpec::eds_like(0.5)));
  CHECK(scalar_sign_check(ModelSpec::minkowski(3)));

  CHECK(sectional_sign_check(ModelSpec::eds_like(2.0 / 3.0)));
  CHECK(!sectional_sign_check(ModelSpec::eds_like(1.2)));
  CHECK(sectional_sign_check(ModelSpec::eds_like(1.0)));
  CHECK(sectional_sign_check(ModelSpec::minkowski(3)));
  // non-analytic path: rw with power alpha, c <= 1 iff alpha'' <= 0
  CHECK(sectional_sign_check(
      ModelSpec::robertson_walker(0, power_scale(0.9), Chart::Spherical)));
  CHECK(!sectional_sign_check(
      ModelSpec::robertson_walker(0, power_scale(1.2), Chart::Spherical)));
}

TEST_CASE("scalar invariants agree across charts") {
  const ModelSpec sph = ModelSpec::eds_like(2.0 / 3.0, Chart::Spherical);
  const ModelSpec cart = ModelSpec::eds_like(2.0 / 3.0, Chart::Cartesian);
  Philox4x64 uni(53, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Vec p = random_point(sph, uni);
    Vec v_dir(4);
    for (int i = 0; i < 4; ++i) v_dir(i) = uni.next_uniform() - 0.5;
    const auto pack_s = chart_curvature(sph, p);
    Vec v = boosted_unit(pack_s, 1.0 + 2.0 * uni.next_uniform(),
                         v_dir.tail(3));
    Vec pc, vc;
    spherical_to_cartesian(p, v, &pc, &vc);
    const auto pack_c = chart_curvature(cart, pc);
    CHECK(std::abs(pack_s.scalar - pack_c.scalar) < 1e-10);
    CHECK(std::abs(energy_at(pack_s, v) - energy_at(pack_c, vc)) < 1e-10);
  }
}
