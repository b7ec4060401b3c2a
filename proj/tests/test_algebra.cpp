#include <doctest.h>

#include "rdiff/algebra.hpp"
#include "rdiff/rng.hpp"

#include <cmath>

using namespace rdiff;

namespace {

Vec basis(int n, int i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

Vec random_vec(NormalStream& ns, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = ns.next();
  return v;
}

// Independent oracle for the bracket on simple bivectors: the four-term
// inner-product expansion, assembled literally.
Bivector bracket_simple(const Vec& a, const Vec& b, const Vec& u, const Vec& v) {
  Bivector out(static_cast<int>(a.size()));
  out.m = eta_inner(a, u) * wedge(b, v).m + eta_inner(b, v) * wedge(a, u).m -
          eta_inner(a, v) * wedge(b, u).m - eta_inner(b, u) * wedge(a, v).m;
  return out;
}

}  // namespace

TEST_CASE("eta inner products on the canonical basis") {
  const int n = 4;
  CHECK(eta_inner(basis(n, 0), basis(n, 0)) == 1.0);
  CHECK(eta_inner(basis(n, 1), basis(n, 1)) == -1.0);
  CHECK(eta_inner(basis(n, 0), basis(n, 1)) == 0.0);
  CHECK_THROWS_AS(eta_inner(basis(3, 0), basis(4, 0)), DimensionMismatch);
}

TEST_CASE("wedge action on basis vectors") {
  const int n = 4;
  const Vec e0 = basis(n, 0), e1 = basis(n, 1), e2 = basis(n, 2);
  CHECK((wedge_action(e0, e1, e0) - e1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((wedge_action(e0, e1, e1) - e0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(wedge_action(e1, e2, e0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bivector action agrees with wedge_action") {
  NormalStream ns(81, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec u = random_vec(ns, 4), v = random_vec(ns, 4), w = random_vec(ns, 4);
    const Vec lhs = apply(wedge(u, v), w);
    const Vec rhs = wedge_action(u, v, w);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("wedge action lies in so(1,d)") {
  NormalStream ns(82, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec u = random_vec(ns, 4), v = random_vec(ns, 4);
    const Vec w = random_vec(ns, 4), wp = random_vec(ns, 4);
    const double s = eta_inner(wedge_action(u, v, w), wp) +
                     eta_inner(w, wedge_action(u, v, wp));
    CHECK(std::abs(s) < 1e-12);
  }
}

TEST_CASE("so bracket on basis bivectors") {
  const int n = 4;
  const Vec e0 = basis(n, 0), e1 = basis(n, 1), e2 = basis(n, 2);
  const Bivector lhs = so_bracket(wedge(e0, e1), wedge(e0, e2));
  CHECK((lhs.m - wedge(e1, e2).m).cwiseAbs().maxCoeff() == 0.0);

  const Bivector self = so_bracket(wedge(e1, e2), wedge(e1, e2));
  CHECK(self.m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("so bracket antisymmetry and simple-bivector oracle") {
  NormalStream ns(83, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec a = random_vec(ns, 4), b = random_vec(ns, 4);
    const Vec u = random_vec(ns, 4), v = random_vec(ns, 4);
    const Bivector X = wedge(a, b), Y = wedge(u, v);
    const Bivector br = so_bracket(X, Y);
    const Bivector rbr = so_bracket(Y, X);
    CHECK((br.m + rbr.m).cwiseAbs().maxCoeff() < 1e-12);
    const Bivector oracle = bracket_simple(a, b, u, v);
    const double scale = std::max(1.0, oracle.m.cwiseAbs().maxCoeff());
    CHECK((br.m - oracle.m).cwiseAbs().maxCoeff() / scale < 1e-12);
  }
}

TEST_CASE("basis commutation relations hold exactly") {
  const int n = 4;
  const Mat eta = eta_matrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const Bivector lhs =
              so_bracket(wedge(basis(n, i), basis(n, j)),
                         wedge(basis(n, k), basis(n, l)));
          const Mat rhs =
              eta(i, k) * wedge(basis(n, j), basis(n, l)).m +
              eta(j, l) * wedge(basis(n, i), basis(n, k)).m -
              eta(i, l) * wedge(basis(n, j), basis(n, k)).m -
              eta(j, k) * wedge(basis(n, i), basis(n, l)).m;
          CHECK((lhs.m - rhs).cwiseAbs().maxCoeff() == 0.0);
        }
}

TEST_CASE("jacobi identity on random bivectors") {
  NormalStream ns(84, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Bivector X = wedge(random_vec(ns, 4), random_vec(ns, 4));
    const Bivector Y = wedge(random_vec(ns, 4), random_vec(ns, 4));
    const Bivector Z = wedge(random_vec(ns, 4), random_vec(ns, 4));
    const Mat sum = so_bracket(so_bracket(X, Y), Z).m +
                    so_bracket(so_bracket(Y, Z), X).m +
                    so_bracket(so_bracket(Z, X), Y).m;
    const double scale = std::max({1.0, X.m.cwiseAbs().maxCoeff(),
                                   Y.m.cwiseAbs().maxCoeff(),
                                   Z.m.cwiseAbs().maxCoeff()});
    CHECK(sum.cwiseAbs().maxCoeff() / (scale * scale * scale) < 1e-12);
  }
}

TEST_CASE("bivector inner products on the canonical basis") {
  const int n = 4;
  const Vec e0 = basis(n, 0), e1 = basis(n, 1), e2 = basis(n, 2);
  CHECK(eta_inner_bivec(wedge(e0, e1), wedge(e0, e1)) == -1.0);
  CHECK(eta_inner_bivec(wedge(e1, e2), wedge(e1, e2)) == 1.0);
  CHECK(eta_inner_bivec(wedge(e0, e1), wedge(e0, e2)) == 0.0);
}

TEST_CASE("gram_schmidt_g is idempotent on orthonormal frames") {
  Frame f;
  f.point = Vec::Zero(4);
  f.g = eta_matrix(4);
  f.e = Mat::Identity(4, 4);
  const Frame out = gram_schmidt_g(f);
  CHECK((out.e - f.e).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gram_schmidt_g repairs a perturbed frame") {
  Frame f;
  f.point = Vec::Zero(4);
  f.g = eta_matrix(4);
  f.e = Mat::Identity(4, 4);
  f.e(2, 1) += 0.01;  // e_1 <- e_1 + 0.01 e_2
  const Frame out = gram_schmidt_g(f);
  CHECK(frame_orthonormality_error(out) < 1e-12);
  // e_0 untouched, e_1 direction corrected inside span(e_1, e_2)
  CHECK((out.e.col(0) - f.e.col(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram_schmidt_g on a boosted frame against a curved metric") {
  Frame f;
  f.point = Vec::Zero(4);
  f.g = Mat::Zero(4, 4);
  f.g(0, 0) = 1.0;
  f.g(1, 1) = f.g(2, 2) = f.g(3, 3) = -4.0;  // warped-type spatial scaling
  f.e = Mat::Identity(4, 4);
  f.e(0, 0) = 2.0;
  f.e(1, 0) = 0.3;  // timelike, boosted
  const Frame out = gram_schmidt_g(f);
  CHECK(frame_orthonormality_error(out) < 1e-12);
  CHECK(out.e(0, 0) > 0.0);
  // direction of e_0 preserved
  CHECK(out.e(1, 0) / out.e(0, 0) == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("gram_schmidt_g rejects linearly dependent input") {
  Frame f;
  f.point = Vec::Zero(4);
  f.g = eta_matrix(4);
  f.e = Mat::Identity(4, 4);
  f.e.col(2) = f.e.col(1);
  CHECK_THROWS_AS(gram_schmidt_g(f), DegenerateFrame);
}
