#include <doctest.h>

#include "rdiff/io.hpp"

#include <cstdio>
#include <fstream>

using namespace rdiff;

TEST_CASE("g17 formatting round-trips doubles") {
  for (double x : {1.0 / 3.0, 2.0 / 3.0, 1e-17, 123456.789, -0.0, 1e300}) {
    const std::string s = fmt_g17(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(fmt_g17(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("csv header is pinned") {
  CHECK(path_csv_header(3) ==
        "s,t,dt,x1,x2,x3,dx1,dx2,dx3,energy,hyp_angle,lambda,a_func,xi,"
        "pnorm_err");
  CHECK(path_csv_header(1) ==
        "s,t,dt,x1,dx1,energy,hyp_angle,lambda,a_func,xi,pnorm_err");
}

TEST_CASE("path csv and footer round out a run") {
  const ModelSpec eds = ModelSpec::eds_like(2.0 / 3.0);
  Vec x = Vec::Zero(4);
  x(0) = 1.0;
  Vec dir(3);
  dir << 1, 0, 0;
  const PhaseState init = make_phase_state(eds, x, 1.5, dir);
  StepConfig cfg;
  cfg.h = 0.01;
  cfg.s_max = 1.0;
  cfg.output_stride = 10;
  const PathSeries path = geodesic_integrate(eds, init, cfg);

  const std::string file = "test_path_out.csv";
  write_path_csv(file, eds, path);
  write_path_footer(file, path);

  std::ifstream in(file);
  std::string header;
  std::getline(in, header);
  CHECK(header == path_csv_header(3));
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == static_cast<int>(path.samples.size()));

  std::ifstream fin(file + ".footer.json");
  Json footer;
  fin >> footer;
  CHECK(footer.at("status") == "completed");
  CHECK(footer.at("cone_exit") == false);
  std::remove(file.c_str());
  std::remove((file + ".footer.json").c_str());
}

TEST_CASE("config round-trip is identity") {
  RunConfig cfg;
  cfg.model = "rw";
  cfg.c = 0.71;
  cfg.k = -1;
  cfg.kind = "r";
  cfg.rho = 1.25;
  cfg.step.h = 0.005;
  cfg.step.s_max = 123.0;
  cfg.snapshots = {1.0, 10.0};
  cfg.tests = {"tdot_to_one"};
  cfg.x0 = {0.5, 1.0, 0.25};
  cfg.dir0 = {0.0, 1.0, 0.0};
  const Json j1 = cfg.to_json();
  const RunConfig back = RunConfig::from_json(j1);
  const Json j2 = back.to_json();
  CHECK(j1.dump() == j2.dump());
}

TEST_CASE("unknown config keys are rejected") {
  Json j = Json::object();
  j["model"] = {{"kind", "eds"}, {"c", 0.7}};
  j["mystery"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
  Json j2 = Json::object();
  j2["model"] = {{"kind", "eds"}, {"c", 0.7}, {"colour", "blue"}};
  CHECK_THROWS_AS(RunConfig::from_json(j2), ConfigError);
}

TEST_CASE("model building from config") {
  RunConfig cfg;
  cfg.model = "eds";
  cfg.c = 0.8;
  const ModelSpec m = cfg.build_model();
  CHECK(m.kind() == ModelKind::EdSLike);
  CHECK(m.chart() == Chart::Cartesian);
  cfg.model = "rw";
  cfg.k = 1;
  CHECK(cfg.build_model().chart() == Chart::Spherical);
  cfg.model = "minkowski";
  CHECK(cfg.build_model().kind() == ModelKind::Minkowski);
  cfg.model = "nonsense";
  CHECK_THROWS_AS(cfg.build_model(), ConfigError);
}

TEST_CASE("curvature report structure") {
  const ModelSpec mink = ModelSpec::minkowski(3);
  const Json j = curvature_report(mink, Vec::Zero(4));
  CHECK(j.at("scalar") == 0.0);
  CHECK(j.at("riemann").size() == 0);
  CHECK(j.at("christoffel").size() == 0);
  CHECK(j.at("fluid").at("is_perfect") == true);
  CHECK(j.at("checks").at("scalar_sign") == true);
  CHECK(j.at("checks").at("sectional_sign") == true);

  const ModelSpec eds = ModelSpec::eds_like(2.0 / 3.0);
  Vec p = Vec::Zero(4);
  p(0) = 1.0;
  const Json je = curvature_report(eds, p);
  CHECK(std::abs(je.at("scalar").get<double>() + 4.0 / 3.0) < 1e-12);
  CHECK(je.at("fluid").at("q").get<double>() ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-10));
}
