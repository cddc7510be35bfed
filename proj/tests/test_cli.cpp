#include "doctest.h"
#include "z2lab/report.hpp"

#include <cmath>

using namespace z2lab;
using nlohmann::json;

TEST_CASE("config json round-trip") {
  RunConfig config;
  config.solid = Solid::IcosahedronVertices;
  config.level = 4;
  config.sector = Sector::T0;
  config.tol = 1e-8;
  config.seed = 42;
  config.count = 3;
  config.analyses = {"modes", "ode"};
  config.output_dir = "/tmp/z2lab-test";
  const RunConfig back = config_from_json(config_to_json(config));
  CHECK(back.solid == config.solid);
  CHECK(back.level == config.level);
  CHECK(back.sector == config.sector);
  CHECK(back.tol == config.tol);
  CHECK(back.seed == config.seed);
  CHECK(back.count == config.count);
  CHECK(back.analyses == config.analyses);
  CHECK(back.output_dir == config.output_dir);
}

TEST_CASE("config validation rejects bad levels, tolerances and analyses") {
  RunConfig config;
  config.level = 9;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.level = 5;
  config.tol = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.tol = 1e-9;
  config.analyses = {"nonsense"};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("report rounding is idempotent and 12-digit stable") {
  const double x = 0.123456789012345678;
  const double r = report_round(x);
  CHECK(report_round(r) == r);
  CHECK(std::abs(r - x) < 1e-12);
  CHECK(report_round(1.0) == 1.0);
  CHECK(report_round(-3.25e-7) == -3.25e-7);
}

TEST_CASE("dump_report is stable for identical payloads") {
  json a;
  a["schema"] = 1;
  a["value"] = report_round(0.7549021612345);
  json b;
  b["schema"] = 1;
  b["value"] = report_round(0.7549021612345);
  CHECK(dump_report(a) == dump_report(b));
  CHECK(dump_report(a).back() == '\n');
}
