#pragma once

#include <set>
#include <string>

#include "json.hpp"
#include "z2lab/solids.hpp"

namespace z2lab {

enum class Sector { TStar, T0 };

std::string to_string(Sector s);
Sector sector_from_string(const std::string& name);

/// One orchestrated run. Serialized to/from JSON; flag overrides are
/// applied by the command line layer.
struct RunConfig {
  Solid solid = Solid::Tetrahedron;
  double two_point_angle = M_PI;
  int level = 5;
  Sector sector = Sector::T0;
  double tol = 1e-9;
  unsigned seed = 1;
  int count = 1;
  std::set<std::string> analyses;  // modes, exponents, ode, lift, constraints, inequalities
  std::string output_dir = ".";

  void validate() const;
};

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// Rounds to 12 significant digits; every floating-point number placed in
/// a report goes through this, so identical runs serialize identically.
double report_round(double value);

/// Serializes with 2-space indentation and a trailing newline.
std::string dump_report(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace z2lab
