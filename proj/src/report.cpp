#include "z2lab/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace z2lab {

std::string to_string(Sector s) {
  return s == Sector::TStar ? "t-star" : "t0";
}

Sector sector_from_string(const std::string& name) {
  if (name == "t-star") return Sector::TStar;
  if (name == "t0") return Sector::T0;
  throw std::invalid_argument("unknown sector: " + name);
}

void RunConfig::validate() const {
  if (level < 0 || level > 8) throw std::invalid_argument("level must lie in [0, 8]");
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  static const std::set<std::string> known = {"modes",       "exponents",   "ode",
                                              "lift",        "constraints", "inequalities"};
  for (const auto& a : analyses) {
    if (!known.count(a)) throw std::invalid_argument("unknown analysis: " + a);
  }
}

nlohmann::json config_to_json(const RunConfig& config) {
  nlohmann::json j;
  j["schema"] = 1;
  j["solid"] = to_string(config.solid);
  if (config.solid == Solid::TwoPoints) j["two_point_angle"] = report_round(config.two_point_angle);
  j["level"] = config.level;
  j["sector"] = to_string(config.sector);
  j["tol"] = config.tol;
  j["seed"] = config.seed;
  j["count"] = config.count;
  j["analyses"] = config.analyses;
  j["output_dir"] = config.output_dir;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig config;
  config.solid = solid_from_string(j.at("solid").get<std::string>());
  if (j.contains("two_point_angle")) config.two_point_angle = j["two_point_angle"].get<double>();
  if (j.contains("level")) config.level = j["level"].get<int>();
  if (j.contains("sector")) config.sector = sector_from_string(j["sector"].get<std::string>());
  if (j.contains("tol")) config.tol = j["tol"].get<double>();
  if (j.contains("seed")) config.seed = j["seed"].get<unsigned>();
  if (j.contains("count")) config.count = j["count"].get<int>();
  if (j.contains("analyses")) {
    for (const auto& a : j["analyses"]) config.analyses.insert(a.get<std::string>());
  }
  if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
  config.validate();
  return config;
}

double report_round(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return std::strtod(buf, nullptr);
}

std::string dump_report(const nlohmann::json& j) {
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace z2lab
