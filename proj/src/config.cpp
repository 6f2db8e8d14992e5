#include "occflow/config.hpp"

#include <cstdlib>
#include <fstream>

namespace occflow {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    fail(Err::BadConfig, "config: bad numeric value for " + key + ": '" + value + "'");
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  char* end = nullptr;
  long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    fail(Err::BadConfig, "config: bad integer value for " + key + ": '" + value + "'");
  return v;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

OcclusionMode parse_occlusion_mode(const std::string& s) {
  if (s == "soft") return OcclusionMode::Soft;
  if (s == "hard_min") return OcclusionMode::HardMin;
  if (s == "off") return OcclusionMode::Off;
  fail(Err::BadConfig, "config: occlusion_mode must be soft|hard_min|off, got '" + s + "'");
}

std::string occlusion_mode_name(OcclusionMode m) {
  switch (m) {
    case OcclusionMode::Soft: return "soft";
    case OcclusionMode::HardMin: return "hard_min";
    case OcclusionMode::Off: return "off";
  }
  return "?";
}

std::vector<Direction> parse_directions(const std::string& s) {
  if (s == "4") return directions_default();
  if (s == "paper") return directions_paper();
  if (s == "axis") return directions_axis();
  fail(Err::BadConfig, "config: directions must be 4|paper|axis, got '" + s + "'");
}

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "lambda_p") cfg.loss.lambda_p = parse_double(key, value);
  else if (key == "lambda_s") cfg.loss.lambda_s = parse_double(key, value);
  else if (key == "lambda_p1st") cfg.loss.lambda_p1st = parse_double(key, value);
  else if (key == "lambda_p2nd") cfg.loss.lambda_p2nd = parse_double(key, value);
  else if (key == "lambda_s2nd") cfg.loss.lambda_s2nd = parse_double(key, value);
  else if (key == "epsilon") cfg.loss.epsilon = parse_double(key, value);
  else if (key == "kappa") cfg.loss.kappa = parse_double(key, value);
  else if (key == "alpha") cfg.loss.alpha = parse_double(key, value);
  else if (key == "occlusion_mode") cfg.loss.occlusion_mode = parse_occlusion_mode(value);
  else if (key == "directions") cfg.loss.directions = parse_directions(value);
  else if (key == "smooth_order") {
    long v = parse_long(key, value);
    if (v != 1 && v != 2) fail(Err::BadConfig, "config: smooth_order must be 1 or 2");
    cfg.loss.smooth_order = static_cast<int>(v);
  } else if (key == "levels") cfg.solve.levels = static_cast<int>(parse_long(key, value));
  else if (key == "iterations") cfg.solve.iterations_per_level = static_cast<int>(parse_long(key, value));
  else if (key == "step_size") cfg.solve.step_size = parse_double(key, value);
  else if (key == "beta1") cfg.solve.adam_beta1 = parse_double(key, value);
  else if (key == "beta2") cfg.solve.adam_beta2 = parse_double(key, value);
  else if (key == "adam_eps") cfg.solve.adam_eps = parse_double(key, value);
  else if (key == "convergence_tol") cfg.solve.convergence_tol = parse_double(key, value);
  else if (key == "seed") cfg.solve.seed = static_cast<uint64_t>(parse_long(key, value));
  else fail(Err::BadConfig, "config: unknown key '" + key + "'");
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) fail(Err::IoFailure, "cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(Err::BadConfig, path + ":" + std::to_string(lineno) + ": expected key=value");
    set_config_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

}  // namespace occflow
