#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sentinel/sentinel.hpp"

namespace testing_support {

inline std::string source_dir() { return SENTINEL_SOURCE_DIR; }
inline std::string cli_path() { return SENTINEL_CLI; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI from the source tree so scenario paths stay relative.
inline CliResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = "cd '" + source_dir() + "' && " + env + " '" + cli_path() + "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Fresh temporary file path under the build tree.
inline std::string temp_path(const std::string& name) { return std::string(SENTINEL_BINARY_DIR) + "/" + name; }

inline sentinel::Scenario road(int lanes, int length, int speed_max, int horizon, double eps) {
  sentinel::Scenario s;
  s.lanes = lanes;
  s.road_length = length;
  s.speed_max = speed_max;
  s.horizon = horizon;
  s.policy_noise = eps;
  s.initial_state.ego_speed = 1;
  return s;
}

// Box-Muller on the library's counter stream, so samples match everywhere.
inline std::vector<double> normal_samples(std::uint64_t seed, std::size_t n, double mean, double sd,
                                          std::uint64_t stream = 0) {
  auto rng = sentinel::CounterStream::derive(seed, stream);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    out.push_back(mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2));
  }
  return out;
}

inline std::vector<double> planted_two_mode(std::uint64_t seed) {
  auto a = normal_samples(seed, 100, -80.0, 1.0, 0);
  auto b = normal_samples(seed, 100, 8.0, 1.0, 1);
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace testing_support
