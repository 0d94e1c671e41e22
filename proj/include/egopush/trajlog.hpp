#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "egopush/env.hpp"

namespace egopush {

// JSON-lines trajectory log: one `reset` record at each episode start, one
// `step` record per policy step. Doubles round-trip exactly, so a log +
// config reproduce the trajectory bit for bit.
class TrajWriter {
 public:
  explicit TrajWriter(std::ostream& out) : out_(&out) {}

  void write_reset(const EnvCore& env);
  void write_step(const EnvCore& env, const Vec2& raw_action,
                  const EnvCore::StepResult& res);

 private:
  std::ostream* out_;
};

struct ReplayEpisode {
  std::uint64_t seed = 0;
  std::vector<Vec2> actions;
  // Per step: robot pose followed by each object pose, as logged.
  std::vector<std::vector<double>> poses;
  std::vector<std::string> outcomes;
};

std::vector<ReplayEpisode> read_trajectory(const std::string& path);

struct ReplayReport {
  bool exact = true;
  int episodes = 0;
  long steps = 0;
  std::string message;
};

// Re-simulates the logged actions from the logged seeds and compares every
// pose exactly (==). cfg must match the config the log was produced with.
ReplayReport replay_check(const std::string& path, const EnvConfig& cfg);

}  // namespace egopush
