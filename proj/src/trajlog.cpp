#include "egopush/trajlog.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace egopush {

using nlohmann::json;

namespace {

const char* role_tag(Role r) {
  switch (r) {
    case Role::Active:
      return "active";
    case Role::Anchor:
      return "anchor";
    case Role::Obstacle:
      return "obstacle";
  }
  return "?";
}

json poses_json(const EnvCore& env) {
  json objs = json::array();
  for (const auto& o : env.world().objects) {
    objs.push_back({{"id", o.id},
                    {"role", role_tag(o.role)},
                    {"x", o.pose.x},
                    {"y", o.pose.y},
                    {"yaw", o.pose.yaw},
                    {"vx", o.lin_vel.x()},
                    {"vy", o.lin_vel.y()},
                    {"w", o.ang_vel}});
  }
  return objs;
}

json robot_json(const EnvCore& env) {
  const Pose2& p = env.world().robot.pose;
  return {{"x", p.x}, {"y", p.y}, {"yaw", p.yaw}};
}

}  // namespace

void TrajWriter::write_reset(const EnvCore& env) {
  json j{{"type", "reset"},
         {"seed", env.episode_seed()},
         {"robot", robot_json(env)},
         {"objects", poses_json(env)}};
  (*out_) << j.dump() << "\n";
}

void TrajWriter::write_step(const EnvCore& env, const Vec2& raw_action,
                            const EnvCore::StepResult& res) {
  const RewardComponents& c = res.components;
  json j{{"type", "step"},
         {"t", env.episode_steps()},
         {"robot", robot_json(env)},
         {"objects", poses_json(env)},
         {"action", {raw_action.x(), raw_action.y()}},
         {"reward", res.reward},
         {"components",
          {{"reached", c.reached},
           {"placed", c.placed},
           {"success", c.success},
           {"progress", c.progress},
           {"smooth", c.smooth_pen},
           {"slow", c.slow}}},
         {"stage",
          {{"idx", env.stage().stage_idx},
           {"tau", env.stage().tau},
           {"gate", env.stage().gate}}},
         {"outcome", outcome_name(res.outcome)},
         {"done", res.outcome != Outcome::Running}};
  (*out_) << j.dump() << "\n";
}

std::vector<ReplayEpisode> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trajlog: cannot open " + path);
  std::vector<ReplayEpisode> episodes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    std::string type = j.at("type").get<std::string>();
    if (type == "reset") {
      ReplayEpisode ep;
      ep.seed = j.at("seed").get<std::uint64_t>();
      episodes.push_back(std::move(ep));
    } else if (type == "step") {
      if (episodes.empty())
        throw std::runtime_error("trajlog: step record before any reset");
      ReplayEpisode& ep = episodes.back();
      auto act = j.at("action");
      ep.actions.emplace_back(act[0].get<double>(), act[1].get<double>());
      std::vector<double> pose;
      pose.push_back(j.at("robot").at("x").get<double>());
      pose.push_back(j.at("robot").at("y").get<double>());
      pose.push_back(j.at("robot").at("yaw").get<double>());
      for (const auto& o : j.at("objects")) {
        pose.push_back(o.at("x").get<double>());
        pose.push_back(o.at("y").get<double>());
        pose.push_back(o.at("yaw").get<double>());
      }
      ep.poses.push_back(std::move(pose));
      ep.outcomes.push_back(j.at("outcome").get<std::string>());
    }
  }
  return episodes;
}

ReplayReport replay_check(const std::string& path, const EnvConfig& cfg) {
  ReplayReport report;
  std::vector<ReplayEpisode> episodes = read_trajectory(path);
  EnvCore env(cfg);
  for (const auto& ep : episodes) {
    if (ep.actions.empty()) continue;  // trailing reset of an open episode
    env.reset(ep.seed);
    ++report.episodes;
    for (std::size_t t = 0; t < ep.actions.size(); ++t) {
      env.step(ep.actions[t]);
      ++report.steps;
      std::vector<double> pose;
      pose.push_back(env.world().robot.pose.x);
      pose.push_back(env.world().robot.pose.y);
      pose.push_back(env.world().robot.pose.yaw);
      for (const auto& o : env.world().objects) {
        pose.push_back(o.pose.x);
        pose.push_back(o.pose.y);
        pose.push_back(o.pose.yaw);
      }
      if (pose.size() != ep.poses[t].size()) {
        report.exact = false;
        report.message = "pose arity mismatch";
        return report;
      }
      for (std::size_t i = 0; i < pose.size(); ++i) {
        if (pose[i] != ep.poses[t][i]) {
          std::ostringstream os;
          os << "mismatch at episode " << report.episodes << " step " << t
             << " field " << i;
          report.exact = false;
          report.message = os.str();
          return report;
        }
      }
    }
  }
  return report;
}

}  // namespace egopush
