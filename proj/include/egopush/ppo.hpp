#pragma once

#include <functional>
#include <vector>

#include "egopush/config.hpp"
#include "egopush/env.hpp"
#include "egopush/nets.hpp"

namespace egopush {

struct PpoConfig {
  double lr = 2.5e-4;
  double gamma = 0.99;
  double lam = 0.95;
  double clip = 0.2;
  int epochs = 8;
  int minibatches = 32;
  int rollout = 32;
  double entropy_coef = 0.003;
  double value_coef = 0.5;
  double max_grad_norm = 1.0;
  bool normalize_adv = true;
};

PpoConfig ppo_config_from(const Config& cfg);

struct RolloutBuffer {
  int horizon = 0;
  int n_envs = 0;
  MatrixXd obs;      // obs_dim x (horizon * n_envs)
  MatrixXd actions;  // 2 x (horizon * n_envs), raw (pre-clamp) samples
  VectorXd logprobs;
  VectorXd values;
  VectorXd rewards;
  std::vector<std::uint8_t> dones;
  VectorXd bootstrap_value;  // n_envs, V(s_{T}) per env

  void resize(int horizon_, int n_envs_, int obs_dim);
  int size() const { return horizon * n_envs; }
  int idx(int t, int i) const { return t * n_envs + i; }

  // Advantages are recomputed from raw rewards/values on every call.
  void compute_gae(double gamma, double lam, VectorXd& adv,
                   VectorXd& ret) const;
};

struct UpdateStats {
  double pi_loss = 0.0;
  double v_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
};

struct IterStats {
  long total_steps = 0;
  UpdateStats update;
  long episodes = 0;
  double mean_return = 0.0;  // over episodes finished this iteration
  double reach_rate = 0.0;
};

class PpoTrainer {
 public:
  PpoTrainer(TeacherNet& net, BatchEnv& env, const PpoConfig& cfg,
             std::uint64_t seed);

  IterStats iterate();
  // Runs full iterations until at least total_steps env steps are consumed.
  void train(long total_steps,
             const std::function<void(const IterStats&)>& on_iter = {});

  void collect(RolloutBuffer& buffer);
  UpdateStats update(const RolloutBuffer& buffer);

  const std::vector<double>& episode_returns() const { return ep_returns_; }
  const std::vector<std::uint8_t>& episode_reached() const {
    return ep_reached_;
  }
  long total_steps() const { return steps_; }
  Adam& optimizer() { return opt_; }

 private:
  TeacherNet& net_;
  BatchEnv& env_;
  PpoConfig cfg_;
  Adam opt_;
  Rng rng_;
  MatrixXd cur_obs_;
  bool started_ = false;
  long steps_ = 0;
  std::vector<double> ep_returns_;
  std::vector<std::uint8_t> ep_reached_;
};

// Deterministic policy rollouts (evaluation). The policy fills the action
// matrix for the current batch.
using PolicyFn =
    std::function<void(BatchEnv& env, const StepBatch& batch,
                       Eigen::Matrix2Xd& actions)>;

PolicyFn mean_policy(TeacherNet& net);
PolicyFn random_policy(std::uint64_t seed);

// Steps the batch until n_episodes episodes finish; returns them in
// completion order (deterministic for a fixed config).
std::vector<EpisodeSummary> run_episodes(BatchEnv& env, const PolicyFn& policy,
                                         int n_episodes, std::uint64_t seed,
                                         long max_total_steps = -1);

// Window-smoothed curve of a scalar series (trailing window mean).
std::vector<double> smooth_series(const std::vector<double>& xs, int window);

}  // namespace egopush
