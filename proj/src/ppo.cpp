#include "egopush/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace egopush {

PpoConfig ppo_config_from(const Config& user) {
  Config c = default_config();
  c.merge(user);
  PpoConfig p;
  p.lr = c.get_double("ppo.lr", 2.5e-4);
  p.gamma = c.get_double("ppo.gamma", 0.99);
  p.lam = c.get_double("ppo.lam", 0.95);
  p.clip = c.get_double("ppo.clip", 0.2);
  p.epochs = c.get_int("ppo.epochs", 8);
  p.minibatches = c.get_int("ppo.minibatches", 32);
  p.rollout = c.get_int("ppo.rollout", 32);
  p.entropy_coef = c.get_double("ppo.entropy_coef", 0.003);
  p.value_coef = c.get_double("ppo.value_coef", 0.5);
  p.max_grad_norm = c.get_double("ppo.max_grad_norm", 1.0);
  return p;
}

void RolloutBuffer::resize(int horizon_, int n_envs_, int obs_dim) {
  horizon = horizon_;
  n_envs = n_envs_;
  int m = horizon * n_envs;
  obs.resize(obs_dim, m);
  actions.resize(2, m);
  logprobs.resize(m);
  values.resize(m);
  rewards.resize(m);
  dones.assign(m, 0);
  bootstrap_value.resize(n_envs);
}

void RolloutBuffer::compute_gae(double gamma, double lam, VectorXd& adv,
                                VectorXd& ret) const {
  int m = size();
  adv.resize(m);
  ret.resize(m);
  VectorXd last_gae = VectorXd::Zero(n_envs);
  for (int t = horizon - 1; t >= 0; --t) {
    for (int i = 0; i < n_envs; ++i) {
      int j = idx(t, i);
      double nonterminal = dones[j] ? 0.0 : 1.0;
      double next_value =
          (t == horizon - 1) ? bootstrap_value[i] : values[idx(t + 1, i)];
      // The post-done observation is the next episode's start; never
      // bootstrap across it.
      double delta =
          rewards[j] + gamma * nonterminal * next_value - values[j];
      last_gae[i] = delta + gamma * lam * nonterminal * last_gae[i];
      adv[j] = last_gae[i];
      ret[j] = adv[j] + values[j];
    }
  }
}

PpoTrainer::PpoTrainer(TeacherNet& net, BatchEnv& env, const PpoConfig& cfg,
                       std::uint64_t seed)
    : net_(net), env_(env), cfg_(cfg), opt_(cfg.lr), rng_(seed) {}

void PpoTrainer::collect(RolloutBuffer& buffer) {
  const int n = env_.n_envs();
  buffer.resize(cfg_.rollout, n, env_.obs_dim());
  if (!started_) {
    cur_obs_ = env_.reset(env_.config().seed).obs;
    started_ = true;
  }

  TeacherNet::Cache cache;
  Vec2 ls = net_.log_std();
  double sx = std::exp(std::clamp(ls.x(), -5.0, 2.0));
  double sy = std::exp(std::clamp(ls.y(), -5.0, 2.0));

  for (int t = 0; t < cfg_.rollout; ++t) {
    net_.forward(cur_obs_, cache);
    Eigen::Matrix2Xd acts(2, n);
    for (int i = 0; i < n; ++i) {
      acts(0, i) = cache.mean(0, i) + sx * rng_.normal();
      acts(1, i) = cache.mean(1, i) + sy * rng_.normal();
    }
    VectorXd lp = gaussian_logprob(cache.mean, Vec2(std::log(sx), std::log(sy)),
                                   acts);
    const StepBatch& batch = env_.step(acts);
    for (int i = 0; i < n; ++i) {
      int j = buffer.idx(t, i);
      buffer.obs.col(j) = cur_obs_.col(i);
      buffer.actions.col(j) = acts.col(i);
      buffer.logprobs[j] = lp[i];
      buffer.values[j] = cache.value[i];
      buffer.rewards[j] = batch.reward[i];
      buffer.dones[j] = batch.done[i];
    }
    cur_obs_ = batch.obs;
    steps_ += n;
  }
  net_.forward(cur_obs_, cache);
  buffer.bootstrap_value = cache.value;

  for (const EpisodeSummary& s : env_.drain_summaries()) {
    ep_returns_.push_back(s.episode_return);
    ep_reached_.push_back(s.reached ? 1 : 0);
  }
}

UpdateStats PpoTrainer::update(const RolloutBuffer& buffer) {
  const int m = buffer.size();
  VectorXd adv, ret;
  buffer.compute_gae(cfg_.gamma, cfg_.lam, adv, ret);
  if (cfg_.normalize_adv) {
    double mean = adv.mean();
    double var = (adv.array() - mean).square().sum() / m;
    adv = (adv.array() - mean) / (std::sqrt(var) + 1e-8);
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  int n_minibatch_updates = 0;
  std::vector<Tensor*> params = net_.params();
  TeacherNet::Cache cache;

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    // Fisher-Yates with the trainer RNG keeps updates deterministic.
    for (int i = m - 1; i > 0; --i)
      std::swap(order[i], order[rng_.uniform_int(i + 1)]);

    int mb_size = m / cfg_.minibatches;
    if (mb_size < 1)
      throw std::runtime_error("ppo: minibatch size underflow");
    for (int mb = 0; mb < cfg_.minibatches; ++mb) {
      int begin = mb * mb_size;
      int end = (mb == cfg_.minibatches - 1) ? m : begin + mb_size;
      int bsz = end - begin;

      MatrixXd mb_obs(buffer.obs.rows(), bsz);
      MatrixXd mb_act(2, bsz);
      VectorXd mb_oldlp(bsz), mb_adv(bsz), mb_ret(bsz);
      for (int c = 0; c < bsz; ++c) {
        int j = order[begin + c];
        mb_obs.col(c) = buffer.obs.col(j);
        mb_act.col(c) = buffer.actions.col(j);
        mb_oldlp[c] = buffer.logprobs[j];
        mb_adv[c] = adv[j];
        mb_ret[c] = ret[j];
      }

      net_.forward(mb_obs, cache);
      Vec2 ls = net_.log_std();
      Vec2 ls_eff(std::clamp(ls.x(), -5.0, 2.0), std::clamp(ls.y(), -5.0, 2.0));
      VectorXd lp = gaussian_logprob(cache.mean, ls_eff, mb_act);

      MatrixXd d_mean = MatrixXd::Zero(2, bsz);
      VectorXd d_value(bsz);
      Vec2 d_log_std = Vec2::Zero();

      double pi_loss = 0.0, v_loss = 0.0;
      double inv_b = 1.0 / bsz;
      for (int c = 0; c < bsz; ++c) {
        double ratio = std::exp(lp[c] - mb_oldlp[c]);
        double a = mb_adv[c];
        double unclipped = ratio * a;
        double clipped =
            std::clamp(ratio, 1.0 - cfg_.clip, 1.0 + cfg_.clip) * a;
        pi_loss += -std::min(unclipped, clipped) * inv_b;
        double dlp = 0.0;
        if (unclipped <= clipped) dlp = -a * ratio * inv_b;
        // else: the clipped branch is active and flat -> zero gradient.

        double verr = cache.value[c] - mb_ret[c];
        v_loss += 0.5 * verr * verr * inv_b;
        d_value[c] = cfg_.value_coef * verr * inv_b;

        for (int k = 0; k < 2; ++k) {
          double sd = std::exp(ls_eff[k]);
          double z = (mb_act(k, c) - cache.mean(k, c)) / sd;
          d_mean(k, c) = dlp * (z / sd);
          d_log_std[k] += dlp * (z * z - 1.0);
        }
      }
      // Entropy bonus: state-independent, so it only moves log_std.
      double entropy = gaussian_entropy(ls_eff);
      d_log_std[0] -= cfg_.entropy_coef;
      d_log_std[1] -= cfg_.entropy_coef;

      double total_loss =
          pi_loss + cfg_.value_coef * v_loss - cfg_.entropy_coef * entropy;
      if (!std::isfinite(total_loss)) {
        std::ostringstream os;
        os << "ppo: non-finite loss (pi=" << pi_loss << " v=" << v_loss
           << " ent=" << entropy << ")";
        throw std::runtime_error(os.str());
      }

      Adam::zero_grad(params);
      net_.backward(cache, d_mean, d_value, d_log_std, MatrixXd());
      Adam::clip_grad_norm(params, cfg_.max_grad_norm);
      stats.grad_norm += Adam::grad_norm(params);
      opt_.step(params);

      stats.pi_loss += pi_loss;
      stats.v_loss += v_loss;
      stats.entropy += entropy;
      stats.approx_kl += (mb_oldlp - lp).mean();
      ++n_minibatch_updates;
    }
  }
  double inv = 1.0 / n_minibatch_updates;
  stats.pi_loss *= inv;
  stats.v_loss *= inv;
  stats.entropy *= inv;
  stats.approx_kl *= inv;
  stats.grad_norm *= inv;
  return stats;
}

IterStats PpoTrainer::iterate() {
  RolloutBuffer buffer;
  std::size_t ep_before = ep_returns_.size();
  collect(buffer);
  IterStats it;
  it.update = update(buffer);
  it.total_steps = steps_;
  it.episodes = static_cast<long>(ep_returns_.size() - ep_before);
  if (it.episodes > 0) {
    double sum = 0.0, reached = 0.0;
    for (std::size_t i = ep_before; i < ep_returns_.size(); ++i) {
      sum += ep_returns_[i];
      reached += ep_reached_[i];
    }
    it.mean_return = sum / it.episodes;
    it.reach_rate = reached / it.episodes;
  }
  return it;
}

void PpoTrainer::train(long total_steps,
                       const std::function<void(const IterStats&)>& on_iter) {
  while (steps_ < total_steps) {
    IterStats it = iterate();
    if (on_iter) on_iter(it);
  }
}

PolicyFn mean_policy(TeacherNet& net) {
  auto cache = std::make_shared<TeacherNet::Cache>();
  return [&net, cache](BatchEnv&, const StepBatch& batch,
                       Eigen::Matrix2Xd& actions) {
    net.forward(batch.obs, *cache);
    actions = cache->mean;
  };
}

PolicyFn random_policy(std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng](BatchEnv&, const StepBatch& batch, Eigen::Matrix2Xd& actions) {
    actions.resize(2, batch.obs.cols());
    for (int i = 0; i < actions.cols(); ++i) {
      actions(0, i) = rng->uniform(-1.0, 1.0);
      actions(1, i) = rng->uniform(-1.0, 1.0);
    }
  };
}

std::vector<EpisodeSummary> run_episodes(BatchEnv& env, const PolicyFn& policy,
                                         int n_episodes, std::uint64_t seed,
                                         long max_total_steps) {
  std::vector<EpisodeSummary> episodes;
  const StepBatch* batch = &env.reset(seed);
  Eigen::Matrix2Xd actions(2, env.n_envs());
  long steps = 0;
  while (static_cast<int>(episodes.size()) < n_episodes) {
    policy(env, *batch, actions);
    batch = &env.step(actions);
    steps += env.n_envs();
    for (EpisodeSummary& s : env.drain_summaries())
      episodes.push_back(std::move(s));
    if (max_total_steps > 0 && steps > max_total_steps)
      throw std::runtime_error("run_episodes: step budget exhausted");
  }
  episodes.resize(n_episodes);
  return episodes;
}

std::vector<double> smooth_series(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    if (i >= static_cast<std::size_t>(window)) sum -= xs[i - window];
    out[i] = sum / std::min<std::size_t>(i + 1, window);
  }
  return out;
}

}  // namespace egopush
