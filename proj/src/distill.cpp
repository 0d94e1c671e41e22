#include "egopush/distill.hpp"

#include <cmath>

namespace egopush {

Eigen::Matrix3d relational_similarity(const MatrixXd& latents) {
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  Eigen::Vector3d norms;
  for (int i = 0; i < 3; ++i) norms[i] = latents.col(i).norm();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (norms[i] == 0.0 || norms[j] == 0.0) continue;  // zero-latent rule
      s(i, j) = latents.col(i).dot(latents.col(j)) / (norms[i] * norms[j]);
    }
  }
  return s;
}

double relational_loss(const Eigen::Matrix3d& s_teacher,
                       const Eigen::Matrix3d& s_student) {
  return (s_teacher - s_student).squaredNorm();
}

MatrixXd relational_loss_grad(const MatrixXd& student_latents,
                              const Eigen::Matrix3d& s_teacher) {
  Eigen::Matrix3d s = relational_similarity(student_latents);
  Eigen::Matrix3d g = 2.0 * (s - s_teacher);  // dL/dS
  MatrixXd dz = MatrixXd::Zero(student_latents.rows(), 3);
  Eigen::Vector3d norms;
  for (int i = 0; i < 3; ++i) norms[i] = student_latents.col(i).norm();
  for (int k = 0; k < 3; ++k) {
    if (norms[k] == 0.0) continue;
    for (int j = 0; j < 3; ++j) {
      if (j == k || norms[j] == 0.0) continue;
      // S(k,j) and S(j,k) are the same entry twice in the Frobenius sum.
      double coeff = g(k, j) + g(j, k);
      dz.col(k) += coeff * (student_latents.col(j) / (norms[k] * norms[j]) -
                            s(k, j) * student_latents.col(k) /
                                (norms[k] * norms[k]));
    }
  }
  return dz;
}

DistillConfig distill_config_from(const Config& user) {
  Config c = default_config();
  c.merge(user);
  DistillConfig d;
  d.lambda_rel = c.get_double("distill.lambda_rel", 1.0);
  d.lr = c.get_double("distill.lr", 1e-3);
  d.warm_start = c.get_bool("distill.warm_start", true);
  d.collect_steps = c.get_int("distill.collect_steps", 4);
  return d;
}

DistillBatchLoss distill_loss(const MatrixXd& student_mean,
                              const MatrixXd& teacher_mean,
                              const MatrixXd& student_latents,
                              const MatrixXd& teacher_latents,
                              const DistillConfig& cfg) {
  const int B = static_cast<int>(student_mean.cols());
  DistillBatchLoss out;

  MatrixXd diff = student_mean - teacher_mean;
  out.stats.action_mse = diff.squaredNorm() / (2.0 * B);
  out.d_mean = cfg.action_weight * diff / B;  // d(mean sq err)/d(mean)

  out.d_latents = MatrixXd::Zero(student_latents.rows(), 4 * B);
  double rel_sum = 0.0;
  if (cfg.lambda_rel != 0.0) {
    for (int b = 0; b < B; ++b) {
      MatrixXd zs = student_latents.middleCols(4 * b, 3);
      MatrixXd zt = teacher_latents.middleCols(4 * b, 3);
      Eigen::Matrix3d st = relational_similarity(zt);
      Eigen::Matrix3d ss = relational_similarity(zs);
      rel_sum += relational_loss(st, ss);
      MatrixXd dz = relational_loss_grad(zs, st);
      out.d_latents.middleCols(4 * b, 3) = (cfg.lambda_rel / B) * dz;
    }
    rel_sum /= B;
  }
  out.stats.rel_loss = rel_sum;
  out.stats.total =
      cfg.action_weight * out.stats.action_mse + cfg.lambda_rel * rel_sum;
  return out;
}

KeypointDistiller::KeypointDistiller(const TeacherNet& teacher,
                                     TeacherNet& student, BatchEnv& env,
                                     const DistillConfig& cfg)
    : teacher_(teacher), student_(student), env_(env), cfg_(cfg),
      opt_(cfg.lr) {
  if (cfg_.warm_start) student_.copy_policy_mlp_from(teacher_);
}

DistillStats KeypointDistiller::step() {
  const int n = env_.n_envs();
  if (!started_) {
    cur_obs_ = env_.reset(env_.config().seed).obs;
    started_ = true;
  }

  const int B = n * cfg_.collect_steps;
  MatrixXd big_obs(env_.obs_dim(), B);
  MatrixXd t_mean(2, B);
  MatrixXd t_latents(teacher_.config().enc.d, 4 * B);

  TeacherNet::Cache scratch;
  for (int s = 0; s < cfg_.collect_steps; ++s) {
    // Teacher labels the states the student visits, online.
    teacher_.forward(cur_obs_, scratch);
    t_mean.middleCols(s * n, n) = scratch.mean;
    t_latents.middleCols(4 * s * n, 4 * n) = scratch.enc.Z;
    big_obs.middleCols(s * n, n) = cur_obs_;

    student_.forward(cur_obs_, scratch);
    Eigen::Matrix2Xd actions = scratch.mean;
    cur_obs_ = env_.step(actions).obs;
  }

  TeacherNet::Cache cache;
  student_.forward(big_obs, cache);
  DistillBatchLoss loss = distill_loss(cache.mean, t_mean, cache.enc.Z,
                                       t_latents, cfg_);
  std::vector<Tensor*> params = student_.params();
  Adam::zero_grad(params);
  student_.backward(cache, loss.d_mean, VectorXd(), Vec2::Zero(),
                    loss.d_latents);
  opt_.step(params);

  history_.push_back(loss.stats);
  return loss.stats;
}

}  // namespace egopush
