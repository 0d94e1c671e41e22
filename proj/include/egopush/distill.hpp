#pragma once

#include <Eigen/Dense>
#include <vector>

#include "egopush/env.hpp"
#include "egopush/nets.hpp"

namespace egopush {

// Pairwise cosine similarity over the shared group latents {act, anc, obs}.
// A zero latent gets similarity 0 against everything, its diagonal included.
Eigen::Matrix3d relational_similarity(const MatrixXd& latents);  // d x 3

double relational_loss(const Eigen::Matrix3d& s_teacher,
                       const Eigen::Matrix3d& s_student);

// Gradient of relational_loss wrt the *student* latents.
MatrixXd relational_loss_grad(const MatrixXd& student_latents,  // d x 3
                              const Eigen::Matrix3d& s_teacher);

struct DistillConfig {
  double action_weight = 1.0;
  double lambda_rel = 1.0;
  double lr = 1e-3;
  bool warm_start = true;
  int collect_steps = 4;  // env steps gathered per iteration
};

DistillConfig distill_config_from(const Config& cfg);

struct DistillStats {
  double action_mse = 0.0;
  double rel_loss = 0.0;
  double total = 0.0;
};

// Online DAgger-style distillation into a keypoint student with the
// teacher's architecture: the student acts, the teacher labels the visited
// states, one supervised update per iteration.
class KeypointDistiller {
 public:
  KeypointDistiller(const TeacherNet& teacher, TeacherNet& student,
                    BatchEnv& env, const DistillConfig& cfg);

  DistillStats step();
  const std::vector<DistillStats>& history() const { return history_; }

 private:
  const TeacherNet& teacher_;
  TeacherNet& student_;
  BatchEnv& env_;
  DistillConfig cfg_;
  Adam opt_;
  bool started_ = false;
  MatrixXd cur_obs_;
  std::vector<DistillStats> history_;
};

// Shared supervised-loss plumbing used by both distillers: computes the
// loss and the gradients wrt the student mean and its {act, anc, obs}
// latents (segment layout: 4 groups per sample, ref slot untouched).
struct DistillBatchLoss {
  DistillStats stats;
  MatrixXd d_mean;     // 2 x B
  MatrixXd d_latents;  // d x 4B
};

DistillBatchLoss distill_loss(const MatrixXd& student_mean,
                              const MatrixXd& teacher_mean,
                              const MatrixXd& student_latents,   // d x 4B
                              const MatrixXd& teacher_latents,   // d x 4B
                              const DistillConfig& cfg);

}  // namespace egopush
