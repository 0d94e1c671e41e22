#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "egopush/geometry.hpp"
#include "egopush/rng.hpp"

namespace egopush {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Tensor {
  std::string name;
  MatrixXd v;
  MatrixXd g;

  Tensor() = default;
  Tensor(std::string n, int rows, int cols)
      : name(std::move(n)), v(MatrixXd::Zero(rows, cols)),
        g(MatrixXd::Zero(rows, cols)) {}
  void zero_grad() { g.setZero(); }
};

MatrixXd orthogonal_init(int rows, int cols, Rng& rng, double gain);

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out, Rng& rng, double gain);

  MatrixXd forward(const MatrixXd& x) const;  // x: in x B -> out x B
  // Accumulates parameter grads, returns dx.
  MatrixXd backward(const MatrixXd& x, const MatrixXd& dy);

  Tensor W;  // out x in
  Tensor b;  // out x 1
};

inline MatrixXd tanh_fwd(const MatrixXd& x) { return x.array().tanh(); }
// dy through tanh given the forward *output* y.
inline MatrixXd tanh_bwd(const MatrixXd& y, const MatrixXd& dy) {
  return (1.0 - y.array().square()) * dy.array();
}

// Flat-observation layout shared by the nets and the env (act, anc, obs,
// ref groups then the previous action).
struct ObsLayout {
  int k = 8;
  int n_obs_max = 3;

  static constexpr int kGroups = 4;  // act, anc, obs, ref
  int points_in_group(int g) const { return g == 2 ? k * n_obs_max : k; }
  int group_offset(int g) const {
    int off = 0;
    for (int i = 0; i < g; ++i) off += 3 * points_in_group(i);
    return off;
  }
  int prev_action_offset() const { return group_offset(kGroups); }
  int dim() const { return prev_action_offset() + 2; }
};

struct EncoderConfig {
  int h1 = 64;
  int h2 = 128;
  int d = 64;
  bool eps_feed = false;  // feed mask-valued points instead of dropping them
  Vec3 mask_value = Vec3(-10.0, -10.0, -10.0);
};

// PointNet-style group encoder: shared per-point MLP, masked max-pool, then
// a projection to the latent. Masked points are dropped before pooling; an
// all-masked group short-circuits to the zero latent with visibility bit 0.
class GroupEncoder {
 public:
  GroupEncoder() = default;
  GroupEncoder(const EncoderConfig& cfg, Rng& rng);

  struct Cache {
    MatrixXd X;                   // 3 x Npts, visible points of all segments
    MatrixXd H1, H2;              // per-point activations
    std::vector<int> seg_begin;   // per segment, inclusive
    std::vector<int> seg_end;     // per segment, exclusive
    std::vector<std::uint8_t> nonempty;
    std::vector<int> argmax;      // h2 entries per nonempty segment
    std::vector<int> pooled_col;  // segment -> column in M (-1 if empty)
    MatrixXd M;                   // h2 x S pooled features
    MatrixXd Z;                   // d x n_segments (zero cols for empty)
    VectorXd bits;                // n_segments
  };

  // obs: flat observation matrix (layout.dim() x B). Encodes all 4 groups of
  // every sample; segment index = b * 4 + g.
  void forward(const MatrixXd& obs, const ObsLayout& layout,
               Cache& cache) const;
  // Single point-set variant (tests, ad-hoc callers).
  VectorXd encode(const KeypointSet& points, double* bit_out = nullptr) const;

  void backward(const Cache& cache, const MatrixXd& dZ);

  std::vector<Tensor*> params();
  const EncoderConfig& config() const { return cfg_; }

  Linear l1, l2, proj;

 private:
  EncoderConfig cfg_;
};

struct NetConfig {
  ObsLayout layout;
  EncoderConfig enc;
  int mlp_width = 256;
  double init_std = 0.5;
};

// Teacher policy/value network: shared group encoder, tanh MLP trunks, a
// tanh-squashed Gaussian mean with state-independent log-std.
class TeacherNet {
 public:
  TeacherNet() = default;
  TeacherNet(const NetConfig& cfg, std::uint64_t seed);

  struct Cache {
    GroupEncoder::Cache enc;
    MatrixXd input;    // in x B
    MatrixXd p1, p2;   // policy trunk activations
    MatrixXd v1, v2;   // value trunk activations
    MatrixXd mean;     // 2 x B (tanh-squashed)
    VectorXd value;    // B
  };

  void forward(const MatrixXd& obs, Cache& cache) const;

  // d_latents: d x (4B) gradient on the group latents (may be empty).
  void backward(Cache& cache, const MatrixXd& d_mean, const VectorXd& d_value,
                const Vec2& d_log_std, const MatrixXd& d_latents);

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;

  // Policy MLP weights only (trunk + mean head + log-std), for warm starts.
  void copy_policy_mlp_from(const TeacherNet& other);
  void copy_all_from(const TeacherNet& other);

  Vec2 log_std() const { return Vec2(log_std_.v(0, 0), log_std_.v(1, 0)); }
  const NetConfig& config() const { return cfg_; }

  GroupEncoder encoder;
  Linear p1_, p2_, mean_head_;
  Linear v1_, v2_, value_head_;
  Tensor log_std_;

 private:
  NetConfig cfg_;
};

// Diagonal-Gaussian helpers (actions: 2 x B).
VectorXd gaussian_logprob(const MatrixXd& mean, const Vec2& log_std,
                          const MatrixXd& actions);
double gaussian_entropy(const Vec2& log_std);

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Tensor*>& params);
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  static void zero_grad(const std::vector<Tensor*>& params);
  static double grad_norm(const std::vector<Tensor*>& params);
  static void clip_grad_norm(const std::vector<Tensor*>& params,
                             double max_norm);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<MatrixXd> m_, v_;
};

}  // namespace egopush
