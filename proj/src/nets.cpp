#include "egopush/nets.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

namespace egopush {

MatrixXd orthogonal_init(int rows, int cols, Rng& rng, double gain) {
  int n = std::max(rows, cols);
  MatrixXd a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
  MatrixXd r = qr.matrixQR();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  return gain * q.topLeftCorner(rows, cols);
}

Linear::Linear(const std::string& name, int in, int out, Rng& rng,
               double gain)
    : W(name + ".W", out, in), b(name + ".b", out, 1) {
  W.v = orthogonal_init(out, in, rng, gain);
}

MatrixXd Linear::forward(const MatrixXd& x) const {
  return (W.v * x).colwise() + Eigen::VectorXd(b.v.col(0));
}

MatrixXd Linear::backward(const MatrixXd& x, const MatrixXd& dy) {
  W.g.noalias() += dy * x.transpose();
  b.g.col(0).noalias() += dy.rowwise().sum();
  return W.v.transpose() * dy;
}

GroupEncoder::GroupEncoder(const EncoderConfig& cfg, Rng& rng) : cfg_(cfg) {
  l1 = Linear("enc.l1", 3, cfg.h1, rng, std::sqrt(2.0));
  l2 = Linear("enc.l2", cfg.h1, cfg.h2, rng, std::sqrt(2.0));
  proj = Linear("enc.proj", cfg.h2, cfg.d, rng, 1.0);
}

void GroupEncoder::forward(const MatrixXd& obs, const ObsLayout& layout,
                           Cache& c) const {
  const int B = static_cast<int>(obs.cols());
  const int n_segments = B * ObsLayout::kGroups;
  const Vec3& eps = cfg_.mask_value;

  c.seg_begin.assign(n_segments, 0);
  c.seg_end.assign(n_segments, 0);
  c.nonempty.assign(n_segments, 0);
  c.pooled_col.assign(n_segments, -1);
  c.bits = VectorXd::Zero(n_segments);

  // Gather points kept for pooling, segment by segment.
  int total_pts = 0;
  for (int b = 0; b < B; ++b)
    for (int g = 0; g < ObsLayout::kGroups; ++g)
      total_pts += layout.points_in_group(g);
  c.X.resize(3, total_pts);

  int col = 0;
  for (int b = 0; b < B; ++b) {
    for (int g = 0; g < ObsLayout::kGroups; ++g) {
      int seg = b * ObsLayout::kGroups + g;
      c.seg_begin[seg] = col;
      int off = layout.group_offset(g);
      int npts = layout.points_in_group(g);
      bool any_visible = false;
      for (int p = 0; p < npts; ++p) {
        double x = obs(off + 3 * p + 0, b);
        double y = obs(off + 3 * p + 1, b);
        double z = obs(off + 3 * p + 2, b);
        bool masked = (x == eps.x() && y == eps.y() && z == eps.z());
        if (!masked) any_visible = true;
        if (cfg_.eps_feed || !masked) {
          c.X(0, col) = x;
          c.X(1, col) = y;
          c.X(2, col) = z;
          ++col;
        }
      }
      c.seg_end[seg] = col;
      c.nonempty[seg] =
          (cfg_.eps_feed ? (col > c.seg_begin[seg]) : any_visible) ? 1 : 0;
      c.bits[seg] = any_visible ? 1.0 : 0.0;
    }
  }
  c.X.conservativeResize(3, col);

  c.H1 = tanh_fwd(l1.forward(c.X));
  c.H2 = tanh_fwd(l2.forward(c.H1));

  // Segment-wise max pool with argmax bookkeeping.
  int n_pooled = 0;
  for (int s = 0; s < n_segments; ++s)
    if (c.nonempty[s]) c.pooled_col[s] = n_pooled++;
  c.M.resize(cfg_.h2, n_pooled);
  c.argmax.assign(static_cast<std::size_t>(n_pooled) * cfg_.h2, -1);
  for (int s = 0; s < n_segments; ++s) {
    if (!c.nonempty[s]) continue;
    int out_col = c.pooled_col[s];
    for (int f = 0; f < cfg_.h2; ++f) {
      double best = -std::numeric_limits<double>::infinity();
      int best_i = -1;
      for (int i = c.seg_begin[s]; i < c.seg_end[s]; ++i) {
        if (c.H2(f, i) > best) {
          best = c.H2(f, i);
          best_i = i;
        }
      }
      c.M(f, out_col) = best;
      c.argmax[static_cast<std::size_t>(out_col) * cfg_.h2 + f] = best_i;
    }
  }

  MatrixXd z_pooled = tanh_fwd(proj.forward(c.M));
  c.Z = MatrixXd::Zero(cfg_.d, n_segments);
  for (int s = 0; s < n_segments; ++s)
    if (c.pooled_col[s] >= 0) c.Z.col(s) = z_pooled.col(c.pooled_col[s]);
}

VectorXd GroupEncoder::encode(const KeypointSet& points,
                              double* bit_out) const {
  const Vec3& eps = cfg_.mask_value;
  MatrixXd x(3, points.size());
  int col = 0;
  bool any_visible = false;
  for (const auto& p : points) {
    bool masked = (p.x() == eps.x() && p.y() == eps.y() && p.z() == eps.z());
    if (!masked) any_visible = true;
    if (cfg_.eps_feed || !masked) {
      x.col(col++) = p;
    }
  }
  if (bit_out) *bit_out = any_visible ? 1.0 : 0.0;
  bool pool = cfg_.eps_feed ? col > 0 : any_visible;
  if (!pool) return VectorXd::Zero(cfg_.d);
  x.conservativeResize(3, col);
  MatrixXd h2 = tanh_fwd(l2.forward(tanh_fwd(l1.forward(x))));
  VectorXd m = h2.rowwise().maxCoeff();
  return tanh_fwd(proj.forward(m));
}

void GroupEncoder::backward(const Cache& c, const MatrixXd& dZ) {
  int n_pooled = static_cast<int>(c.M.cols());
  if (n_pooled == 0) return;
  // Gradient only flows through pooled (nonempty) segments.
  MatrixXd z_pooled(cfg_.d, n_pooled);
  MatrixXd dz_pooled(cfg_.d, n_pooled);
  for (std::size_t s = 0; s < c.pooled_col.size(); ++s) {
    int pc = c.pooled_col[s];
    if (pc < 0) continue;
    z_pooled.col(pc) = c.Z.col(static_cast<int>(s));
    dz_pooled.col(pc) = dZ.col(static_cast<int>(s));
  }
  MatrixXd d_proj_in = proj.backward(c.M, tanh_bwd(z_pooled, dz_pooled));

  MatrixXd dH2 = MatrixXd::Zero(cfg_.h2, c.H2.cols());
  for (int pc = 0; pc < n_pooled; ++pc)
    for (int f = 0; f < cfg_.h2; ++f) {
      int i = c.argmax[static_cast<std::size_t>(pc) * cfg_.h2 + f];
      dH2(f, i) += d_proj_in(f, pc);
    }
  MatrixXd dH1 = l2.backward(c.H1, tanh_bwd(c.H2, dH2));
  l1.backward(c.X, tanh_bwd(c.H1, dH1));
}

std::vector<Tensor*> GroupEncoder::params() {
  return {&l1.W, &l1.b, &l2.W, &l2.b, &proj.W, &proj.b};
}

TeacherNet::TeacherNet(const NetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  Rng rng(seed);
  encoder = GroupEncoder(cfg.enc, rng);
  int in = 2 + ObsLayout::kGroups * (cfg.enc.d + 1);
  p1_ = Linear("pi.l1", in, cfg.mlp_width, rng, std::sqrt(2.0));
  p2_ = Linear("pi.l2", cfg.mlp_width, cfg.mlp_width, rng, std::sqrt(2.0));
  mean_head_ = Linear("pi.mean", cfg.mlp_width, 2, rng, 0.01);
  v1_ = Linear("vf.l1", in, cfg.mlp_width, rng, std::sqrt(2.0));
  v2_ = Linear("vf.l2", cfg.mlp_width, cfg.mlp_width, rng, std::sqrt(2.0));
  value_head_ = Linear("vf.value", cfg.mlp_width, 1, rng, 1.0);
  log_std_ = Tensor("pi.log_std", 2, 1);
  log_std_.v.setConstant(std::log(cfg.init_std));
}

void TeacherNet::forward(const MatrixXd& obs, Cache& c) const {
  const int B = static_cast<int>(obs.cols());
  encoder.forward(obs, cfg_.layout, c.enc);

  const int d = cfg_.enc.d;
  const int in = 2 + ObsLayout::kGroups * (d + 1);
  c.input.resize(in, B);
  int pa_off = cfg_.layout.prev_action_offset();
  for (int b = 0; b < B; ++b) {
    c.input(0, b) = obs(pa_off + 0, b);
    c.input(1, b) = obs(pa_off + 1, b);
    for (int g = 0; g < ObsLayout::kGroups; ++g) {
      int seg = b * ObsLayout::kGroups + g;
      c.input.block(2 + g * (d + 1), b, d, 1) = c.enc.Z.col(seg);
      c.input(2 + g * (d + 1) + d, b) = c.enc.bits[seg];
    }
  }

  c.p1 = tanh_fwd(p1_.forward(c.input));
  c.p2 = tanh_fwd(p2_.forward(c.p1));
  c.mean = tanh_fwd(mean_head_.forward(c.p2));
  c.v1 = tanh_fwd(v1_.forward(c.input));
  c.v2 = tanh_fwd(v2_.forward(c.v1));
  c.value = value_head_.forward(c.v2).row(0);
}

void TeacherNet::backward(Cache& c, const MatrixXd& d_mean,
                          const VectorXd& d_value, const Vec2& d_log_std,
                          const MatrixXd& d_latents) {
  const int B = static_cast<int>(c.input.cols());
  const int d = cfg_.enc.d;

  log_std_.g(0, 0) += d_log_std.x();
  log_std_.g(1, 0) += d_log_std.y();

  MatrixXd d_input = MatrixXd::Zero(c.input.rows(), B);
  if (d_mean.size() > 0) {
    MatrixXd dp2 = mean_head_.backward(c.p2, tanh_bwd(c.mean, d_mean));
    MatrixXd dp1 = p2_.backward(c.p1, tanh_bwd(c.p2, dp2));
    d_input += p1_.backward(c.input, tanh_bwd(c.p1, dp1));
  }
  if (d_value.size() > 0) {
    MatrixXd dvh = d_value.transpose();
    MatrixXd dv2 = value_head_.backward(c.v2, dvh);
    MatrixXd dv1 = v2_.backward(c.v1, tanh_bwd(c.v2, dv2));
    d_input += v1_.backward(c.input, tanh_bwd(c.v1, dv1));
  }

  // Latent gradient = MLP-input slice + any external term (distillation).
  MatrixXd dZ = MatrixXd::Zero(d, B * ObsLayout::kGroups);
  for (int b = 0; b < B; ++b)
    for (int g = 0; g < ObsLayout::kGroups; ++g)
      dZ.col(b * ObsLayout::kGroups + g) =
          d_input.block(2 + g * (d + 1), b, d, 1);
  if (d_latents.size() > 0) dZ += d_latents;
  encoder.backward(c.enc, dZ);
}

std::vector<Tensor*> TeacherNet::params() {
  std::vector<Tensor*> ps = encoder.params();
  for (Tensor* t : {&p1_.W, &p1_.b, &p2_.W, &p2_.b, &mean_head_.W,
                    &mean_head_.b, &log_std_, &v1_.W, &v1_.b, &v2_.W, &v2_.b,
                    &value_head_.W, &value_head_.b})
    ps.push_back(t);
  return ps;
}

std::vector<const Tensor*> TeacherNet::params() const {
  auto mut = const_cast<TeacherNet*>(this)->params();
  return std::vector<const Tensor*>(mut.begin(), mut.end());
}

void TeacherNet::copy_policy_mlp_from(const TeacherNet& other) {
  p1_.W.v = other.p1_.W.v;
  p1_.b.v = other.p1_.b.v;
  p2_.W.v = other.p2_.W.v;
  p2_.b.v = other.p2_.b.v;
  mean_head_.W.v = other.mean_head_.W.v;
  mean_head_.b.v = other.mean_head_.b.v;
  log_std_.v = other.log_std_.v;
}

void TeacherNet::copy_all_from(const TeacherNet& other) {
  auto dst = params();
  auto src = const_cast<TeacherNet&>(other).params();
  if (dst.size() != src.size())
    throw std::runtime_error("net: parameter count mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->v = src[i]->v;
}

VectorXd gaussian_logprob(const MatrixXd& mean, const Vec2& log_std,
                          const MatrixXd& actions) {
  const double log2pi = std::log(2.0 * kPi);
  VectorXd lp = VectorXd::Zero(mean.cols());
  for (int i = 0; i < 2; ++i) {
    double ls = log_std[i];
    double inv_var = std::exp(-2.0 * ls);
    Eigen::ArrayXd diff = (actions.row(i) - mean.row(i)).transpose().array();
    lp.array() += -0.5 * diff.square() * inv_var - ls - 0.5 * log2pi;
  }
  return lp;
}

double gaussian_entropy(const Vec2& log_std) {
  const double c = 0.5 * std::log(2.0 * kPi * std::exp(1.0));
  return (log_std.x() + c) + (log_std.y() + c);
}

void Adam::step(const std::vector<Tensor*>& params) {
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* t : params) {
      m_.push_back(MatrixXd::Zero(t->v.rows(), t->v.cols()));
      v_.push_back(MatrixXd::Zero(t->v.rows(), t->v.cols()));
    }
  }
  if (m_.size() != params.size())
    throw std::runtime_error("adam: parameter set changed");
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& t = *params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * t.g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * t.g.cwiseProduct(t.g);
    MatrixXd mhat = m_[i] / bc1;
    MatrixXd vhat = v_[i] / bc2;
    t.v.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
  }
}

void Adam::zero_grad(const std::vector<Tensor*>& params) {
  for (Tensor* t : params) t->zero_grad();
}

double Adam::grad_norm(const std::vector<Tensor*>& params) {
  double sq = 0.0;
  for (const Tensor* t : params) sq += t->g.squaredNorm();
  return std::sqrt(sq);
}

void Adam::clip_grad_norm(const std::vector<Tensor*>& params,
                          double max_norm) {
  double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    double scale = max_norm / norm;
    for (Tensor* t : params) t->g *= scale;
  }
}

}  // namespace egopush
