#include "hdys/model/hdys.hpp"

#include <cmath>
#include <map>
#include <random>

#include "hdys/common/error.hpp"

namespace hdys::model {
namespace {

bool is_set(Channel c) { return c == Channel::Markers || c == Channel::Keypoints; }

std::string name_of(Channel c) { return kin::channel_name(c); }

int set_slot(Channel c) { return c == Channel::Markers ? 0 : 1; }

bool small_head(Channel c) {
  return c == Channel::TorqueAngleTree || c == Channel::Emg || c == Channel::Angles || c == Channel::Keypoints;
}

}  // namespace

HDySModel::HDySModel(HDySConfig cfg, ModelShape shape) : cfg_(std::move(cfg)), shape_(std::move(shape)) {
  cfg_.validate();
}

std::string HDySModel::head_name(Channel target, int keypoints) const {
  if (target == Channel::Markers) throw ConfigError("marker accelerations are not predicted");
  if (!kin::is_kinematics(target)) throw ConfigError(name_of(target) + " is not an acceleration target");
  std::string n = "fdae.head.acc." + name_of(target);
  if (target == Channel::Keypoints) n += "." + std::to_string(keypoints);
  return n;
}

nc::ParameterStore HDySModel::init(std::uint64_t seed) const {
  nc::ParameterStore store;
  std::mt19937_64 rng(seed);
  Init init{store, rng};
  const int d = cfg_.latent_dim;
  auto enabled = [&](Channel c) { return cfg_.channel(c) && shape_.width[kin::index(c)] != 0; };

  auto add_encoder = [&](const std::string& prefix, Channel c, bool tilde) {
    const int w = shape_.width[kin::index(c)];
    const int in = tilde ? w / 3 * 2 : w;
    if (is_set(c)) {
      add_linear(init, prefix + ".in", in, cfg_.set_width);
      add_transformer(init, prefix + ".tf", cfg_.set_width, cfg_.set_ff, cfg_.set_layers);
      add_linear(init, prefix + ".out", cfg_.set_width, d);
    } else {
      add_mlp(init, prefix, {in, cfg_.mlp_hidden1, cfg_.mlp_hidden2, d});
    }
  };

  for (auto c : kin::kKinematicsChannels)
    if (enabled(c)) add_encoder("idae.enc." + name_of(c), c, false);
  if (!cfg_.no_temporal_refinement) {
    store.add("idae.pos", nc::kaiming_uniform({static_cast<std::size_t>(cfg_.window), static_cast<std::size_t>(d)},
                                              static_cast<std::size_t>(d), rng));
    add_transformer(init, "idae.temporal", d, cfg_.temporal_ff, cfg_.temporal_layers);
  }
  for (auto c : kin::kDynamicsChannels)
    if (enabled(c)) {
      const int h = small_head(c) ? cfg_.head_hidden_small : cfg_.head_hidden_large;
      add_mlp(init, "idae.head." + name_of(c), {d, h, shape_.width[kin::index(c)]});
    }

  if (!cfg_.no_fdae) {
    if (!cfg_.tie_fdae_encoders)
      for (auto c : kin::kKinematicsChannels)
        if (enabled(c)) add_encoder("fdae.enc." + name_of(c), c, true);
    for (auto c : kin::kDynamicsChannels)
      if (enabled(c)) add_mlp(init, "fdae.dyn." + name_of(c), {shape_.width[kin::index(c)], cfg_.dyn_hidden, d});
    add_mlp(init, "fdae.composer", {2 * d, cfg_.composer_hidden, d});
    if (enabled(Channel::Keypoints))
      for (int k : shape_.keypoint_counts)
        add_mlp(init, head_name(Channel::Keypoints, k), {d, cfg_.head_hidden_small, 3 * k});
    for (auto c : {Channel::Angles, Channel::Pose})
      if (enabled(c))
        add_mlp(init, head_name(c, 0),
                {d, small_head(c) ? cfg_.head_hidden_small : cfg_.head_hidden_large, shape_.width[kin::index(c)] / 3});
  }
  return store;
}

void HDySModel::check(const nc::ParameterStore& store) const {
  const auto fresh = init(0);
  std::vector<std::string> trained;
  for (const auto& n : store.names())
    if (store.trainable(n)) trained.push_back(n);
  if (trained != fresh.names())
    throw ConfigError("checkpoint parameters do not match the configuration (" + std::to_string(trained.size()) +
                      " tensors vs " + std::to_string(fresh.names().size()) + " expected)");
  for (const auto& n : trained)
    if (store.get(n).shape() != fresh.get(n).shape())
      throw ConfigError("checkpoint tensor '" + n + "' has shape " + nc::shape_str(store.get(n).shape()) +
                        ", the configuration expects " + nc::shape_str(fresh.get(n).shape()));
}

Var HDySModel::encode_kinematics(nc::Binding& b, Channel c, Var x, const std::vector<std::int64_t>& segments,
                                 bool accel_free) const {
  if (!kin::is_kinematics(c)) throw ConfigError(name_of(c) + " is not a kinematics channel");
  const std::string prefix = (accel_free && !cfg_.tie_fdae_encoders ? "fdae.enc." : "idae.enc.") + name_of(c);
  if (!b.store().contains(is_set(c) ? prefix + ".in.w" : prefix + ".l0.w"))
    throw ConfigError("channel " + name_of(c) + " is not enabled in this model");
  if (!is_set(c)) return mlp(b, prefix, x);
  if (segments.empty()) throw ConfigError("empty " + name_of(c) + " set");
  std::int64_t tokens = 0;
  for (auto s : segments) {
    if (s < 1) throw ConfigError("empty " + name_of(c) + " set in a frame");
    tokens += s;
  }
  if (tokens != static_cast<std::int64_t>(x.shape()[0]))
    throw ShapeError(name_of(c) + ": token counts do not add up to the input rows");
  Var h = linear(b, prefix + ".in", x);
  h = transformer(b, prefix + ".tf", h, cfg_.set_heads, segments);
  return linear(b, prefix + ".out", nc::segment_mean(h, segments));
}

Var HDySModel::refine(nc::Binding& b, Var z, int window) const {
  if (static_cast<int>(z.shape().back()) != cfg_.latent_dim)
    throw ShapeError("latent width " + std::to_string(z.shape().back()) + " does not match d = " +
                     std::to_string(cfg_.latent_dim));
  if (cfg_.no_temporal_refinement) return z;
  const auto rows = z.shape()[0];
  if (window != cfg_.window || rows % static_cast<std::size_t>(window) != 0)
    throw ShapeError("temporal refinement expects windows of " + std::to_string(cfg_.window) + " frames");
  std::vector<double> onehot(rows * static_cast<std::size_t>(window), 0.0);
  for (std::size_t r = 0; r < rows; ++r) onehot[r * static_cast<std::size_t>(window) + r % static_cast<std::size_t>(window)] = 1.0;
  const Var select = b.graph().constant(nc::Tensor::matrix(rows, static_cast<std::size_t>(window), std::move(onehot)));
  const Var h = nc::add(z, nc::matmul(select, b("idae.pos")));
  const std::vector<std::int64_t> segments(rows / static_cast<std::size_t>(window), window);
  return transformer(b, "idae.temporal", h, cfg_.temporal_heads, segments);
}

Var HDySModel::id_head(nc::Binding& b, Channel target, Var refined) const {
  return mlp(b, "idae.head." + name_of(target), refined);
}

Var HDySModel::encode_dynamics(nc::Binding& b, Channel dynamics, Var tau) const {
  if (cfg_.no_fdae) throw ConfigError("the forward-dynamics auto-encoder is disabled (ablation.no_fdae)");
  return mlp(b, "fdae.dyn." + name_of(dynamics), tau);
}

Var HDySModel::compose(nc::Binding& b, Var z_tilde, Var z_dynamics) const {
  return mlp(b, "fdae.composer", nc::concat({z_tilde, z_dynamics}));
}

Var HDySModel::fd_head(nc::Binding& b, Channel target, Var composed, int keypoints) const {
  const auto name = head_name(target, keypoints);
  if (!b.store().contains(name + ".l0.w")) throw ConfigError("no acceleration head '" + name + "' in this model");
  return mlp(b, name, composed);
}

GroupForward HDySModel::forward(nc::Binding& b, const GroupInput& in) const {
  GroupForward out;
  auto& g = b.graph();
  std::vector<Channel> kin_present, dyn_present;
  for (auto c : kin::kKinematicsChannels)
    if (in.has(c)) kin_present.push_back(c);
  for (auto c : kin::kDynamicsChannels)
    if (in.has(c)) dyn_present.push_back(c);
  auto segs = [&](Channel c) -> const std::vector<std::int64_t>& {
    static const std::vector<std::int64_t> none;
    return is_set(c) ? in.segments[set_slot(c)] : none;
  };

  for (auto c : kin_present) {
    const Var z = encode_kinematics(b, c, g.constant(in.full[kin::index(c)]), segs(c));
    out.kinematics.push_back({"z_" + name_of(c), z});
  }
  if (!dyn_present.empty())
    for (std::size_t i = 0; i < kin_present.size(); ++i) {
      const Var r = refine(b, out.kinematics[i].z, in.window);
      for (auto t : dyn_present)
        out.inverse.push_back({name_of(t), name_of(kin_present[i]), id_head(b, t, r), in.full[kin::index(t)], in.weights});
    }

  if (cfg_.no_fdae || dyn_present.empty()) return out;
  if (dyn_present.size() > 1)
    throw ConfigError("profile " + in.profile + " supplies more than one dynamics block to the FDAE");
  const Channel t = dyn_present.front();
  const Var zt = encode_dynamics(b, t, g.constant(in.full[kin::index(t)]));
  const auto targets = accel_targets(in.mask);
  for (auto c : kin_present) {
    const Var zk = encode_kinematics(b, c, g.constant(in.tilde[kin::index(c)]), segs(c), true);
    const Var zc = compose(b, zk, zt);
    out.composed.push_back({"z_" + name_of(c) + "^" + name_of(t), zc});
    for (auto a : targets)
      out.forward.push_back({"acc." + name_of(a), name_of(c), fd_head(b, a, zc, in.keypoints),
                             in.accel[kin::index(a)], in.weights});
  }
  return out;
}

std::vector<Channel> accel_targets(const kin::ChannelMask& mask) {
  std::vector<Channel> out;
  for (auto c : {Channel::Keypoints, Channel::Angles, Channel::Pose})
    if (mask.test(kin::index(c))) out.push_back(c);
  return out;
}

Var loss_recon(std::span<const ReconTerm> terms) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ReconTerm*>> by_target;
  for (const auto& t : terms) {
    bool live = t.weights.empty();
    for (double w : t.weights) live = live || w > 0.0;
    if (!live) continue;
    if (!by_target.count(t.target)) order.push_back(t.target);
    by_target[t.target].push_back(&t);
  }
  if (order.empty()) throw DeadConfigError("every reconstruction target is masked out");
  Var total;
  for (const auto& target : order) {
    const auto& list = by_target[target];
    Var acc;
    for (const auto* t : list) {
      const Var l = nc::l1_distance(t->pred, t->pred.graph->constant(t->truth), t->weights);
      acc = acc.valid() ? nc::add(acc, l) : l;
    }
    acc = nc::scale(acc, 1.0 / static_cast<double>(list.size()));
    total = total.valid() ? nc::add(total, acc) : acc;
  }
  return total;
}

Var loss_align(std::span<const Latent> latents, double temperature, Similarity similarity) {
  if (latents.size() < 2) throw ConfigError("alignment needs at least two latent sources");
  if (!(temperature > 0.0)) throw ConfigError("alignment temperature must be positive");
  const auto frames = latents.front().z.shape()[0];
  std::vector<Var> n;
  for (const auto& l : latents) {
    if (l.z.shape() != latents.front().z.shape()) throw ShapeError("latent " + l.name + " has a different shape");
    n.push_back(similarity == Similarity::Cosine ? nc::l2_normalize(l.z) : l.z);
  }
  // Each unordered pair serves both directions: rows of S for (i, j) and
  // rows of S^T for (j, i). Both share the positive diagonal.
  std::vector<double> eye(frames * frames, 0.0);
  for (std::size_t k = 0; k < frames; ++k) eye[k * frames + k] = 1.0;
  const Var diag = latents.front().z.graph->constant(nc::Tensor::matrix(frames, frames, std::move(eye)));
  Var total;
  for (std::size_t i = 0; i < n.size(); ++i)
    for (std::size_t j = i + 1; j < n.size(); ++j) {
      const Var s = nc::scale(nc::matmul(n[i], nc::transpose(n[j])), 1.0 / temperature);
      const Var lse = nc::add(nc::sum(nc::logsumexp(s)), nc::sum(nc::logsumexp(nc::transpose(s))));
      const Var pos = nc::scale(nc::sum(nc::mul(s, diag)), 2.0);
      const Var pair = nc::sub(lse, pos);
      total = total.valid() ? nc::add(total, pair) : pair;
    }
  const double pairs = static_cast<double>(n.size() * (n.size() - 1));
  return nc::scale(total, 1.0 / (pairs * static_cast<double>(frames)));
}

double total_loss(const HDySConfig& cfg, double recon, double align) {
  return cfg.alpha_recon * recon + (cfg.no_align ? 0.0 : cfg.alpha_align * align);
}

double cross_source_cosine(std::span<const Latent> latents) {
  if (latents.size() < 2) throw ConfigError("cosine agreement needs at least two latent sources");
  double total = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < latents.size(); ++i)
    for (std::size_t j = i + 1; j < latents.size(); ++j) {
      const auto& a = latents[i].z.value();
      const auto& b = latents[j].z.value();
      const std::size_t rows = a.rows(), cols = a.cols();
      double acc = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          ab += a.at(r, c) * b.at(r, c);
          aa += a.at(r, c) * a.at(r, c);
          bb += b.at(r, c) * b.at(r, c);
        }
        acc += ab / std::max(std::sqrt(aa * bb), 1e-300);
      }
      total += acc / static_cast<double>(rows);
      ++pairs;
    }
  return total / pairs;
}

}  // namespace hdys::model
