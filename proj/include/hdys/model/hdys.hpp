#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdys/model/batch.hpp"
#include "hdys/model/config.hpp"
#include "hdys/model/layers.hpp"

namespace hdys::model {

/// One entry of the latent set Z, [frames, d].
struct Latent {
  std::string name;  // "z_x_m" for IDAE paths, "z_x_m^tau_tr" for composer paths
  Var z;
};

/// One L1 reconstruction term: a prediction of `target` from `source`.
struct ReconTerm {
  std::string target;  // dynamics channel name, or "acc.<channel>"
  std::string source;  // kinematics channel the prediction came from
  Var pred;
  nc::Tensor truth;
  std::vector<double> weights;  // per row; empty means all ones
};

struct GroupForward {
  std::vector<Latent> kinematics;  // IDAE encoder outputs
  std::vector<Latent> composed;    // FDAE composer outputs
  std::vector<ReconTerm> inverse;  // dynamics predictions
  std::vector<ReconTerm> forward;  // acceleration predictions
};

class HDySModel {
 public:
  HDySModel(HDySConfig cfg, ModelShape shape);

  const HDySConfig& config() const { return cfg_; }
  const ModelShape& shape() const { return shape_; }

  /// Fresh trainable parameters (seeded). Data statistics are added
  /// separately with add_stats().
  nc::ParameterStore init(std::uint64_t seed) const;
  /// Throws ConfigError unless `store` has exactly this model's tensors.
  void check(const nc::ParameterStore& store) const;

  /// z = encoder(x) for one kinematics block, [frames, d]. Set channels take
  /// tokens plus per-frame token counts.
  Var encode_kinematics(nc::Binding& b, Channel c, Var x, const std::vector<std::int64_t>& segments,
                        bool accel_free = false) const;
  /// Temporal refinement over windows of `window` rows (identity when
  /// no_temporal_refinement is set).
  Var refine(nc::Binding& b, Var z, int window) const;
  /// Dynamics prediction for one head.
  Var id_head(nc::Binding& b, Channel target, Var refined) const;
  /// FDAE dynamics latent for one dynamics block.
  Var encode_dynamics(nc::Binding& b, Channel dynamics, Var tau) const;
  /// Composer output from an accel-free kinematics latent and a dynamics
  /// latent.
  Var compose(nc::Binding& b, Var z_tilde, Var z_dynamics) const;
  /// Acceleration head. Markers have none (ConfigError).
  Var fd_head(nc::Binding& b, Channel target, Var composed, int keypoints = 0) const;

  GroupForward forward(nc::Binding& b, const GroupInput& in) const;

 private:
  std::string head_name(Channel target, int keypoints) const;

  HDySConfig cfg_;
  ModelShape shape_;
};

/// Acceleration targets present for a channel mask, in channel order.
std::vector<Channel> accel_targets(const kin::ChannelMask& mask);

/// Sum over targets of the mean-over-sources weighted MAE. DeadConfigError
/// when no term carries a positive weight.
Var loss_recon(std::span<const ReconTerm> terms);

/// InfoNCE over ordered pairs of distinct sources, averaged over pairs and
/// frames. ConfigError with fewer than two sources.
Var loss_align(std::span<const Latent> latents, double temperature, Similarity similarity);

/// alpha_recon * recon + alpha_align * align; the align term is dropped with
/// no_align.
double total_loss(const HDySConfig& cfg, double recon, double align);

/// Mean cosine similarity between same-frame latents of distinct sources.
double cross_source_cosine(std::span<const Latent> latents);

}  // namespace hdys::model
