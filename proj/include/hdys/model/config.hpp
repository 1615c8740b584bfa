#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hdys/kinrep/record.hpp"

namespace hdys::model {

inline constexpr const char* kConfigSchema = "hdys-config/1";

enum class Similarity { Cosine, Raw };

/// Every architecture, loss, training and ablation knob. Text form is one
/// `dotted.key = value` per line; see config_keys() for the schema.
struct HDySConfig {
  std::string preset = "desk";

  // model
  int latent_dim = 64;
  int set_width = 16;  // token width inside marker/keypoint encoders
  int set_layers = 3;
  int set_heads = 2;
  int set_ff = 32;
  int mlp_hidden1 = 256;
  int mlp_hidden2 = 128;
  int temporal_layers = 4;
  int temporal_heads = 4;
  int temporal_ff = 128;
  int head_hidden_small = 32;  // angle-tree torque, sEMG, angle and keypoint accel
  int head_hidden_large = 64;  // pose-tree torque, pose accel, muscle
  int dyn_hidden = 64;         // FDAE dynamics encoders
  int composer_hidden = 128;
  bool tie_fdae_encoders = false;

  // loss
  double alpha_recon = 0.01;
  double alpha_align = 0.05;
  double temperature = 0.1;
  Similarity similarity = Similarity::Cosine;
  bool exclude_boundary = true;

  // ablation
  bool no_fdae = false;
  bool no_align = false;
  bool no_temporal_refinement = false;

  // data
  kin::ChannelMask channels = kin::ChannelMask().set();
  int window = 16;
  int stride = 8;

  // train
  int epochs = 200;
  int frames_per_batch = 240;
  int quota = 15;  // sequences per profile per epoch
  double lr = 1e-3;
  double weight_decay = 0.01;
  double warmup = 0.0;        // fraction of steps with a linear lr ramp
  bool cosine_decay = false;  // cosine lr decay to zero over the run
  std::uint64_t seed = 0;
  std::string fractions;  // "A=0.5,B=0"; empty keeps every training id

  // rollout
  std::vector<int> rollout_k = {1, 2, 3, 4, 5};
  std::vector<double> rollout_fps = {90.0, 120.0, 150.0};
  int rollout_start_stride = 9;

  bool channel(kin::Channel c) const { return channels.test(kin::index(c)); }
  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

HDySConfig desk_config();
HDySConfig paper_config();
HDySConfig preset_config(const std::string& name);

struct ConfigKey {
  std::string key;
  std::string doc;
};
const std::vector<ConfigKey>& config_keys();

std::string config_to_text(const HDySConfig& cfg);
/// Parses the text form. A leading `preset` line selects the base values;
/// unknown keys and a missing or wrong schema line are ConfigErrors.
HDySConfig config_from_text(const std::string& text);
HDySConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const HDySConfig& cfg);

/// Applies one `key=value` override.
void apply_override(HDySConfig& cfg, const std::string& assignment);
std::string get_value(const HDySConfig& cfg, const std::string& key);

/// Fingerprint of the canonical text form.
std::string config_hash(const HDySConfig& cfg);

/// Parses the `fractions` field into per-profile fractions.
std::vector<std::pair<std::string, double>> parse_fractions(const std::string& spec);

}  // namespace hdys::model
