#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hdys/datahub/generate.hpp"
#include "hdys/model/hdys.hpp"
#include "hdys/numcore/adamw.hpp"

namespace hdys::engine {

struct EpochLoss {
  int epoch = 0;  // 1-based
  double recon = 0.0;
  double align = 0.0;
  double total = 0.0;
  int batches = 0;
};

/// A trained (or freshly initialized) model plus the record of how it got
/// there.
struct TrainedModel {
  model::HDySConfig config;
  model::ModelShape shape;
  nc::ParameterStore params;
  nc::AdamWState optimizer;
  std::vector<EpochLoss> curve;
  std::size_t seen_frames = 0;
  double seconds = 0.0;
};

/// The model used for a dataset: shape from every profile in the dataset's
/// manifest, so subsets train the same architecture.
model::HDySModel model_for(const model::HDySConfig& cfg, const data::DatasetManifest& full);

/// Training manifest after applying the config's `fractions`.
data::DatasetManifest training_manifest(const model::HDySConfig& cfg, const data::DatasetManifest& full);

/// Learning-rate multiplier at `step` of `steps` (warmup ramp, optional
/// cosine decay).
double lr_scale(const model::HDySConfig& cfg, long step, long steps);

/// Seeded initial parameters plus data statistics over the training split;
/// what train() starts from.
nc::ParameterStore initialize(const model::HDySConfig& cfg, const data::Dataset& data);

/// Balanced per-profile sampling, one random stride-aligned window per drawn
/// sequence, windows shuffled into batches and grouped per profile inside a
/// batch. Deterministic per config seed. Throws DeadConfigError when a batch
/// has no loss term and NonFiniteError (with epoch/batch) on a non-finite
/// loss.
TrainedModel train(const model::HDySConfig& cfg, const data::Dataset& data,
                   const std::function<void(const EpochLoss&)>& progress = {});

/// One batch worth of losses, used by train and by diagnostics.
struct BatchLoss {
  nc::Var total;
  double recon = 0.0;
  double align = 0.0;
  bool has_recon = false;
  bool has_align = false;
};
BatchLoss batch_loss(const model::HDySModel& m, nc::Binding& b, const std::vector<model::GroupInput>& groups);

/// Groups windows by profile (in profile order) and standardizes them.
std::vector<model::GroupInput> make_groups(const model::HDySConfig& cfg, const nc::ParameterStore& params,
                                           std::vector<model::WindowRef> windows);

std::string loss_curve_csv(const std::vector<EpochLoss>& curve);

/// Files of a run directory.
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kConfigFile = "config.txt";
inline constexpr const char* kLossFile = "loss.csv";

/// Writes checkpoint, frozen config and loss curve atomically.
void save_run(const std::filesystem::path& dir, const TrainedModel& run);
/// Loads a run directory; the shape comes from `full`.
TrainedModel load_run(const std::filesystem::path& dir, const data::DatasetManifest& full);

}  // namespace hdys::engine
