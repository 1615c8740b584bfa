#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hdys/datahub/profile.hpp"
#include "hdys/kinrep/record.hpp"
#include "hdys/model/config.hpp"
#include "hdys/numcore/params.hpp"

namespace hdys::model {

using kin::Channel;

/// Widths the model is built for, fixed by the dataset's profiles.
/// Cartesian channels are per token (9); coordinate and dynamics channels
/// are per frame.
struct ModelShape {
  std::array<int, kin::kChannelCount> width{};
  std::vector<int> keypoint_counts;  // one keypoint-accel head per size

  bool operator==(const ModelShape&) const = default;
};

/// Throws ConfigError when two profiles disagree on a channel width.
ModelShape shape_from_profiles(const std::vector<data::DomainProfile>& profiles);

/// Torque channels are normalized by subject mass before standardizing.
bool mass_normalized(Channel c);

/// Mean and standard deviation per feature column, stored in the parameter
/// store as non-trainable "stat.<channel>.mean/.std" rows. Cartesian stats are
/// per component (p, v, a).
void add_stats(nc::ParameterStore& store, const ModelShape& shape, const std::vector<const kin::SequenceRecord*>& train);

struct WindowRef {
  const kin::SequenceRecord* record = nullptr;
  int start = 0;
};

/// Model-ready, standardized tensors for windows that share one profile.
struct GroupInput {
  std::string profile;
  kin::ChannelMask mask;  // record channels intersected with config channels
  int windows = 0;
  int window = 0;
  int keypoints = 0;
  std::array<nc::Tensor, kin::kChannelCount> full;  // kinematics with accel; dynamics targets
  std::array<nc::Tensor, 4> tilde;                  // accel-free kinematics
  std::array<nc::Tensor, 4> accel;                  // accel targets (keypoints, angles, pose)
  std::array<std::vector<std::int64_t>, 2> segments;  // tokens per frame, markers and keypoints
  std::vector<double> weights;                      // per frame; 0 drops it from L_recon
  std::vector<double> mass;                         // per frame

  int frames() const { return windows * window; }
  bool has(Channel c) const { return mask.test(kin::index(c)); }
};

GroupInput make_group(const HDySConfig& cfg, const nc::ParameterStore& store, const std::vector<WindowRef>& windows);

/// Inverse of the standardization applied to a dynamics channel; returns the
/// per-frame values in physical units (torques per kg).
Eigen::MatrixXd destandardize(const nc::ParameterStore& store, Channel c, const nc::Tensor& values);

}  // namespace hdys::model
