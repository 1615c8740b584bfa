#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hdys::kin {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Kinematics channels first, dynamics after. Angles belong to the
/// angle-tree family, pose to the pose-tree family.
enum class Channel : int { Markers, Keypoints, Angles, Pose, TorqueAngleTree, TorquePoseTree, Muscle, Emg };
inline constexpr int kChannelCount = 8;
inline constexpr std::array<Channel, 4> kKinematicsChannels = {Channel::Markers, Channel::Keypoints, Channel::Angles,
                                                                 Channel::Pose};
inline constexpr std::array<Channel, 4> kDynamicsChannels = {Channel::TorqueAngleTree, Channel::TorquePoseTree,
                                                               Channel::Muscle, Channel::Emg};

const char* channel_name(Channel c);
Channel parse_channel(const std::string& name);
inline int index(Channel c) { return static_cast<int>(c); }
bool is_kinematics(Channel c);
/// Width of one entity in a kinematics block: 9 for Cartesian sets (p, v, a),
/// 3 for coordinates (q, qd, qdd). Zero for dynamics.
int entity_width(Channel c);

using ChannelMask = std::bitset<kChannelCount>;
ChannelMask mask_of(std::initializer_list<Channel> channels);
std::string mask_string(const ChannelMask& m);

/// Oracle generalized trajectory, frames x dof.
struct Trajectory {
  MatX q, qd, qdd;
  int frames() const { return static_cast<int>(q.rows()); }
};

/// One sequence. Every present channel is a frames x width matrix; each row is
/// one frame, laid out entity by entity.
struct SequenceRecord {
  std::string id;
  std::string profile;
  std::string tree;
  double fps = 90.0;
  double mass = 0.0;  // subject mass, kg
  ChannelMask mask;
  std::array<MatX, kChannelCount> channels;
  std::vector<std::uint8_t> boundary;  // 1 where one-sided stencils were used
  std::vector<int> marker_subset;
  std::optional<Trajectory> trajectory;  // in-memory only

  int frames() const { return static_cast<int>(boundary.size()); }
  bool has(Channel c) const { return mask.test(index(c)); }
  const MatX& at(Channel c) const;
  /// Number of entities (rows of the per-frame block) for kinematics channels.
  int entities(Channel c) const;
};

struct FrameSample {
  int time = 0;
  double fps = 0.0;
  double mass = 0.0;
  ChannelMask mask;
  bool boundary = false;
  std::array<VecX, kChannelCount> values;
};

FrameSample frame_sample(const SequenceRecord& r, int t);

/// Kinematics block with the acceleration components removed, entity by
/// entity (the accel-free view).
MatX without_acceleration(const MatX& block, Channel c);
/// Acceleration components only.
MatX acceleration_part(const MatX& block, Channel c);

/// Checks layout and value invariants. Throws FormatError.
void validate(const SequenceRecord& r);

}  // namespace hdys::kin
