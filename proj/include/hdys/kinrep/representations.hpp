#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hdys/kinrep/record.hpp"
#include "hdys/rbd/muscle.hpp"
#include "hdys/rbd/tree.hpp"

namespace hdys::kin {

/// Central differences inside, one-sided at both ends. Rows are frames.
std::pair<MatX, MatX> finite_difference(const MatX& x, double fps);

struct BuildOptions {
  double jitter_sigma = 0.0;  // m, Gaussian noise on Cartesian positions
  std::uint64_t seed = 0;
};

/// Kinematics channels in `mask` from an oracle trajectory. Angles and pose
/// both come from the generalized coordinates (actuated and root alike).
SequenceRecord build_representations(const rbd::KinematicTree& tree, const Trajectory& traj,
                                     const std::vector<int>& marker_subset, const ChannelMask& mask, double fps,
                                     const BuildOptions& opt = {});

struct DynamicsRequest {
  ChannelMask kinds;
  const rbd::MuscleSet* muscles = nullptr;
  std::vector<int> emg_muscles;  // muscle indices observed by sEMG electrodes
  std::uint64_t seed = 0;
};

/// Fills the requested dynamics channels from the record's oracle
/// trajectory. Torques cover the actuated DoF. Throws InfeasibleError with
/// the failing frame index.
void attach_dynamics(SequenceRecord& record, const rbd::KinematicTree& tree, const DynamicsRequest& req);

}  // namespace hdys::kin
