#pragma once

#include <string>
#include <vector>

#include "hdys/rbd/muscle.hpp"
#include "hdys/rbd/tree.hpp"

namespace hdys::data {

/// T1: 9-link fixed-base lower body plus torso and head, 23 DoF, 40 marker
/// sites. The angle-tree family.
rbd::KinematicTree tree_t1();
/// T2: 12-link fixed-base body with spine, arms and a different DoF split,
/// 18 DoF, 48 marker sites. The pose-tree family.
rbd::KinematicTree tree_t2();

/// Resolves "T1" or "T2". Throws ConfigError otherwise.
rbd::KinematicTree standard_tree(const std::string& name);

/// Agonist/antagonist pair per actuated DoF plus four biarticular muscles.
/// Forces are sized from the static load each DoF carries.
rbd::MuscleSet standard_muscles(const rbd::KinematicTree& tree);

/// Indices of the muscles observed by the 8 sEMG electrodes on T1.
std::vector<int> emg_electrodes();

}  // namespace hdys::data
