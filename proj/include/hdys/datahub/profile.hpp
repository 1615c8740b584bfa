#pragma once

#include <string>
#include <vector>

#include "hdys/datahub/motion.hpp"
#include "hdys/kinrep/record.hpp"

namespace hdys::data {

struct DomainProfile {
  std::string id;    // "A".."E"
  std::string name;  // e.g. "torque-lab"
  std::string tree;  // "T1" or "T2"
  kin::ChannelMask kinematics;
  kin::ChannelMask dynamics;
  MotionFamily family = MotionFamily::RandomSpline;
  MotionRanges ranges;
  double jitter_sigma = 0.0;  // m, Cartesian channels only
  int train_count = 48;
  int test_count = 12;
  double fps = 90.0;
  double duration_min = 3.0;  // s
  double duration_max = 3.0;
  int markers_min = 20;
  int markers_max = 40;
  double mass_scale_min = 0.8;
  double mass_scale_max = 1.25;
  bool train_enabled = true;  // false: test split only

  bool has_dynamics() const { return dynamics.any(); }
  /// Throws ConfigError on a violated invariant.
  void validate() const;
};

/// The five desk profiles A..E with the given per-profile split sizes.
std::vector<DomainProfile> default_profiles(int train_count = 48, int test_count = 12);

}  // namespace hdys::data
