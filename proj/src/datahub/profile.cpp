#include "hdys/datahub/profile.hpp"

#include "hdys/common/error.hpp"

namespace hdys::data {

using kin::Channel;
using kin::mask_of;

void DomainProfile::validate() const {
  const std::string where = "profile '" + id + "'";
  if (id.empty()) throw ConfigError("profile without id");
  if (tree != "T1" && tree != "T2") throw ConfigError(where + ": unknown tree '" + tree + "'");
  if (kinematics.none()) throw ConfigError(where + ": no kinematics channel enabled");
  for (int c = 0; c < kin::kChannelCount; ++c) {
    if (kinematics.test(c) && !kin::is_kinematics(static_cast<Channel>(c)))
      throw ConfigError(where + ": dynamics channel in kinematics mask");
    if (dynamics.test(c) && kin::is_kinematics(static_cast<Channel>(c)))
      throw ConfigError(where + ": kinematics channel in dynamics mask");
  }
  if (!(jitter_sigma >= 0.0)) throw ConfigError(where + ": jitter must be non-negative");
  if (train_count < 0 || test_count < 0) throw ConfigError(where + ": negative sequence count");
  if (!(fps > 0.0) || !(duration_min > 0.0) || duration_max < duration_min)
    throw ConfigError(where + ": invalid rate or duration");
  if (markers_min < 1 || markers_max < markers_min) throw ConfigError(where + ": invalid marker subset range");
  if (!(mass_scale_min > 0.0) || mass_scale_max < mass_scale_min) throw ConfigError(where + ": invalid mass scale");
}

std::vector<DomainProfile> default_profiles(int train_count, int test_count) {
  std::vector<DomainProfile> out(5);
  DomainProfile& a = out[0];
  a.id = "A";
  a.name = "torque-lab";
  a.tree = "T1";
  a.kinematics = mask_of({Channel::Markers, Channel::Keypoints, Channel::Angles});
  a.dynamics = mask_of({Channel::TorqueAngleTree});
  a.family = MotionFamily::PeriodicGait;
  a.ranges = {0.1, 0.4, 0.7, 1.3};

  DomainProfile& b = out[1];
  b.id = "B";
  b.name = "torque-sim";
  b.tree = "T2";
  b.kinematics = mask_of({Channel::Markers, Channel::Keypoints, Channel::Pose});
  b.dynamics = mask_of({Channel::TorquePoseTree});
  b.family = MotionFamily::RandomSpline;
  b.ranges = {0.1, 0.6, 0.2, 1.5};
  b.jitter_sigma = 0.003;

  DomainProfile& c = out[2];
  c.id = "C";
  c.name = "muscle-sim";
  c.tree = "T2";
  c.kinematics = mask_of({Channel::Markers, Channel::Keypoints, Channel::Pose});
  c.dynamics = mask_of({Channel::Muscle});
  c.family = MotionFamily::Reach;
  c.ranges = {0.1, 0.5, 0.6, 1.2};

  DomainProfile& d = out[3];
  d.id = "D";
  d.name = "emg";
  d.tree = "T1";
  d.kinematics = mask_of({Channel::Markers, Channel::Keypoints});
  d.dynamics = mask_of({Channel::Emg});
  d.family = MotionFamily::Reach;
  d.ranges = {0.1, 0.5, 0.6, 1.2};

  DomainProfile& e = out[4];
  e.id = "E";
  e.name = "kin-only";
  e.tree = "T2";
  e.kinematics = mask_of({Channel::Markers, Channel::Keypoints, Channel::Pose});
  e.family = MotionFamily::RandomSpline;
  e.ranges = {0.1, 0.7, 0.2, 1.8};

  for (auto& p : out) {
    p.train_count = train_count;
    p.test_count = test_count;
  }
  return out;
}

}  // namespace hdys::data
