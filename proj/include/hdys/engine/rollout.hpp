#pragma once

#include <string>
#include <vector>

#include "hdys/engine/train.hpp"

namespace hdys::engine {

struct RolloutRow {
  std::string source;  // "predicted" or "oracle"
  double fps = 0.0;
  int k = 0;
  double mse = 0.0;  // mean per-frame joint-coordinate MSE after k steps
  int starts = 0;    // start frames kept
  int diverged = 0;  // start frames dropped for divergence
};

struct RolloutReport {
  std::vector<std::string> profiles;
  std::vector<RolloutRow> rows;

  /// Throws ConfigError when absent.
  const RolloutRow& row(const std::string& source, double fps, int k) const;
};

/// Reference trajectory as the integrator sees it: backward-difference
/// velocities and second-difference accelerations of q at rate `fps`.
/// Rows 0 and frames-1 have no acceleration (left at zero).
struct DiscreteReference {
  Eigen::MatrixXd q, qd, qdd;
};
DiscreteReference discrete_reference(const Eigen::MatrixXd& q, double fps);

/// Oracle torques rnea(q_t, qd_t, qdd_t) along a discrete reference.
Eigen::MatrixXd oracle_torques(const rbd::KinematicTree& tree, const DiscreteReference& ref);

/// Per-horizon MSEs of k-step rollouts from start frame `s` (k = 1..kmax).
/// Throws DivergedRolloutError on a non-finite state.
std::vector<double> rollout_from(const rbd::KinematicTree& tree, const DiscreteReference& ref,
                                 const Eigen::MatrixXd& tau, int s, int kmax, double fps);

/// For every profile with a fixed-base tree and angle-tree torques: test
/// sequences regenerated at each fps, predicted (averaged over
/// representations) and oracle torques rolled out from strided start frames.
RolloutReport rollout_eval(const TrainedModel& run, const data::Dataset& data);

/// source,fps,k,mse,starts,diverged
std::string rollout_csv(const RolloutReport& report);

}  // namespace hdys::engine
