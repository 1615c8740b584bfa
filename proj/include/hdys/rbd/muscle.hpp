#pragma once

#include <string>
#include <vector>

#include "hdys/rbd/tree.hpp"

namespace hdys::rbd {

struct Muscle {
  std::string name;
  VecX moment_arm;  // over actuated DoFs, m
  double max_force = 1000.0;  // N
};

/// Linear force law F(a) = F_max * a with configuration-independent arms.
class MuscleSet {
 public:
  MuscleSet() = default;
  /// Throws ConfigError on ragged arms or non-positive forces.
  MuscleSet(std::vector<Muscle> muscles, int actuated_dof);

  const std::vector<Muscle>& muscles() const { return muscles_; }
  int count() const { return static_cast<int>(muscles_.size()); }
  int actuated_dof() const { return actuated_dof_; }
  /// W = A^T diag(F_max), actuated_dof x count.
  const MatX& torque_map() const { return w_; }

 private:
  std::vector<Muscle> muscles_;
  int actuated_dof_ = 0;
  MatX w_;
};

VecX muscle_to_torque(const MuscleSet& ms, const VecX& a);

struct ActivationSolveOptions {
  double tolerance = 1e-13;  // on the torque residual, scaled by 1 + |tau|
  int max_iterations = 100;
};

/// Minimum-norm activations in [0,1] with muscle_to_torque(a) = tau.
/// Throws InfeasibleError when tau lies outside the reachable polytope.
VecX solve_activations(const MuscleSet& ms, const VecX& tau, const ActivationSolveOptions& opt = {});

}  // namespace hdys::rbd
