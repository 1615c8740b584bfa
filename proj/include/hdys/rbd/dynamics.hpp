#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hdys/rbd/tree.hpp"

namespace hdys::rbd {

struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();
};

struct KinematicsResult {
  std::vector<Pose> links;     // world pose of each link frame
  std::vector<Vec3> markers;   // world position of each marker site
  std::vector<Vec3> joints;    // world position of each link's joint center
};

KinematicsResult forward_kinematics(const KinematicTree& tree, const VecX& q);

/// Recursive Newton-Euler inverse dynamics:
/// tau = M(q) qdd + C(q, qd) + G(q) - J^T lambda.
/// For a free root the first six entries are the residual root wrench.
VecX rnea(const KinematicTree& tree, const GeneralizedState& state, std::span<const ExternalForce> ext = {});

/// Composite-rigid-body joint-space inertia.
MatX mass_matrix(const KinematicTree& tree, const VecX& q);

/// Solves M(q) qdd = tau + J^T lambda - C - G.
VecX forward_dynamics(const KinematicTree& tree, const VecX& q, const VecX& qd, const VecX& tau,
                      std::span<const ExternalForce> ext = {});

/// Semi-implicit Euler: qd' = qd + dt * fd(q, qd, tau); q' = q + dt * qd'.
std::pair<VecX, VecX> step(const KinematicTree& tree, const VecX& q, const VecX& qd, const VecX& tau,
                           std::span<const ExternalForce> ext, double dt);

double kinetic_energy(const KinematicTree& tree, const VecX& q, const VecX& qd);
/// Gravitational potential relative to the world origin.
double potential_energy(const KinematicTree& tree, const VecX& q);

}  // namespace hdys::rbd
