#include "hdys/rbd/dynamics.hpp"

#include "hdys/common/error.hpp"

namespace hdys::rbd {
namespace {

// Plucker motion transform into a frame rotated by E (child-from-parent)
// whose origin sits at r in parent coordinates.
Mat6 plucker(const Mat3& E, const Vec3& r) {
  Mat6 X = Mat6::Zero();
  X.topLeftCorner<3, 3>() = E;
  X.bottomRightCorner<3, 3>() = E;
  X.bottomLeftCorner<3, 3>() = -E * skew(r);
  return X;
}

Mat6 motion_cross(const Vec6& v) {
  Mat6 m = Mat6::Zero();
  const Mat3 w = skew(v.head<3>());
  m.topLeftCorner<3, 3>() = w;
  m.bottomRightCorner<3, 3>() = w;
  m.bottomLeftCorner<3, 3>() = skew(v.tail<3>());
  return m;
}

Vec6 motion_subspace(const KinematicTree::Body& b) {
  Vec6 s = Vec6::Zero();
  if (b.prismatic)
    s.tail<3>() = b.axis;
  else
    s.head<3>() = b.axis;
  return s;
}

Mat3 joint_rotation(const KinematicTree::Body& b, double q) {
  if (b.prismatic) return Mat3::Identity();
  return Eigen::AngleAxisd(q, b.axis).toRotationMatrix();
}

// Parent-to-body motion transforms at configuration q.
std::vector<Mat6> parent_transforms(const KinematicTree& tree, const VecX& q) {
  const auto& bodies = tree.bodies();
  std::vector<Mat6> xup(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto& b = bodies[i];
    const Mat6 tree_x = plucker(b.fixed_rotation.transpose(), b.fixed_origin);
    const Mat6 joint_x = b.prismatic ? plucker(Mat3::Identity(), b.axis * q[i])
                                     : plucker(joint_rotation(b, q[i]).transpose(), Vec3::Zero());
    xup[i] = joint_x * tree_x;
  }
  return xup;
}

std::vector<Pose> body_poses(const KinematicTree& tree, const VecX& q) {
  const auto& bodies = tree.bodies();
  std::vector<Pose> poses(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto& b = bodies[i];
    const Pose parent = b.parent < 0 ? Pose{} : poses[b.parent];
    const Vec3 local = b.fixed_origin + (b.prismatic ? Vec3(b.fixed_rotation * b.axis * q[i]) : Vec3::Zero());
    poses[i].rotation = parent.rotation * b.fixed_rotation * joint_rotation(b, q[i]);
    poses[i].position = parent.position + parent.rotation * local;
  }
  return poses;
}

void check_length(const KinematicTree& tree, const VecX& v, const char* what) {
  if (v.size() != tree.dof())
    throw ShapeError(std::string(what) + " has length " + std::to_string(v.size()) + ", tree '" + tree.name() +
                     "' has " + std::to_string(tree.dof()) + " DoF");
}

void check_finite(const VecX& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteError(std::string(what) + " contains non-finite entries");
}

}  // namespace

KinematicsResult forward_kinematics(const KinematicTree& tree, const VecX& q) {
  check_length(tree, q, "q");
  check_finite(q, "q");
  const auto poses = body_poses(tree, q);
  KinematicsResult out;
  const auto n_links = tree.links().size();
  out.links.resize(n_links);
  out.joints.resize(n_links);
  for (std::size_t l = 0; l < n_links; ++l) {
    out.links[l] = poses[tree.link_body(static_cast<int>(l))];
    out.joints[l] = out.links[l].position;
  }
  for (const auto& m : tree.markers()) {
    const Pose& p = out.links[m.link];
    out.markers.push_back(p.position + p.rotation * m.offset);
  }
  return out;
}

VecX rnea(const KinematicTree& tree, const GeneralizedState& state, std::span<const ExternalForce> ext) {
  check_length(tree, state.q, "q");
  check_length(tree, state.qd, "qd");
  check_length(tree, state.qdd, "qdd");
  check_finite(state.q, "q");
  check_finite(state.qd, "qd");
  check_finite(state.qdd, "qdd");

  const auto& bodies = tree.bodies();
  const std::size_t n = bodies.size();
  const auto xup = parent_transforms(tree, state.q);
  Vec6 base_acc = Vec6::Zero();
  base_acc.tail<3>() = -tree.gravity();

  std::vector<Vec6> v(n), a(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = bodies[i];
    const Vec6 s = motion_subspace(b);
    const Vec6 vj = s * state.qd[i];
    const Vec6 vp = b.parent < 0 ? Vec6::Zero() : v[b.parent];
    const Vec6 ap = b.parent < 0 ? base_acc : a[b.parent];
    v[i] = xup[i] * vp + vj;
    a[i] = xup[i] * ap + s * state.qdd[i] + motion_cross(v[i]) * vj;
    f[i] = b.inertia * a[i] - motion_cross(v[i]).transpose() * (b.inertia * v[i]);
  }

  if (!ext.empty()) {
    const auto poses = body_poses(tree, state.q);
    for (const auto& e : ext) {
      if (e.link < 0 || e.link >= static_cast<int>(tree.links().size()))
        throw ShapeError("external force references link " + std::to_string(e.link));
      if (!e.point.allFinite() || !e.force.allFinite() || !e.torque.allFinite())
        throw NonFiniteError("external force has non-finite components");
      const int body = tree.link_body(e.link);
      const Mat3 rt = poses[body].rotation.transpose();
      const Vec3 force = rt * e.force;
      Vec6 wrench;
      wrench.head<3>() = rt * e.torque + e.point.cross(force);
      wrench.tail<3>() = force;
      f[body] -= wrench;
    }
  }

  VecX tau(n);
  for (std::size_t k = n; k-- > 0;) {
    tau[k] = motion_subspace(bodies[k]).dot(f[k]);
    if (bodies[k].parent >= 0) f[bodies[k].parent] += xup[k].transpose() * f[k];
  }
  return tau;
}

MatX mass_matrix(const KinematicTree& tree, const VecX& q) {
  check_length(tree, q, "q");
  check_finite(q, "q");
  const auto& bodies = tree.bodies();
  const std::size_t n = bodies.size();
  const auto xup = parent_transforms(tree, q);
  std::vector<Mat6> composite(n);
  for (std::size_t i = 0; i < n; ++i) composite[i] = bodies[i].inertia;
  for (std::size_t i = n; i-- > 0;)
    if (bodies[i].parent >= 0) composite[bodies[i].parent] += xup[i].transpose() * composite[i] * xup[i];

  MatX h = MatX::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec6 force = composite[i] * motion_subspace(bodies[i]);
    h(i, i) = motion_subspace(bodies[i]).dot(force);
    int j = static_cast<int>(i);
    while (bodies[j].parent >= 0) {
      force = xup[j].transpose() * force;
      j = bodies[j].parent;
      h(i, j) = h(j, i) = motion_subspace(bodies[j]).dot(force);
    }
  }
  return h;
}

VecX forward_dynamics(const KinematicTree& tree, const VecX& q, const VecX& qd, const VecX& tau,
                      std::span<const ExternalForce> ext) {
  check_length(tree, tau, "tau");
  check_finite(tau, "tau");
  GeneralizedState s{q, qd, VecX::Zero(tree.dof())};
  const VecX bias = rnea(tree, s, ext);
  Eigen::LLT<MatX> llt(mass_matrix(tree, q));
  if (llt.info() != Eigen::Success)
    throw Error("internal error: mass matrix of tree '" + tree.name() + "' is not positive definite");
  return llt.solve(tau - bias);
}

std::pair<VecX, VecX> step(const KinematicTree& tree, const VecX& q, const VecX& qd, const VecX& tau,
                           std::span<const ExternalForce> ext, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  VecX qd_next;
  try {
    qd_next = qd + dt * forward_dynamics(tree, q, qd, tau, ext);
  } catch (const NonFiniteError& e) {
    throw DivergedRolloutError(std::string("rollout diverged: ") + e.what());
  }
  VecX q_next = q + dt * qd_next;
  if (!q_next.allFinite() || !qd_next.allFinite()) throw DivergedRolloutError("rollout diverged: non-finite state");
  return {std::move(q_next), std::move(qd_next)};
}

double kinetic_energy(const KinematicTree& tree, const VecX& q, const VecX& qd) {
  check_length(tree, qd, "qd");
  return 0.5 * qd.dot(mass_matrix(tree, q) * qd);
}

double potential_energy(const KinematicTree& tree, const VecX& q) {
  const auto fk = forward_kinematics(tree, q);
  double u = 0.0;
  for (std::size_t l = 0; l < tree.links().size(); ++l) {
    const auto& link = tree.links()[l];
    const Vec3 com = fk.links[l].position + fk.links[l].rotation * link.com;
    u -= link.mass * tree.gravity().dot(com);
  }
  return u;
}

}  // namespace hdys::rbd
