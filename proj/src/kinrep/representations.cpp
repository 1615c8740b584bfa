#include "hdys/kinrep/representations.hpp"

#include <random>

#include "hdys/common/error.hpp"
#include "hdys/rbd/dynamics.hpp"
#include "hdys/rbd/emg.hpp"

namespace hdys::kin {
namespace {

// frames x (3 * n) positions -> frames x (9 * n) with (p, v, a) per entity.
MatX cartesian_block(const MatX& pos, double fps) {
  const auto [vel, acc] = finite_difference(pos, fps);
  const auto n = pos.cols() / 3;
  MatX out(pos.rows(), 9 * n);
  for (Eigen::Index e = 0; e < n; ++e) {
    out.middleCols(9 * e, 3) = pos.middleCols(3 * e, 3);
    out.middleCols(9 * e + 3, 3) = vel.middleCols(3 * e, 3);
    out.middleCols(9 * e + 6, 3) = acc.middleCols(3 * e, 3);
  }
  return out;
}

MatX coordinate_block(const MatX& q, double fps) {
  const auto [vel, acc] = finite_difference(q, fps);
  MatX out(q.rows(), 3 * q.cols());
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    out.col(3 * j) = q.col(j);
    out.col(3 * j + 1) = vel.col(j);
    out.col(3 * j + 2) = acc.col(j);
  }
  return out;
}

}  // namespace

std::pair<MatX, MatX> finite_difference(const MatX& x, double fps) {
  const auto n = x.rows();
  if (n < 3) throw ShapeError("finite_difference needs at least 3 frames, got " + std::to_string(n));
  if (!(fps > 0.0)) throw ConfigError("finite_difference: fps must be positive");
  MatX v(n, x.cols()), a(n, x.cols());
  const double f2 = fps * fps;
  for (Eigen::Index t = 1; t + 1 < n; ++t) {
    v.row(t) = (x.row(t + 1) - x.row(t - 1)) * (fps / 2.0);
    a.row(t) = (x.row(t + 1) - 2.0 * x.row(t) + x.row(t - 1)) * f2;
  }
  v.row(0) = (x.row(1) - x.row(0)) * fps;
  v.row(n - 1) = (x.row(n - 1) - x.row(n - 2)) * fps;
  a.row(0) = (x.row(2) - 2.0 * x.row(1) + x.row(0)) * f2;
  a.row(n - 1) = (x.row(n - 1) - 2.0 * x.row(n - 2) + x.row(n - 3)) * f2;
  return {v, a};
}

SequenceRecord build_representations(const rbd::KinematicTree& tree, const Trajectory& traj,
                                     const std::vector<int>& marker_subset, const ChannelMask& mask, double fps,
                                     const BuildOptions& opt) {
  const int frames = traj.frames();
  if (frames < 3) throw ShapeError("trajectory needs at least 3 frames");
  if (traj.q.cols() != tree.dof() || traj.qd.rows() != frames || traj.qd.cols() != tree.dof() ||
      traj.qdd.rows() != frames || traj.qdd.cols() != tree.dof())
    throw ShapeError("trajectory shape does not match tree '" + tree.name() + "'");
  for (int c = 4; c < kChannelCount; ++c)
    if (mask.test(c)) throw ConfigError("build_representations only builds kinematics channels");
  const bool want_markers = mask.test(index(Channel::Markers));
  if (want_markers && marker_subset.empty()) throw ConfigError("marker subset is empty");
  for (int m : marker_subset)
    if (m < 0 || m >= static_cast<int>(tree.markers().size()))
      throw ShapeError("marker index " + std::to_string(m) + " out of range for tree '" + tree.name() + "'");

  SequenceRecord r;
  r.tree = tree.name();
  r.fps = fps;
  r.mass = tree.total_mass();
  r.mask = mask;
  r.boundary.assign(frames, 0);
  r.boundary.front() = r.boundary.back() = 1;
  r.marker_subset = want_markers ? marker_subset : std::vector<int>{};
  r.trajectory = traj;

  const auto n_links = static_cast<Eigen::Index>(tree.links().size());
  MatX markers(frames, 3 * static_cast<Eigen::Index>(marker_subset.size()));
  MatX joints(frames, 3 * n_links);
  for (int t = 0; t < frames; ++t) {
    const auto fk = rbd::forward_kinematics(tree, traj.q.row(t).transpose());
    for (std::size_t i = 0; i < marker_subset.size(); ++i)
      markers.row(t).segment(3 * i, 3) = fk.markers[marker_subset[i]].transpose();
    for (Eigen::Index l = 0; l < n_links; ++l) joints.row(t).segment(3 * l, 3) = fk.joints[l].transpose();
  }
  if (opt.jitter_sigma > 0.0) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> noise(0.0, opt.jitter_sigma);
    for (Eigen::Index i = 0; i < markers.size(); ++i) markers.data()[i] += noise(rng);
    for (Eigen::Index i = 0; i < joints.size(); ++i) joints.data()[i] += noise(rng);
  }
  if (want_markers) r.channels[index(Channel::Markers)] = cartesian_block(markers, fps);
  if (mask.test(index(Channel::Keypoints))) r.channels[index(Channel::Keypoints)] = cartesian_block(joints, fps);
  if (mask.test(index(Channel::Angles))) r.channels[index(Channel::Angles)] = coordinate_block(traj.q, fps);
  if (mask.test(index(Channel::Pose))) r.channels[index(Channel::Pose)] = coordinate_block(traj.q, fps);
  return r;
}

void attach_dynamics(SequenceRecord& record, const rbd::KinematicTree& tree, const DynamicsRequest& req) {
  if (!record.trajectory) throw ConfigError("sequence '" + record.id + "' has no oracle trajectory");
  for (int c = 0; c < 4; ++c)
    if (req.kinds.test(c)) throw ConfigError("attach_dynamics only attaches dynamics channels");
  const Trajectory& traj = *record.trajectory;
  const int frames = traj.frames();
  const bool need_muscle = req.kinds.test(index(Channel::Muscle)) || req.kinds.test(index(Channel::Emg));
  if (need_muscle && !req.muscles) throw ConfigError("muscle or sEMG labels requested without a muscle set");
  if (need_muscle && req.muscles->actuated_dof() != tree.actuated_dof())
    throw ConfigError("muscle set does not match tree '" + tree.name() + "'");

  MatX tau(frames, tree.actuated_dof());
  for (int t = 0; t < frames; ++t) {
    const rbd::GeneralizedState s{traj.q.row(t).transpose(), traj.qd.row(t).transpose(), traj.qdd.row(t).transpose()};
    tau.row(t) = rbd::rnea(tree, s).tail(tree.actuated_dof()).transpose();
  }
  auto put = [&](Channel c, MatX m) {
    record.channels[index(c)] = std::move(m);
    record.mask.set(index(c));
  };
  if (req.kinds.test(index(Channel::TorqueAngleTree))) put(Channel::TorqueAngleTree, tau);
  if (req.kinds.test(index(Channel::TorquePoseTree))) put(Channel::TorquePoseTree, tau);
  if (!need_muscle) return;

  MatX act(frames, req.muscles->count());
  for (int t = 0; t < frames; ++t) {
    try {
      act.row(t) = rbd::solve_activations(*req.muscles, tau.row(t).transpose()).transpose();
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("sequence '" + record.id + "' frame " + std::to_string(t) + ": " + e.what(), t);
    }
  }
  if (req.kinds.test(index(Channel::Muscle))) put(Channel::Muscle, act);
  if (req.kinds.test(index(Channel::Emg))) {
    if (req.emg_muscles.empty()) throw ConfigError("sEMG requested without electrode muscles");
    MatX observed(frames, static_cast<Eigen::Index>(req.emg_muscles.size()));
    for (std::size_t i = 0; i < req.emg_muscles.size(); ++i) {
      const int m = req.emg_muscles[i];
      if (m < 0 || m >= req.muscles->count()) throw ConfigError("sEMG electrode references muscle " + std::to_string(m));
      observed.col(static_cast<Eigen::Index>(i)) = act.col(m);
    }
    put(Channel::Emg, rbd::synth_emg(observed, record.fps, req.seed));
  }
}

}  // namespace hdys::kin
