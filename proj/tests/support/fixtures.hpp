#pragma once

#include <random>

#include "hdys/rbd/tree.hpp"

namespace hdys::testing {

inline rbd::Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond qt(n(rng), n(rng), n(rng), n(rng));
  return qt.normalized().toRotationMatrix();
}

inline rbd::Vec3 random_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

/// Random branched tree (or a serial chain) with mixed revolute and
/// spherical joints.
inline rbd::KinematicTree random_tree(std::mt19937_64& rng, int n_links, bool free_root = false, bool chain = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<rbd::Link> links;
  for (int i = 0; i < n_links; ++i) {
    rbd::Link l;
    l.name = "l" + std::to_string(i);
    l.parent = i == 0 ? -1 : chain ? i - 1 : static_cast<int>(u(rng) * i);
    if (i == 0 && free_root)
      l.joint = rbd::JointType::Free;
    else
      l.joint = u(rng) < 0.6 ? rbd::JointType::Revolute : rbd::JointType::Spherical;
    l.axis = random_vec(rng, -1, 1).normalized();
    l.origin = i == 0 ? rbd::Vec3::Zero() : random_vec(rng, -0.4, 0.4);
    l.rotation = random_rotation(rng);
    l.mass = 0.5 + 4.0 * u(rng);
    l.com = random_vec(rng, -0.2, 0.2);
    const rbd::Mat3 r = random_rotation(rng);
    const rbd::Vec3 d = random_vec(rng, 0.01, 0.1);
    l.inertia = r * d.asDiagonal() * r.transpose();
    l.inertia = 0.5 * (l.inertia + l.inertia.transpose()).eval();
    links.push_back(l);
  }
  std::vector<rbd::MarkerSite> markers;
  for (int i = 0; i < n_links; ++i)
    markers.push_back({"m" + std::to_string(i), i, random_vec(rng, -0.1, 0.1)});
  return rbd::KinematicTree("random", std::move(links), rbd::Vec3(0, 0, -9.81), std::move(markers));
}

/// Revolute about y, COM hanging at -lc along z. Gravity -z.
inline rbd::KinematicTree pendulum(double mass, double lc, double iyy, double g = 9.81) {
  rbd::Link l;
  l.name = "rod";
  l.joint = rbd::JointType::Revolute;
  l.axis = rbd::Vec3::UnitY();
  l.mass = mass;
  l.com = rbd::Vec3(0, 0, -lc);
  l.inertia = rbd::Vec3(iyy, iyy, iyy).asDiagonal();
  return rbd::KinematicTree("pendulum", {l}, rbd::Vec3(0, 0, -g), {{"tip", 0, rbd::Vec3(0, 0, -2 * lc)}});
}

inline rbd::VecX random_vector(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  rbd::VecX v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace hdys::testing
