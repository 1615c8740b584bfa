#include "hdys/datahub/standard.hpp"

#include "hdys/common/error.hpp"
#include "hdys/rbd/dynamics.hpp"

namespace hdys::data {
namespace {

using rbd::JointType;
using rbd::Link;
using rbd::Mat3;
using rbd::Vec3;

constexpr double kMomentArm = 0.05;  // m, agonist/antagonist arm

// Solid cylinder along z about its COM.
Mat3 rod_inertia(double mass, double length, double radius) {
  const double axial = 0.5 * mass * radius * radius;
  const double transverse = mass * (3 * radius * radius + length * length) / 12.0;
  return Vec3(transverse, transverse, axial).asDiagonal();
}

Link make_link(std::string name, int parent, JointType joint, Vec3 origin, double mass, Vec3 com, double length,
               double radius, Vec3 axis = Vec3::UnitY()) {
  Link l;
  l.name = std::move(name);
  l.parent = parent;
  l.joint = joint;
  l.axis = axis;
  l.origin = origin;
  l.mass = mass;
  l.com = com;
  l.inertia = rod_inertia(mass, length, radius);
  return l;
}

// Four or five sites around a link's long axis, from its origin to `tip`.
void add_sites(std::vector<rbd::MarkerSite>& out, const std::string& name, int link, const Vec3& tip, double r,
               int count) {
  const Vec3 offsets[5] = {tip * 0.3 + Vec3(r, 0, 0), tip * 0.5 + Vec3(0, r, 0), tip * 0.7 + Vec3(-r, 0, 0),
                           tip * 0.9 + Vec3(0, -r, 0), tip * 0.5 + Vec3(r, r, 0) * 0.7};
  for (int i = 0; i < count; ++i) out.push_back({name + "_" + std::to_string(i), link, offsets[i]});
}

int link_index(const rbd::KinematicTree& tree, const std::string& name) {
  for (std::size_t i = 0; i < tree.links().size(); ++i)
    if (tree.links()[i].name == name) return static_cast<int>(i);
  throw ConfigError("tree '" + tree.name() + "' has no link '" + name + "'");
}

int dof_index(const rbd::KinematicTree& tree, const std::string& link, int offset) {
  return tree.link_dof_offset(link_index(tree, link)) + offset - tree.root_dof();
}

}  // namespace

rbd::KinematicTree tree_t1() {
  std::vector<Link> l;
  l.push_back(make_link("pelvis", -1, JointType::Spherical, Vec3(0, 0, 1.0), 11.0, Vec3(0, 0, 0.02), 0.2, 0.14));
  l.push_back(make_link("femur_r", 0, JointType::Spherical, Vec3(0, -0.09, -0.07), 9.0, Vec3(0, 0, -0.18), 0.42, 0.06));
  l.push_back(make_link("tibia_r", 1, JointType::Revolute, Vec3(0, 0, -0.42), 3.7, Vec3(0, 0, -0.18), 0.41, 0.045));
  l.push_back(make_link("foot_r", 2, JointType::Spherical, Vec3(0, 0, -0.41), 1.2, Vec3(0.05, 0, -0.04), 0.2, 0.04));
  l.push_back(make_link("femur_l", 0, JointType::Spherical, Vec3(0, 0.09, -0.07), 9.0, Vec3(0, 0, -0.18), 0.42, 0.06));
  l.push_back(make_link("tibia_l", 4, JointType::Revolute, Vec3(0, 0, -0.42), 3.7, Vec3(0, 0, -0.18), 0.41, 0.045));
  l.push_back(make_link("foot_l", 5, JointType::Spherical, Vec3(0, 0, -0.41), 1.2, Vec3(0.05, 0, -0.04), 0.2, 0.04));
  l.push_back(make_link("torso", 0, JointType::Spherical, Vec3(0, 0, 0.1), 26.0, Vec3(0, 0, 0.25), 0.5, 0.15));
  l.push_back(make_link("head", 7, JointType::Spherical, Vec3(0, 0, 0.52), 5.0, Vec3(0, 0, 0.1), 0.22, 0.09));

  std::vector<rbd::MarkerSite> m;
  const Vec3 tips[9] = {{0, 0, 0.15},  {0, 0, -0.42}, {0, 0, -0.41}, {0.18, 0, -0.06}, {0, 0, -0.42},
                        {0, 0, -0.41}, {0.18, 0, -0.06}, {0, 0, 0.5}, {0, 0, 0.22}};
  const double radius[9] = {0.13, 0.07, 0.05, 0.04, 0.07, 0.05, 0.04, 0.15, 0.09};
  const int counts[9] = {5, 5, 4, 4, 5, 4, 4, 5, 4};
  for (int i = 0; i < 9; ++i) add_sites(m, l[i].name, i, tips[i], radius[i], counts[i]);
  return rbd::KinematicTree("T1", std::move(l), Vec3(0, 0, -9.81), std::move(m));
}

rbd::KinematicTree tree_t2() {
  std::vector<Link> l;
  l.push_back(make_link("pelvis", -1, JointType::Spherical, Vec3(0, 0, 0.95), 10.0, Vec3(0, 0, 0.03), 0.2, 0.14));
  l.push_back(make_link("spine", 0, JointType::Revolute, Vec3(0, 0, 0.1), 8.0, Vec3(0, 0, 0.1), 0.2, 0.13));
  l.push_back(make_link("chest", 1, JointType::Revolute, Vec3(0, 0, 0.2), 18.0, Vec3(0, 0, 0.15), 0.3, 0.15,
                        Vec3::UnitX()));
  l.push_back(make_link("head", 2, JointType::Revolute, Vec3(0, 0, 0.32), 5.0, Vec3(0, 0, 0.1), 0.22, 0.09));
  l.push_back(make_link("thigh_r", 0, JointType::Spherical, Vec3(0, -0.1, -0.08), 9.0, Vec3(0, 0, -0.17), 0.4, 0.06));
  l.push_back(make_link("shin_r", 4, JointType::Revolute, Vec3(0, 0, -0.4), 3.8, Vec3(0, 0, -0.19), 0.42, 0.045));
  l.push_back(make_link("foot_r", 5, JointType::Revolute, Vec3(0, 0, -0.42), 1.1, Vec3(0.05, 0, -0.04), 0.2, 0.04));
  l.push_back(make_link("thigh_l", 0, JointType::Spherical, Vec3(0, 0.1, -0.08), 9.0, Vec3(0, 0, -0.17), 0.4, 0.06));
  l.push_back(make_link("shin_l", 7, JointType::Revolute, Vec3(0, 0, -0.4), 3.8, Vec3(0, 0, -0.19), 0.42, 0.045));
  l.push_back(make_link("foot_l", 8, JointType::Revolute, Vec3(0, 0, -0.42), 1.1, Vec3(0.05, 0, -0.04), 0.2, 0.04));
  l.push_back(make_link("arm_r", 2, JointType::Revolute, Vec3(0, -0.2, 0.25), 4.0, Vec3(0, 0, -0.25), 0.55, 0.04));
  l.push_back(make_link("arm_l", 2, JointType::Revolute, Vec3(0, 0.2, 0.25), 4.0, Vec3(0, 0, -0.25), 0.55, 0.04));

  std::vector<rbd::MarkerSite> m;
  const Vec3 tips[12] = {{0, 0, 0.15},  {0, 0, 0.2},   {0, 0, 0.3},   {0, 0, 0.22},      {0, 0, -0.4},      {0, 0, -0.42},
                         {0.18, 0, -0.06}, {0, 0, -0.4}, {0, 0, -0.42}, {0.18, 0, -0.06}, {0, 0, -0.55}, {0, 0, -0.55}};
  const double radius[12] = {0.13, 0.12, 0.15, 0.09, 0.07, 0.05, 0.04, 0.07, 0.05, 0.04, 0.045, 0.045};
  for (int i = 0; i < 12; ++i) add_sites(m, l[i].name, i, tips[i], radius[i], 4);
  return rbd::KinematicTree("T2", std::move(l), Vec3(0, 0, -9.81), std::move(m));
}

rbd::KinematicTree standard_tree(const std::string& name) {
  if (name == "T1") return tree_t1();
  if (name == "T2") return tree_t2();
  throw ConfigError("unknown tree '" + name + "' (expected T1 or T2)");
}

rbd::MuscleSet standard_muscles(const rbd::KinematicTree& tree) {
  const int n = tree.actuated_dof();
  const auto& links = tree.links();
  const auto fk = rbd::forward_kinematics(tree, rbd::VecX::Zero(tree.dof()));

  // Torque capacity per link joint: static gravity moment plus an inertial
  // allowance over the subtree. Sized so reach-like motions peak near half
  // activation.
  std::vector<double> capacity(links.size(), 0.0);
  for (std::size_t j = 0; j < links.size(); ++j) {
    double static_moment = 0.0, inertia = 0.0;
    for (std::size_t k = j; k < links.size(); ++k) {
      int a = static_cast<int>(k);
      while (a > static_cast<int>(j)) a = links[a].parent;
      if (a != static_cast<int>(j)) continue;
      const Vec3 com = fk.links[k].position + fk.links[k].rotation * links[k].com;
      const double r = (com - fk.joints[j]).norm();
      static_moment += links[k].mass * 9.81 * r;
      inertia += links[k].mass * r * r + links[k].inertia.trace() / 3.0;
    }
    capacity[j] = 1.2 * (static_moment + 60.0 * inertia) + 2.0;
  }

  std::vector<rbd::Muscle> muscles;
  for (std::size_t j = 0; j < links.size(); ++j) {
    const int dofs = rbd::joint_dof(links[j].joint);
    for (int d = 0; d < dofs; ++d) {
      const int idx = tree.link_dof_offset(static_cast<int>(j)) + d - tree.root_dof();
      if (idx < 0) continue;
      rbd::VecX arm = rbd::VecX::Zero(n);
      arm[idx] = kMomentArm;
      const double force = capacity[j] / kMomentArm;
      const std::string base = links[j].name + "_" + std::to_string(d);
      muscles.push_back({base + "_ag", arm, force});
      muscles.push_back({base + "_an", -arm, force});
    }
  }

  // Biarticular pairs spanning hip/knee and knee/ankle on both legs.
  struct Span {
    const char* a;
    int da;
    const char* b;
    int db;
  };
  std::vector<Span> spans;
  if (tree.name() == "T1")
    spans = {{"femur_r", 1, "tibia_r", 0}, {"femur_l", 1, "tibia_l", 0}, {"tibia_r", 0, "foot_r", 1}, {"tibia_l", 0, "foot_l", 1}};
  else if (tree.name() == "T2")
    spans = {{"thigh_r", 1, "shin_r", 0}, {"thigh_l", 1, "shin_l", 0}, {"shin_r", 0, "foot_r", 0}, {"shin_l", 0, "foot_l", 0}};
  for (const auto& s : spans) {
    rbd::VecX arm = rbd::VecX::Zero(n);
    arm[dof_index(tree, s.a, s.da)] = 0.04;
    arm[dof_index(tree, s.b, s.db)] = -0.03;
    const double force = 0.5 * std::min(capacity[link_index(tree, s.a)], capacity[link_index(tree, s.b)]) / 0.04;
    muscles.push_back({std::string(s.a) + "_" + s.b + "_bi", arm, force});
  }
  return rbd::MuscleSet(std::move(muscles), n);
}

std::vector<int> emg_electrodes() {
  const auto tree = tree_t1();
  std::vector<int> out;
  for (auto [link, d] : std::vector<std::pair<const char*, int>>{{"femur_r", 1}, {"tibia_r", 0}, {"foot_r", 1}, {"femur_l", 1}}) {
    const int idx = dof_index(tree, link, d);
    out.push_back(2 * idx);
    out.push_back(2 * idx + 1);
  }
  return out;
}

}  // namespace hdys::data
