#include "hdys/rbd/tree.hpp"

#include <cmath>

#include "hdys/common/error.hpp"

namespace hdys::rbd {

int joint_dof(JointType type) {
  switch (type) {
    case JointType::Revolute: return 1;
    case JointType::Spherical: return 3;
    case JointType::Free: return 6;
  }
  return 0;
}

const char* joint_name(JointType type) {
  switch (type) {
    case JointType::Revolute: return "revolute";
    case JointType::Spherical: return "spherical";
    case JointType::Free: return "free";
  }
  return "?";
}

JointType parse_joint(const std::string& name) {
  if (name == "revolute") return JointType::Revolute;
  if (name == "spherical") return JointType::Spherical;
  if (name == "free") return JointType::Free;
  throw ConfigError("unknown joint type '" + name + "'");
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

namespace {

Mat6 spatial_inertia(double mass, const Vec3& com, const Mat3& inertia_com) {
  const Mat3 cx = skew(com);
  Mat6 out;
  out.topLeftCorner<3, 3>() = inertia_com + mass * cx * cx.transpose();
  out.topRightCorner<3, 3>() = mass * cx;
  out.bottomLeftCorner<3, 3>() = mass * cx.transpose();
  out.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return out;
}

}  // namespace

KinematicTree::KinematicTree(std::string name, std::vector<Link> links, Vec3 gravity, std::vector<MarkerSite> markers)
    : name_(std::move(name)), links_(std::move(links)), markers_(std::move(markers)), gravity_(gravity) {
  if (links_.empty()) throw ConfigError("tree '" + name_ + "' has no links");
  if (!gravity_.allFinite()) throw ConfigError("gravity must be finite");
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    const std::string where = "tree '" + name_ + "' link " + std::to_string(i) + " (" + l.name + ")";
    if (i == 0 && l.parent != -1) throw ConfigError(where + ": the first link must be the root");
    if (i > 0 && (l.parent < 0 || l.parent >= static_cast<int>(i)))
      throw ConfigError(where + ": parent index must precede the link (exactly one root)");
    if (l.joint == JointType::Free && i != 0) throw ConfigError(where + ": only the root may be free");
    if (!(l.mass > 0.0) || !std::isfinite(l.mass)) throw ConfigError(where + ": mass must be positive");
    if ((l.inertia - l.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + l.inertia.cwiseAbs().maxCoeff()))
      throw ConfigError(where + ": inertia must be symmetric");
    if (Eigen::LLT<Mat3>(l.inertia).info() != Eigen::Success)
      throw ConfigError(where + ": inertia must be positive definite");
    if (l.joint == JointType::Revolute && std::abs(l.axis.norm() - 1.0) > 1e-9)
      throw ConfigError(where + ": joint axis must be a unit vector");
    if ((l.rotation.transpose() * l.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
      throw ConfigError(where + ": fixed rotation must be orthonormal");
    if (!l.origin.allFinite() || !l.com.allFinite()) throw ConfigError(where + ": non-finite geometry");
  }
  for (const auto& m : markers_)
    if (m.link < 0 || m.link >= static_cast<int>(links_.size()) || !m.offset.allFinite())
      throw ConfigError("tree '" + name_ + "': marker '" + m.name + "' references an invalid link");
  compile();
}

void KinematicTree::compile() {
  bodies_.clear();
  link_offset_.assign(links_.size(), 0);
  link_body_.assign(links_.size(), 0);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    link_offset_[i] = static_cast<int>(bodies_.size());
    int parent = l.parent < 0 ? -1 : link_body_[l.parent];
    std::vector<std::pair<bool, Vec3>> axes;
    switch (l.joint) {
      case JointType::Revolute:
        axes = {{false, l.axis}};
        break;
      case JointType::Spherical:
        axes = {{false, Vec3::UnitX()}, {false, Vec3::UnitY()}, {false, Vec3::UnitZ()}};
        break;
      case JointType::Free:
        axes = {{true, Vec3::UnitX()}, {true, Vec3::UnitY()}, {true, Vec3::UnitZ()},
                {false, Vec3::UnitX()}, {false, Vec3::UnitY()}, {false, Vec3::UnitZ()}};
        break;
    }
    for (std::size_t k = 0; k < axes.size(); ++k) {
      Body b;
      b.parent = parent;
      b.link = static_cast<int>(i);
      b.prismatic = axes[k].first;
      b.axis = axes[k].second;
      if (k == 0) {
        b.fixed_rotation = l.rotation;
        b.fixed_origin = l.origin;
      }
      if (k + 1 == axes.size()) b.inertia = spatial_inertia(l.mass, l.com, l.inertia);
      parent = static_cast<int>(bodies_.size());
      bodies_.push_back(b);
    }
    link_body_[i] = parent;
  }
}

double KinematicTree::total_mass() const {
  double m = 0.0;
  for (const auto& l : links_) m += l.mass;
  return m;
}

KinematicTree KinematicTree::scaled(double factor) const {
  std::vector<Link> links = links_;
  for (auto& l : links) {
    l.mass *= factor;
    l.inertia *= factor;
  }
  return KinematicTree(name_, std::move(links), gravity_, markers_);
}

KinematicTree KinematicTree::with_gravity(const Vec3& g) const {
  return KinematicTree(name_, links_, g, markers_);
}

}  // namespace hdys::rbd
