#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <string>
#include <vector>

namespace hdys::rbd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Spherical joints are three successive revolutes about the joint-frame
/// x, y, z axes. A free root is three prismatic (x, y, z) then a spherical.
enum class JointType { Revolute, Spherical, Free };

int joint_dof(JointType type);
const char* joint_name(JointType type);
JointType parse_joint(const std::string& name);

struct Link {
  std::string name;
  int parent = -1;
  JointType joint = JointType::Revolute;
  Vec3 axis = Vec3::UnitZ();          // revolute only, joint frame
  Vec3 origin = Vec3::Zero();         // joint frame origin in the parent link frame
  Mat3 rotation = Mat3::Identity();   // parent-from-joint rotation
  double mass = 1.0;                  // kg
  Vec3 com = Vec3::Zero();            // link frame, m
  Mat3 inertia = Mat3::Identity();    // about the COM, link axes, kg m^2
};

struct MarkerSite {
  std::string name;
  int link = 0;
  Vec3 offset = Vec3::Zero();
};

/// Wrench on a link. `point` is in the link frame; force and torque are
/// world-frame vectors.
struct ExternalForce {
  int link = 0;
  Vec3 point = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

struct GeneralizedState {
  VecX q, qd, qdd;
};

/// Articulated tree with one single-DoF body per generalized coordinate.
/// Multi-DoF joints are expanded into chains of massless bodies; the link
/// inertia sits on the last body of each link.
class KinematicTree {
 public:
  struct Body {
    int parent = -1;  // body index
    int link = 0;
    bool prismatic = false;
    Vec3 axis = Vec3::UnitZ();
    Mat3 fixed_rotation = Mat3::Identity();  // parent body -> joint frame
    Vec3 fixed_origin = Vec3::Zero();
    Mat6 inertia = Mat6::Zero();  // spatial, about the body origin
  };

  KinematicTree() = default;
  /// Validates and compiles. Throws ConfigError on invalid topology or inertia.
  KinematicTree(std::string name, std::vector<Link> links, Vec3 gravity, std::vector<MarkerSite> markers = {});

  const std::string& name() const { return name_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<MarkerSite>& markers() const { return markers_; }
  const Vec3& gravity() const { return gravity_; }
  const std::vector<Body>& bodies() const { return bodies_; }

  int dof() const { return static_cast<int>(bodies_.size()); }
  int root_dof() const { return links_.empty() || links_[0].joint != JointType::Free ? 0 : 6; }
  int actuated_dof() const { return dof() - root_dof(); }
  bool fixed_base() const { return root_dof() == 0; }
  /// First coordinate index of each link.
  int link_dof_offset(int link) const { return link_offset_[link]; }
  /// Index of the body carrying each link's inertia.
  int link_body(int link) const { return link_body_[link]; }
  double total_mass() const;

  /// Same geometry with every mass and inertia multiplied by `factor`.
  KinematicTree scaled(double factor) const;
  KinematicTree with_gravity(const Vec3& g) const;

 private:
  void compile();

  std::string name_;
  std::vector<Link> links_;
  std::vector<MarkerSite> markers_;
  Vec3 gravity_ = Vec3(0, 0, -9.81);
  std::vector<Body> bodies_;
  std::vector<int> link_offset_;
  std::vector<int> link_body_;
};

Mat3 skew(const Vec3& v);

}  // namespace hdys::rbd
