#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../support/fixtures.hpp"
#include "hdys/common/error.hpp"
#include "hdys/rbd/dynamics.hpp"
#include "hdys/rbd/emg.hpp"
#include "hdys/rbd/muscle.hpp"
#include "hdys/rbd/tree_io.hpp"

namespace hdys::rbd {
namespace {

using hdys::testing::pendulum;
using hdys::testing::random_tree;
using hdys::testing::random_vector;

constexpr double kPi = std::numbers::pi;

// Independent homogeneous-matrix chain: one 4x4 per link, joints composed
// from elementary rotations.
std::vector<Eigen::Matrix4d> matrix_chain(const KinematicTree& tree, const VecX& q) {
  auto hom = [](const Mat3& r, const Vec3& p) {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t.topLeftCorner<3, 3>() = r;
    t.topRightCorner<3, 1>() = p;
    return t;
  };
  auto rot = [](const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis).toRotationMatrix(); };
  std::vector<Eigen::Matrix4d> out;
  int k = 0;
  for (const auto& l : tree.links()) {
    const Eigen::Matrix4d parent = l.parent < 0 ? Eigen::Matrix4d::Identity() : out[l.parent];
    Eigen::Matrix4d joint = Eigen::Matrix4d::Identity();
    switch (l.joint) {
      case JointType::Revolute:
        joint = hom(rot(l.axis, q[k]), Vec3::Zero());
        k += 1;
        break;
      case JointType::Spherical:
        joint = hom(rot(Vec3::UnitX(), q[k]) * rot(Vec3::UnitY(), q[k + 1]) * rot(Vec3::UnitZ(), q[k + 2]), Vec3::Zero());
        k += 3;
        break;
      case JointType::Free:
        joint = hom(rot(Vec3::UnitX(), q[k + 3]) * rot(Vec3::UnitY(), q[k + 4]) * rot(Vec3::UnitZ(), q[k + 5]),
                    Vec3(q[k], q[k + 1], q[k + 2]));
        k += 6;
        break;
    }
    out.push_back(parent * hom(l.rotation, l.origin) * joint);
  }
  return out;
}

GeneralizedState random_state(const KinematicTree& tree, std::mt19937_64& rng) {
  return {random_vector(rng, tree.dof(), kPi), random_vector(rng, tree.dof(), 2.0), random_vector(rng, tree.dof(), 5.0)};
}

TEST(Kinematics, ZeroConfigurationComposesFixedTransforms) {
  std::mt19937_64 rng(3);
  const auto tree = random_tree(rng, 5);
  const auto fk = forward_kinematics(tree, VecX::Zero(tree.dof()));
  std::vector<Eigen::Matrix4d> fixed;
  for (const auto& l : tree.links()) {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t.topLeftCorner<3, 3>() = l.rotation;
    t.topRightCorner<3, 1>() = l.origin;
    fixed.push_back(l.parent < 0 ? t : (fixed[l.parent] * t).eval());
  }
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    EXPECT_LT((fk.links[i].rotation - fixed[i].topLeftCorner<3, 3>()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((fk.links[i].position - fixed[i].topRightCorner<3, 1>()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Kinematics, RevoluteQuarterTurnMovesTipToY) {
  Link l;
  l.joint = JointType::Revolute;
  l.axis = Vec3::UnitZ();
  const double len = 0.7;
  KinematicTree tree("arm", {l}, Vec3::Zero(), {{"tip", 0, Vec3(len, 0, 0)}});
  VecX q(1);
  q << kPi / 2;
  const Vec3 tip = forward_kinematics(tree, q).markers[0];
  EXPECT_NEAR(tip.x(), 0.0, 1e-15);
  EXPECT_NEAR(tip.y(), len, 1e-15);
  EXPECT_NEAR(tip.z(), 0.0, 1e-15);
}

TEST(Kinematics, MarkersMatchMatrixChainOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto tree = random_tree(rng, 2 + trial % 5, trial % 4 == 0);
    const VecX q = random_vector(rng, tree.dof(), kPi);
    const auto fk = forward_kinematics(tree, q);
    const auto oracle = matrix_chain(tree, q);
    for (std::size_t m = 0; m < tree.markers().size(); ++m) {
      const auto& site = tree.markers()[m];
      const Vec3 expected = (oracle[site.link] * site.offset.homogeneous()).head<3>();
      EXPECT_LT((fk.markers[m] - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
    for (const auto& pose : fk.links)
      EXPECT_LT((pose.rotation.transpose() * pose.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Kinematics, LengthMismatchThrows) {
  const auto tree = pendulum(1, 1, 0.1);
  EXPECT_THROW(forward_kinematics(tree, VecX::Zero(2)), ShapeError);
}

TEST(InverseDynamics, StaticPendulumMatchesLagrangian) {
  const double m = 2.5, lc = 0.8, g = 9.81;
  const auto tree = pendulum(m, lc, 0.05, g);
  for (double q : {-2.0, -0.5, 0.0, 0.3, 1.2, 3.0}) {
    GeneralizedState s{VecX::Constant(1, q), VecX::Zero(1), VecX::Zero(1)};
    EXPECT_NEAR(rnea(tree, s)[0], m * g * lc * std::sin(q), 1e-12);
  }
}

TEST(InverseDynamics, ZeroGravityAtRestIsZero) {
  std::mt19937_64 rng(5);
  const auto tree = random_tree(rng, 6).with_gravity(Vec3::Zero());
  GeneralizedState s{random_vector(rng, tree.dof(), 2), VecX::Zero(tree.dof()), VecX::Zero(tree.dof())};
  EXPECT_LT(rnea(tree, s).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(InverseDynamics, NonFiniteStateThrows) {
  const auto tree = pendulum(1, 1, 0.1);
  GeneralizedState s{VecX::Constant(1, NAN), VecX::Zero(1), VecX::Zero(1)};
  EXPECT_THROW(rnea(tree, s), NonFiniteError);
}

TEST(InverseDynamics, RoundTripThroughForwardDynamics) {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto tree = random_tree(rng, 2 + trial % 5);
    const auto s = random_state(tree, rng);
    const VecX tau = random_vector(rng, tree.dof(), 20.0);
    const VecX qdd = forward_dynamics(tree, s.q, s.qd, tau);
    worst = std::max(worst, (rnea(tree, {s.q, s.qd, qdd}) - tau).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(InverseDynamics, FreeRootRoundTripAndBallisticResidual) {
  std::mt19937_64 rng(7);
  const auto tree = random_tree(rng, 4, true);
  ASSERT_EQ(tree.root_dof(), 6);
  const auto s = random_state(tree, rng);
  VecX tau = random_vector(rng, tree.dof(), 10.0);
  tau.head(6).setZero();
  const VecX qdd = forward_dynamics(tree, s.q, s.qd, tau);
  const VecX back = rnea(tree, {s.q, s.qd, qdd});
  EXPECT_LT(back.head(6).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((back - tau).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(InverseDynamics, AffineInAcceleration) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto tree = random_tree(rng, 2 + trial % 5);
    const auto s = random_state(tree, rng);
    const VecX a1 = random_vector(rng, tree.dof(), 4), a2 = random_vector(rng, tree.dof(), 4);
    const VecX r0 = rnea(tree, {s.q, s.qd, VecX::Zero(tree.dof())});
    const VecX lhs = rnea(tree, {s.q, s.qd, a1 + a2}) - r0;
    const VecX rhs = (rnea(tree, {s.q, s.qd, a1}) - r0) + (rnea(tree, {s.q, s.qd, a2}) - r0);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
  }
}

// J^T F from finite differences of the application point and link rotation.
TEST(InverseDynamics, ExternalWrenchMatchesJacobianTranspose) {
  std::mt19937_64 rng(17);
  const auto tree = random_tree(rng, 5);
  const auto s = random_state(tree, rng);
  ExternalForce e{3, Vec3(0.1, -0.05, 0.2), Vec3(4, -2, 7), Vec3(0.5, 1.0, -0.3)};
  const VecX with = rnea(tree, s, {&e, 1});
  const VecX without = rnea(tree, s);
  const double h = 1e-6;
  VecX jt(tree.dof());
  for (int i = 0; i < tree.dof(); ++i) {
    VecX qp = s.q, qm = s.q;
    qp[i] += h;
    qm[i] -= h;
    const auto fp = forward_kinematics(tree, qp), fm = forward_kinematics(tree, qm);
    const Vec3 pp = fp.links[3].position + fp.links[3].rotation * e.point;
    const Vec3 pm = fm.links[3].position + fm.links[3].rotation * e.point;
    const Mat3 dr = (fp.links[3].rotation - fm.links[3].rotation) / (2 * h);
    const Mat3 w = dr * forward_kinematics(tree, s.q).links[3].rotation.transpose();
    const Vec3 omega(w(2, 1), w(0, 2), w(1, 0));
    jt[i] = e.force.dot((pp - pm) / (2 * h)) + e.torque.dot(omega);
  }
  EXPECT_LT((without - with - jt).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(MassMatrix, PendulumInertia) {
  const double m = 1.7, lc = 0.6, iyy = 0.04;
  const auto tree = pendulum(m, lc, iyy);
  EXPECT_NEAR(mass_matrix(tree, VecX::Constant(1, 0.9))(0, 0), m * lc * lc + iyy, 1e-13);
}

TEST(MassMatrix, SymmetricPositiveDefiniteAndConsistentWithRnea) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const auto tree = random_tree(rng, 2 + trial % 5, trial % 10 == 0);
    const VecX q = random_vector(rng, tree.dof(), kPi);
    const MatX mm = mass_matrix(tree, q);
    EXPECT_LE((mm - mm.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(Eigen::LLT<MatX>(mm).info(), Eigen::Success);
    if (trial % 10 == 1) {
      const auto flat = tree.with_gravity(Vec3::Zero());
      const VecX zero = VecX::Zero(tree.dof());
      const VecX base = rnea(flat, {q, zero, zero});
      for (int i = 0; i < tree.dof(); ++i) {
        const VecX col = rnea(flat, {q, zero, VecX::Unit(tree.dof(), i)}) - base;
        EXPECT_LT((col - mm.col(i)).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(ForwardDynamics, RecoversTargetAcceleration) {
  std::mt19937_64 rng(23);
  const auto tree = random_tree(rng, 6);
  const auto s = random_state(tree, rng);
  const VecX tau = rnea(tree, s);
  EXPECT_LT((forward_dynamics(tree, s.q, s.qd, tau) - s.qdd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ForwardDynamics, ZeroInputsGiveZeroAcceleration) {
  std::mt19937_64 rng(29);
  const auto tree = random_tree(rng, 4).with_gravity(Vec3::Zero());
  const VecX z = VecX::Zero(tree.dof());
  EXPECT_LT(forward_dynamics(tree, random_vector(rng, tree.dof(), 1), z, z).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ForwardDynamics, HangingPendulum) {
  const double m = 3.0, lc = 0.5, iyy = 0.02, g = 9.81;
  const auto tree = pendulum(m, lc, iyy, g);
  const double q = 0.7;
  const double expected = -(m * g * lc / (m * lc * lc + iyy)) * std::sin(q);
  EXPECT_NEAR(forward_dynamics(tree, VecX::Constant(1, q), VecX::Zero(1), VecX::Zero(1))[0], expected, 1e-12);
}

TEST(Step, ZeroDynamicsIsLinear) {
  std::mt19937_64 rng(31);
  const auto tree = random_tree(rng, 1).with_gravity(Vec3::Zero());
  // A single revolute about its own axis with no gravity: the mass matrix is
  // constant and there is no Coriolis term, so velocity stays put.
  const VecX q = random_vector(rng, tree.dof(), 1), v = random_vector(rng, tree.dof(), 1);
  if (tree.links()[0].joint != JointType::Revolute) GTEST_SKIP() << "fixture draw was spherical";
  const auto [q1, v1] = step(tree, q, v, VecX::Zero(tree.dof()), {}, 0.01);
  EXPECT_LT((q1 - (q + 0.01 * v)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((v1 - v).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Step, LocalErrorIsSecondOrder) {
  const auto tree = pendulum(2.0, 0.5, 0.01);
  const VecX q0 = VecX::Constant(1, 0.8), v0 = VecX::Constant(1, -0.4), tau = VecX::Zero(1);
  auto one_step_error = [&](double dt) {
    auto [q, v] = std::pair<VecX, VecX>{q0, v0};
    for (int i = 0; i < 10; ++i) std::tie(q, v) = step(tree, q, v, tau, {}, dt / 10);
    const auto [qc, vc] = step(tree, q0, v0, tau, {}, dt);
    return std::abs(qc[0] - q[0]);
  };
  const double ratio = one_step_error(0.02) / one_step_error(0.01);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Step, PendulumEnergyDriftBelowTwoPercent) {
  // 2 m uniform rod pivoted at one end.
  const double m = 1.0, len = 2.0, fps = 90.0;
  const auto tree = pendulum(m, len / 2, m * len * len / 12);
  VecX q = VecX::Constant(1, 1.0), v = VecX::Zero(1);
  auto energy = [&] { return kinetic_energy(tree, q, v) + potential_energy(tree, q); };
  const double e0 = energy();
  const double amplitude = e0 - potential_energy(tree, VecX::Zero(1));
  double drift = 0.0;
  for (int i = 0; i < 90; ++i) {
    std::tie(q, v) = step(tree, q, v, VecX::Zero(1), {}, 1.0 / fps);
    drift = std::max(drift, std::abs(energy() - e0));
  }
  EXPECT_LT(drift / amplitude, 0.02);
}

TEST(Step, OracleTorqueRolloutReproducesTrajectory) {
  std::mt19937_64 rng(37);
  const auto tree = random_tree(rng, 4);
  const double dt = 1.0 / 60;
  std::vector<VecX> qs{random_vector(rng, tree.dof(), 1)}, vs{random_vector(rng, tree.dof(), 1)};
  for (int t = 0; t < 6; ++t) {
    auto [q, v] = step(tree, qs.back(), vs.back(), random_vector(rng, tree.dof(), 5), {}, dt);
    qs.push_back(q);
    vs.push_back(v);
  }
  VecX q = qs[0], v = vs[0];
  for (int t = 0; t < 5; ++t) {
    const VecX tau = rnea(tree, {qs[t], vs[t], (vs[t + 1] - vs[t]) / dt});
    std::tie(q, v) = step(tree, q, v, tau, {}, dt);
    const double mse = (q - qs[t + 1]).squaredNorm() / tree.dof();
    EXPECT_LE(mse, t == 0 ? 1e-20 : 1e-12);
  }
}

TEST(Step, NonFiniteTorqueDiverges) {
  const auto tree = pendulum(1, 1, 0.1);
  EXPECT_THROW(step(tree, VecX::Zero(1), VecX::Constant(1, 1e308), VecX::Constant(1, 1e308), {}, 1e10),
               DivergedRolloutError);
  EXPECT_THROW(step(tree, VecX::Zero(1), VecX::Zero(1), VecX::Zero(1), {}, 0.0), ConfigError);
}

TEST(Tree, RejectsInvalidTopologyAndInertia) {
  Link root;
  Link bad = root;
  bad.parent = 5;
  EXPECT_THROW(KinematicTree("t", {root, bad}, Vec3::Zero()), ConfigError);
  Link heavy = root;
  heavy.mass = 0.0;
  EXPECT_THROW(KinematicTree("t", {heavy}, Vec3::Zero()), ConfigError);
  Link skewed = root;
  skewed.inertia(0, 1) = 0.3;
  EXPECT_THROW(KinematicTree("t", {skewed}, Vec3::Zero()), ConfigError);
  Link indefinite = root;
  indefinite.inertia(2, 2) = -1.0;
  EXPECT_THROW(KinematicTree("t", {indefinite}, Vec3::Zero()), ConfigError);
}

TEST(Tree, TotalMassIsSumOfLinks) {
  std::mt19937_64 rng(41);
  const auto tree = random_tree(rng, 6);
  double sum = 0.0;
  for (const auto& l : tree.links()) sum += l.mass;
  EXPECT_DOUBLE_EQ(tree.total_mass(), sum);
  EXPECT_NEAR(tree.scaled(1.2).total_mass(), 1.2 * sum, 1e-12);
}

TEST(TreeIo, JsonRoundTripIsExact) {
  std::mt19937_64 rng(43);
  const auto tree = random_tree(rng, 5, true);
  std::vector<Muscle> ms;
  for (int i = 0; i < tree.actuated_dof() + 2; ++i) ms.push_back({"mu" + std::to_string(i), random_vector(rng, tree.actuated_dof(), 0.05), 500.0 + i});
  const MuscleSet set(ms, tree.actuated_dof());
  const auto back = tree_from_json(tree_to_json(tree, &set));
  EXPECT_EQ(tree_to_json(back.tree, &*back.muscles), tree_to_json(tree, &set));
  const VecX q = random_vector(rng, tree.dof(), 1);
  EXPECT_EQ((mass_matrix(back.tree, q) - mass_matrix(tree, q)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TreeIo, WrongSchemaIsFormatError) {
  EXPECT_THROW(tree_from_json(R"({"schema":"rbd-tree/0","links":[]})"), FormatError);
  EXPECT_THROW(tree_from_json("{not json"), FormatError);
}

MuscleSet make_set(const std::vector<std::pair<std::vector<double>, double>>& spec) {
  std::vector<Muscle> ms;
  for (std::size_t i = 0; i < spec.size(); ++i)
    ms.push_back({"m" + std::to_string(i), Eigen::Map<const VecX>(spec[i].first.data(), spec[i].first.size()), spec[i].second});
  return MuscleSet(ms, static_cast<int>(spec[0].first.size()));
}

TEST(Muscle, TorqueMapDefinitions) {
  const auto single = make_set({{{0.04}, 800.0}});
  EXPECT_DOUBLE_EQ(muscle_to_torque(single, VecX::Ones(1))[0], 0.04 * 800.0);
  EXPECT_EQ(muscle_to_torque(single, VecX::Zero(1))[0], 0.0);
  const auto pair = make_set({{{0.05}, 600.0}, {{-0.05}, 600.0}});
  EXPECT_EQ(muscle_to_torque(pair, VecX::Constant(2, 0.37))[0], 0.0);
  EXPECT_THROW(muscle_to_torque(pair, VecX::Constant(2, 1.01)), ConfigError);
}

TEST(Muscle, ZeroTargetGivesZeroActivation) {
  const auto set = make_set({{{0.05, 0.0}, 600.0}, {{-0.05, 0.02}, 600.0}, {{0.0, -0.04}, 900.0}});
  EXPECT_EQ(solve_activations(set, VecX::Zero(2)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Muscle, SingleMusclePerDofIsScalarSolve) {
  const auto set = make_set({{{0.05, 0.0}, 600.0}, {{0.0, 0.03}, 900.0}});
  VecX tau(2);
  tau << 12.0, 20.0;
  const VecX a = solve_activations(set, tau);
  EXPECT_NEAR(a[0], 12.0 / (0.05 * 600.0), 1e-12);
  EXPECT_NEAR(a[1], 20.0 / (0.03 * 900.0), 1e-12);
}

// min |a| subject to the 1-DoF torque constraint; a3 is solved from the
// constraint at each (a1, a2) grid node. Muscle 3 has the largest torque
// capacity so grid spacing is not amplified through the solved coordinate.
TEST(Muscle, RedundantFixtureMatchesGridSearch) {
  const double r[3] = {0.05, -0.025, 0.06}, f[3] = {600.0, 1000.0, 1200.0};
  const auto set = make_set({{{r[0]}, f[0]}, {{r[1]}, f[1]}, {{r[2]}, f[2]}});
  for (double target : {30.0, 55.0, -10.0, 80.0, 95.0}) {
    const VecX a = solve_activations(set, VecX::Constant(1, target));
    double best = 1e300;
    Eigen::Vector3d best_a;
    const double w3 = r[2] * f[2];
    for (int i = 0; i <= 1000; ++i)
      for (int j = 0; j <= 1000; ++j) {
        const double a1 = i * 1e-3, a2 = j * 1e-3;
        const double a3 = (target - r[0] * f[0] * a1 - r[1] * f[1] * a2) / w3;
        if (a3 < 0.0 || a3 > 1.0) continue;
        const double cost = a1 * a1 + a2 * a2 + a3 * a3;
        if (cost < best) {
          best = cost;
          best_a = {a1, a2, a3};
        }
      }
    ASSERT_LT(best, 1e300);
    EXPECT_LT((a - best_a).cwiseAbs().maxCoeff(), 2e-3) << "target " << target;
    EXPECT_NEAR(muscle_to_torque(set, a)[0], target, 1e-6);
  }
}

TEST(Muscle, RandomFeasibleTargetsRoundTrip) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    std::vector<Muscle> ms;
    for (int i = 0; i < 2 * n + 3; ++i) ms.push_back({"m", random_vector(rng, n, 0.06), 300.0 + 1200.0 * u(rng)});
    const MuscleSet set(ms, n);
    VecX a0(set.count());
    for (auto& x : a0) x = u(rng);
    const VecX tau = muscle_to_torque(set, a0);
    const VecX a = solve_activations(set, tau);
    EXPECT_LE((muscle_to_torque(set, a) - tau).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE(a.norm(), a0.norm() + 1e-9);
    EXPECT_GE(a.minCoeff(), 0.0);
    EXPECT_LE(a.maxCoeff(), 1.0);
  }
}

TEST(Muscle, InfeasibleTargetIsReported) {
  const auto set = make_set({{{0.05}, 600.0}, {{-0.05}, 600.0}});
  EXPECT_THROW(solve_activations(set, VecX::Constant(1, 31.0)), InfeasibleError);
}

TEST(Emg, ZeroActivationWithoutNoiseIsZero) {
  EmgOptions opt;
  opt.noise = false;
  EXPECT_EQ(synth_emg(MatX::Zero(50, 3), 100.0, 1, opt).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Emg, StepResponseReachesOneMinusInverseE) {
  EmgOptions opt;
  opt.noise = false;
  const double fps = 100.0;
  MatX a = MatX::Zero(40, 1);
  a.bottomRows(30).setOnes();  // step at frame 10
  const MatX y = synth_emg(a, fps, 0, opt);
  EXPECT_EQ(y(10, 0), 0.0);
  EXPECT_NEAR(y(14, 0), 1.0 - std::exp(-1.0), 1e-12);
}

TEST(Emg, SeededNoiseIsDeterministicAndNonNegative) {
  MatX a = MatX::Constant(200, 4, 0.05);
  const MatX y1 = synth_emg(a, 100.0, 9), y2 = synth_emg(a, 100.0, 9), y3 = synth_emg(a, 100.0, 10);
  EXPECT_EQ((y1 - y2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((y1 - y3).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(y1.minCoeff(), 0.0);
}

}  // namespace
}  // namespace hdys::rbd
