#include "hdys/rbd/muscle.hpp"

#include <cmath>

#include "hdys/common/error.hpp"

namespace hdys::rbd {

MuscleSet::MuscleSet(std::vector<Muscle> muscles, int actuated_dof)
    : muscles_(std::move(muscles)), actuated_dof_(actuated_dof) {
  if (actuated_dof_ < 0) throw ConfigError("muscle set: negative DoF count");
  w_.resize(actuated_dof_, static_cast<Eigen::Index>(muscles_.size()));
  for (std::size_t j = 0; j < muscles_.size(); ++j) {
    const auto& m = muscles_[j];
    if (m.moment_arm.size() != actuated_dof_)
      throw ConfigError("muscle '" + m.name + "': moment arm has " + std::to_string(m.moment_arm.size()) +
                        " entries, expected " + std::to_string(actuated_dof_));
    if (!(m.max_force > 0.0) || !std::isfinite(m.max_force))
      throw ConfigError("muscle '" + m.name + "': max force must be positive");
    if (!m.moment_arm.allFinite()) throw ConfigError("muscle '" + m.name + "': non-finite moment arm");
    w_.col(static_cast<Eigen::Index>(j)) = m.moment_arm * m.max_force;
  }
}

VecX muscle_to_torque(const MuscleSet& ms, const VecX& a) {
  if (a.size() != ms.count())
    throw ShapeError("activation vector has " + std::to_string(a.size()) + " entries, muscle set has " +
                     std::to_string(ms.count()));
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a[i] >= 0.0 && a[i] <= 1.0))
      throw ConfigError("activation " + std::to_string(i) + " = " + std::to_string(a[i]) + " is outside [0,1]");
  return ms.torque_map() * a;
}

// Dual of min 0.5|a|^2 s.t. W a = tau, 0 <= a <= 1:
//   a(l) = clip(W^T l, 0, 1), grad = tau - W a(l).
// Semismooth Newton on the dual with a backtracking line search.
VecX solve_activations(const MuscleSet& ms, const VecX& tau, const ActivationSolveOptions& opt) {
  const MatX& w = ms.torque_map();
  const auto n = w.rows();
  const auto m = w.cols();
  if (tau.size() != n)
    throw ShapeError("torque target has " + std::to_string(tau.size()) + " entries, muscle set spans " +
                     std::to_string(n) + " DoF");
  if (!tau.allFinite()) throw NonFiniteError("torque target contains non-finite entries");
  if (m < n) throw ConfigError("muscle set has fewer muscles than actuated DoF");

  const double scale = 1.0 + tau.cwiseAbs().maxCoeff();
  const double ridge = 1e-14 * (1.0 + w.squaredNorm());
  auto activations = [&](const VecX& l) { return VecX((w.transpose() * l).cwiseMax(0.0).cwiseMin(1.0)); };
  auto dual = [&](const VecX& l, const VecX& a) { return l.dot(tau) - l.dot(w * a) + 0.5 * a.squaredNorm(); };

  VecX lambda = VecX::Zero(n);
  VecX a = activations(lambda);
  VecX residual = tau - w * a;
  for (int it = 0; it < opt.max_iterations && residual.cwiseAbs().maxCoeff() > opt.tolerance * scale; ++it) {
    const VecX s = w.transpose() * lambda;
    // Generalized Jacobian of the clip; boundary entries count as active so
    // the system is not singular at the zero start.
    MatX h = MatX::Identity(n, n) * ridge;
    for (Eigen::Index j = 0; j < m; ++j)
      if (s[j] >= 0.0 && s[j] <= 1.0) h.noalias() += w.col(j) * w.col(j).transpose();
    const VecX dir = h.ldlt().solve(residual);
    const double d0 = dual(lambda, a);
    const double slope = residual.dot(dir);
    double t = 1.0;
    VecX trial, ta;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      trial = lambda + t * dir;
      ta = activations(trial);
      if (dual(trial, ta) >= d0 + 1e-4 * t * slope) break;
    }
    lambda = trial;
    a = ta;
    residual = tau - w * a;
  }
  if (residual.cwiseAbs().maxCoeff() > 1e-6)
    throw InfeasibleError("torque target is outside the muscle torque polytope (residual " +
                          std::to_string(residual.cwiseAbs().maxCoeff()) + ")");
  return a;
}

}  // namespace hdys::rbd
