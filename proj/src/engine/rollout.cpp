#include "hdys/engine/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "hdys/common/error.hpp"
#include "hdys/datahub/standard.hpp"
#include "hdys/engine/evaluate.hpp"
#include "hdys/rbd/dynamics.hpp"

namespace hdys::engine {
namespace {

using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

}  // namespace

const RolloutRow& RolloutReport::row(const std::string& source, double fps, int k) const {
  for (const auto& r : rows)
    if (r.source == source && r.fps == fps && r.k == k) return r;
  throw ConfigError("no rollout row for " + source + " at " + fmt(fps) + " fps, k=" + std::to_string(k));
}

DiscreteReference discrete_reference(const MatX& q, double fps) {
  DiscreteReference ref;
  const auto n = q.rows();
  ref.q = q;
  ref.qd = MatX::Zero(n, q.cols());
  ref.qdd = MatX::Zero(n, q.cols());
  for (Eigen::Index t = 1; t < n; ++t) ref.qd.row(t) = (q.row(t) - q.row(t - 1)) * fps;
  for (Eigen::Index t = 1; t + 1 < n; ++t) ref.qdd.row(t) = (ref.qd.row(t + 1) - ref.qd.row(t)) * fps;
  return ref;
}

MatX oracle_torques(const rbd::KinematicTree& tree, const DiscreteReference& ref) {
  MatX tau = MatX::Zero(ref.q.rows(), tree.dof());
  for (Eigen::Index t = 1; t + 1 < ref.q.rows(); ++t) {
    const rbd::GeneralizedState s{ref.q.row(t).transpose(), ref.qd.row(t).transpose(), ref.qdd.row(t).transpose()};
    tau.row(t) = rbd::rnea(tree, s).transpose();
  }
  return tau;
}

std::vector<double> rollout_from(const rbd::KinematicTree& tree, const DiscreteReference& ref, const MatX& tau, int s,
                                 int kmax, double fps) {
  if (s < 1 || s + kmax >= ref.q.rows())
    throw ConfigError("rollout start " + std::to_string(s) + " with horizon " + std::to_string(kmax) +
                      " leaves the reference");
  VecX q = ref.q.row(s).transpose(), qd = ref.qd.row(s).transpose();
  std::vector<double> mse;
  for (int k = 1; k <= kmax; ++k) {
    std::tie(q, qd) = rbd::step(tree, q, qd, tau.row(s + k - 1).transpose(), {}, 1.0 / fps);
    if (!q.allFinite() || !qd.allFinite())
      throw DivergedRolloutError("rollout from frame " + std::to_string(s) + " diverged at step " + std::to_string(k));
    mse.push_back((q - ref.q.row(s + k).transpose()).squaredNorm() / static_cast<double>(q.size()));
  }
  return mse;
}

RolloutReport rollout_eval(const TrainedModel& run, const data::Dataset& data) {
  const auto& cfg = run.config;
  const int kmax = *std::max_element(cfg.rollout_k.begin(), cfg.rollout_k.end());
  RolloutReport rep;
  for (const auto& p : data.manifest.profiles) {
    if (!p.dynamics.test(kin::index(kin::Channel::TorqueAngleTree))) continue;
    if (!data::standard_tree(p.tree).fixed_base()) continue;
    rep.profiles.push_back(p.id);
  }
  if (rep.profiles.empty())
    throw ConfigError("rollout needs a profile with a fixed-base tree and angle-tree torques");

  for (double fps : cfg.rollout_fps) {
    // source -> k -> (sum, count)
    std::map<std::string, std::vector<double>> sum;
    std::map<std::string, int> kept, diverged;
    for (const char* src : {"predicted", "oracle"}) sum[src].assign(static_cast<std::size_t>(kmax), 0.0);
    for (const auto& pid : rep.profiles) {
      const auto& profile = data.manifest.profile(pid);
      for (const auto& sid : data.manifest.test_ids(pid)) {
        const auto& entry = data.manifest.sequence(sid);
        const auto record = data::generate_sequence(data.manifest, entry, fps);
        const auto real = data::realize(profile, entry, fps);
        if (!record.trajectory) throw ConfigError("sequence " + sid + " carries no oracle trajectory");
        const auto ref = discrete_reference(record.trajectory->q, fps);
        const auto pred = predict_sequence(run, record);
        const auto& by_source = pred.dynamics.at(kin::Channel::TorqueAngleTree);
        const MatX predicted = averaged_prediction(by_source) * record.mass;
        const MatX oracle = oracle_torques(real.tree, ref);
        if (predicted.cols() != oracle.cols())
          throw ConfigError("predicted torque width does not match the tree of " + sid);
        for (int s = 1; s + kmax < ref.q.rows(); s += cfg.rollout_start_stride)
          for (const auto& [src, tau] : {std::pair<std::string, const MatX*>{"predicted", &predicted},
                                         std::pair<std::string, const MatX*>{"oracle", &oracle}}) {
            try {
              const auto mse = rollout_from(real.tree, ref, *tau, s, kmax, fps);
              for (int k = 0; k < kmax; ++k) sum[src][static_cast<std::size_t>(k)] += mse[static_cast<std::size_t>(k)];
              ++kept[src];
            } catch (const DivergedRolloutError&) {
              ++diverged[src];
            }
          }
      }
    }
    for (const char* src : {"predicted", "oracle"})
      for (int k : cfg.rollout_k) {
        RolloutRow r;
        r.source = src;
        r.fps = fps;
        r.k = k;
        r.starts = kept[src];
        r.diverged = diverged[src];
        r.mse = r.starts > 0 ? sum[src][static_cast<std::size_t>(k - 1)] / r.starts
                             : std::numeric_limits<double>::quiet_NaN();
        rep.rows.push_back(r);
      }
  }
  return rep;
}

std::string rollout_csv(const RolloutReport& report) {
  std::ostringstream out;
  out << "source,fps,k,mse,starts,diverged\n";
  for (const auto& r : report.rows)
    out << r.source << ',' << fmt(r.fps) << ',' << r.k << ',' << fmt(r.mse) << ',' << r.starts << ',' << r.diverged
        << '\n';
  return out.str();
}

}  // namespace hdys::engine
