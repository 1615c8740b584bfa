#include "hdys/model/batch.hpp"

#include <algorithm>
#include <set>

#include "hdys/common/error.hpp"
#include "hdys/datahub/standard.hpp"
#include "hdys/numcore/checkpoint.hpp"

namespace hdys::model {
namespace {

using MatX = Eigen::MatrixXd;
using RowX = Eigen::RowVectorXd;

std::string stat_name(Channel c, const char* what) {
  return std::string(nc::kStatPrefix) + kin::channel_name(c) + "." + what;
}

RowX stat_row(const nc::ParameterStore& store, Channel c, const char* what) {
  const auto& t = store.get(stat_name(c, what));
  return Eigen::Map<const RowX>(t.data(), static_cast<Eigen::Index>(t.size()));
}

nc::Tensor to_tensor(const MatX& m) {
  std::vector<double> v(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), m.rows(), m.cols()) = m;
  return nc::Tensor::matrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), std::move(v));
}

// Rows of one channel as the stats see them: tokens for Cartesian sets,
// frames otherwise.
MatX feature_rows(const kin::SequenceRecord& r, Channel c) {
  const MatX& m = r.at(c);
  if (c == Channel::Markers || c == Channel::Keypoints) {
    const Eigen::Index e = m.cols() / 9;
    MatX out(m.rows() * e, 9);
    for (Eigen::Index t = 0; t < m.rows(); ++t)
      for (Eigen::Index k = 0; k < e; ++k) out.row(t * e + k) = m.block(t, k * 9, 1, 9);
    return out;
  }
  if (mass_normalized(c)) return m / r.mass;
  return m;
}

// Floors tiny deviations relative to the largest in the same family of
// columns; `period` groups columns (3 for q/qd/qdd interleaving).
void floor_std(RowX& sd, int period) {
  for (int p = 0; p < period; ++p) {
    double top = 0.0;
    for (Eigen::Index j = p; j < sd.size(); j += period) top = std::max(top, sd[j]);
    for (Eigen::Index j = p; j < sd.size(); j += period) sd[j] = std::max({sd[j], 0.05 * top, 1e-6});
  }
}

}  // namespace

bool mass_normalized(Channel c) { return c == Channel::TorqueAngleTree || c == Channel::TorquePoseTree; }

ModelShape shape_from_profiles(const std::vector<data::DomainProfile>& profiles) {
  ModelShape s;
  s.width[kin::index(Channel::Markers)] = 9;
  s.width[kin::index(Channel::Keypoints)] = 9;
  std::set<int> kp;
  auto put = [&](Channel c, int w, const std::string& profile) {
    int& slot = s.width[kin::index(c)];
    if (slot != 0 && slot != w)
      throw ConfigError(std::string("channel ") + kin::channel_name(c) + " has width " + std::to_string(slot) +
                        " in one profile and " + std::to_string(w) + " in " + profile);
    slot = w;
  };
  for (const auto& p : profiles) {
    const auto tree = data::standard_tree(p.tree);
    const int dof = tree.actuated_dof();
    auto has = [&](Channel c) { return p.kinematics.test(kin::index(c)) || p.dynamics.test(kin::index(c)); };
    if (has(Channel::Keypoints)) kp.insert(static_cast<int>(tree.links().size()));
    if (has(Channel::Angles)) put(Channel::Angles, 3 * tree.dof(), p.id);
    if (has(Channel::Pose)) put(Channel::Pose, 3 * tree.dof(), p.id);
    if (has(Channel::TorqueAngleTree)) put(Channel::TorqueAngleTree, dof, p.id);
    if (has(Channel::TorquePoseTree)) put(Channel::TorquePoseTree, dof, p.id);
    if (has(Channel::Muscle)) put(Channel::Muscle, data::standard_muscles(tree).count(), p.id);
    if (has(Channel::Emg)) put(Channel::Emg, static_cast<int>(data::emg_electrodes().size()), p.id);
  }
  s.keypoint_counts.assign(kp.begin(), kp.end());
  return s;
}

void add_stats(nc::ParameterStore& store, const ModelShape& shape, const std::vector<const kin::SequenceRecord*>& train) {
  for (int ci = 0; ci < kin::kChannelCount; ++ci) {
    const auto c = static_cast<Channel>(ci);
    const int w = shape.width[ci];
    if (w == 0) continue;
    RowX sum = RowX::Zero(w), sq = RowX::Zero(w);
    double n = 0.0;
    for (const auto* r : train) {
      if (!r->has(c)) continue;
      const MatX rows = feature_rows(*r, c);
      if (rows.cols() != w)
        throw ConfigError("sequence " + r->id + ": channel " + kin::channel_name(c) + " width " +
                          std::to_string(rows.cols()) + " does not match the model (" + std::to_string(w) + ")");
      sum += rows.colwise().sum();
      sq += rows.array().square().matrix().colwise().sum();
      n += static_cast<double>(rows.rows());
    }
    RowX mean = RowX::Zero(w), sd = RowX::Ones(w);
    if (n > 1.0) {
      mean = sum / n;
      sd = ((sq / n).array() - mean.array().square()).max(0.0).sqrt().matrix();
      floor_std(sd, kin::is_kinematics(c) ? 3 : 1);
    }
    // Positions keep their offset; derivatives are centred at zero.
    if (c == Channel::Markers || c == Channel::Keypoints) mean.tail(6).setZero();
    const auto cols = static_cast<std::size_t>(w);
    store.add(stat_name(c, "mean"), nc::Tensor({1, cols}, std::vector<double>(mean.data(), mean.data() + w)), false);
    store.add(stat_name(c, "std"), nc::Tensor({1, cols}, std::vector<double>(sd.data(), sd.data() + w)), false);
  }
}

GroupInput make_group(const HDySConfig& cfg, const nc::ParameterStore& store, const std::vector<WindowRef>& windows) {
  if (windows.empty()) throw ConfigError("empty window group");
  GroupInput g;
  const auto& first = *windows.front().record;
  g.profile = first.profile;
  g.windows = static_cast<int>(windows.size());
  g.window = cfg.window;
  g.mask = first.mask & cfg.channels;
  for (const auto& w : windows) {
    if (w.record->profile != g.profile) throw ConfigError("window group mixes profiles");
    if (w.start < 0 || w.start + cfg.window > w.record->frames())
      throw ConfigError("window at frame " + std::to_string(w.start) + " overruns sequence " + w.record->id);
  }
  const int F = g.frames();
  for (const auto& w : windows)
    for (int t = 0; t < cfg.window; ++t) {
      const bool edge = w.record->boundary[static_cast<std::size_t>(w.start + t)] != 0;
      g.weights.push_back(cfg.exclude_boundary && edge ? 0.0 : 1.0);
      g.mass.push_back(w.record->mass);
    }

  for (int ci = 0; ci < kin::kChannelCount; ++ci) {
    const auto c = static_cast<Channel>(ci);
    if (!g.has(c)) continue;
    const RowX mean = stat_row(store, c, "mean"), sd = stat_row(store, c, "std");
    if (c == Channel::Markers || c == Channel::Keypoints) {
      const int slot = c == Channel::Markers ? 0 : 1;
      std::vector<MatX> parts;
      Eigen::Index tokens = 0;
      int entities = -1;
      for (const auto& w : windows) {
        const MatX& m = w.record->at(c);
        const auto e = static_cast<int>(m.cols() / 9);
        if (c == Channel::Keypoints) {
          if (entities >= 0 && entities != e) throw ConfigError("keypoint count differs inside a group");
          entities = e;
        }
        for (int t = 0; t < cfg.window; ++t) g.segments[slot].push_back(e);
        tokens += static_cast<Eigen::Index>(e) * cfg.window;
        parts.push_back(m.middleRows(w.start, cfg.window));
      }
      if (c == Channel::Keypoints) g.keypoints = entities;
      MatX full(tokens, 9), accel(F, c == Channel::Keypoints ? 3 * entities : 0);
      Eigen::Index row = 0, frame = 0;
      for (const auto& p : parts)
        for (Eigen::Index t = 0; t < p.rows(); ++t, ++frame) {
          const Eigen::Index e = p.cols() / 9;
          for (Eigen::Index k = 0; k < e; ++k, ++row) {
            full.row(row) = (p.block(t, k * 9, 1, 9) - mean).cwiseQuotient(sd);
            if (c == Channel::Keypoints) accel.block(frame, k * 3, 1, 3) = full.block(row, 6, 1, 3);
          }
        }
      MatX tilde = cfg.tie_fdae_encoders ? full : MatX(full.leftCols(6));
      if (cfg.tie_fdae_encoders) tilde.rightCols(3).setZero();
      g.full[ci] = to_tensor(full);
      g.tilde[ci] = to_tensor(tilde);
      if (c == Channel::Keypoints) g.accel[ci] = to_tensor(accel);
      continue;
    }
    MatX rows(F, mean.size());
    Eigen::Index frame = 0;
    for (const auto& w : windows) {
      MatX block = w.record->at(c).middleRows(w.start, cfg.window);
      if (block.cols() != mean.size())
        throw ConfigError("sequence " + w.record->id + ": channel " + kin::channel_name(c) +
                          " does not match the model width");
      if (mass_normalized(c)) block /= w.record->mass;
      rows.middleRows(frame, cfg.window) = (block.rowwise() - mean).array().rowwise() / sd.array();
      frame += cfg.window;
    }
    g.full[ci] = to_tensor(rows);
    if (kin::is_kinematics(c)) {
      MatX tilde = cfg.tie_fdae_encoders ? rows : kin::without_acceleration(rows, c);
      if (cfg.tie_fdae_encoders)
        for (Eigen::Index j = 2; j < tilde.cols(); j += 3) tilde.col(j).setZero();
      g.tilde[ci] = to_tensor(tilde);
      g.accel[ci] = to_tensor(kin::acceleration_part(rows, c));
    }
  }
  return g;
}

Eigen::MatrixXd destandardize(const nc::ParameterStore& store, Channel c, const nc::Tensor& values) {
  const RowX mean = stat_row(store, c, "mean"), sd = stat_row(store, c, "std");
  const auto rows = static_cast<Eigen::Index>(values.rows()), cols = static_cast<Eigen::Index>(values.cols());
  if (cols != mean.size()) throw ShapeError(std::string("destandardize: width mismatch for ") + kin::channel_name(c));
  MatX out = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), rows, cols);
  return (out.array().rowwise() * sd.array()).rowwise() + mean.array();
}

}  // namespace hdys::model
