#include "hdys/datahub/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hdys/common/error.hpp"

namespace hdys::data {

const char* family_name(MotionFamily f) {
  switch (f) {
    case MotionFamily::PeriodicGait: return "periodic-gait-like";
    case MotionFamily::Reach: return "reach-like";
    case MotionFamily::RandomSpline: return "random-smooth-spline";
  }
  return "?";
}

MotionFamily parse_family(const std::string& name) {
  for (auto f : {MotionFamily::PeriodicGait, MotionFamily::Reach, MotionFamily::RandomSpline})
    if (name == family_name(f)) return f;
  throw ConfigError("unknown motion family '" + name + "'");
}

MotionModel::MotionModel(MotionFamily family, const MotionRanges& ranges, int dof, double duration, std::uint64_t seed)
    : family_(family), dof_(dof), duration_(duration) {
  if (dof <= 0 || !(duration > 0.0)) throw ConfigError("motion model needs positive DoF and duration");
  if (!(ranges.amplitude_min >= 0.0 && ranges.amplitude_max >= ranges.amplitude_min && ranges.frequency_min > 0.0 &&
        ranges.frequency_max >= ranges.frequency_min))
    throw ConfigError("invalid motion ranges");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double two_pi = 2.0 * std::numbers::pi;
  offset_.resize(dof);
  for (double& o : offset_) o = uniform(-0.5, 0.5) * ranges.amplitude_max;

  switch (family) {
    case MotionFamily::PeriodicGait: {
      // Shared stride frequency, fundamental plus second harmonic per joint.
      const double f = uniform(ranges.frequency_min, ranges.frequency_max);
      for (int j = 0; j < dof; ++j) {
        const double a = uniform(ranges.amplitude_min, ranges.amplitude_max);
        const double p = uniform(0.0, two_pi);
        waves_.push_back({j, a, two_pi * f, p});
        waves_.push_back({j, 0.25 * a * unit(rng), 2 * two_pi * f, uniform(0.0, two_pi)});
      }
      break;
    }
    case MotionFamily::RandomSpline: {
      for (int j = 0; j < dof; ++j)
        for (int k = 0; k < 3; ++k)
          waves_.push_back({j, uniform(ranges.amplitude_min, ranges.amplitude_max) / 2.0,
                            two_pi * uniform(ranges.frequency_min, ranges.frequency_max), uniform(0.0, two_pi)});
      break;
    }
    case MotionFamily::Reach: {
      // Minimum-jerk moves between random postures; segment length is one
      // period of a draw from the frequency range.
      std::vector<double> posture(dof);
      for (double& p : posture) p = uniform(-1.0, 1.0) * ranges.amplitude_max;
      double t = 0.0;
      while (t < duration) {
        const double len = 1.0 / uniform(ranges.frequency_min, ranges.frequency_max);
        std::vector<double> next(dof);
        for (double& p : next) p = uniform(-1.0, 1.0) * ranges.amplitude_max;
        segments_.push_back({t, len, posture, next});
        posture = next;
        t += len;
      }
      std::fill(offset_.begin(), offset_.end(), 0.0);
      break;
    }
  }
}

int MotionModel::frames(double fps) const {
  return std::max(3, static_cast<int>(std::floor(duration_ * fps + 1e-9)));
}

void MotionModel::evaluate(double t, double* q, double* qd, double* qdd) const {
  for (int j = 0; j < dof_; ++j) {
    q[j] = offset_[j];
    qd[j] = qdd[j] = 0.0;
  }
  for (const auto& w : waves_) {
    const double s = std::sin(w.omega * t + w.phase), c = std::cos(w.omega * t + w.phase);
    q[w.joint] += w.amplitude * s;
    qd[w.joint] += w.amplitude * w.omega * c;
    qdd[w.joint] -= w.amplitude * w.omega * w.omega * s;
  }
  if (segments_.empty()) return;
  std::size_t k = 0;
  while (k + 1 < segments_.size() && t >= segments_[k + 1].start) ++k;
  const auto& seg = segments_[k];
  const double u = std::clamp((t - seg.start) / seg.length, 0.0, 1.0);
  const double s = u * u * u * (10 - 15 * u + 6 * u * u);
  const double ds = 30 * u * u * (1 - u) * (1 - u) / seg.length;
  const double dds = 60 * u * (1 - u) * (1 - 2 * u) / (seg.length * seg.length);
  for (int j = 0; j < dof_; ++j) {
    const double delta = seg.to[j] - seg.from[j];
    q[j] += seg.from[j] + delta * s;
    qd[j] += delta * ds;
    qdd[j] += delta * dds;
  }
}

kin::Trajectory MotionModel::sample(double fps) const {
  if (!(fps > 0.0)) throw ConfigError("motion sampling rate must be positive");
  const int n = frames(fps);
  kin::Trajectory tr{kin::MatX(n, dof_), kin::MatX(n, dof_), kin::MatX(n, dof_)};
  std::vector<double> q(dof_), qd(dof_), qdd(dof_);
  for (int t = 0; t < n; ++t) {
    evaluate(t / fps, q.data(), qd.data(), qdd.data());
    for (int j = 0; j < dof_; ++j) {
      tr.q(t, j) = q[j];
      tr.qd(t, j) = qd[j];
      tr.qdd(t, j) = qdd[j];
    }
  }
  return tr;
}

}  // namespace hdys::data
