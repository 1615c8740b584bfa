#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdys/kinrep/record.hpp"

namespace hdys::data {

enum class MotionFamily { PeriodicGait, Reach, RandomSpline };

const char* family_name(MotionFamily f);
MotionFamily parse_family(const std::string& name);

struct MotionRanges {
  double amplitude_min = 0.1;  // rad
  double amplitude_max = 0.4;
  double frequency_min = 0.6;  // Hz
  double frequency_max = 1.4;
};

/// A closed-form joint trajectory drawn once from a seed; it can be sampled
/// at any rate, which the rollout benchmark relies on.
class MotionModel {
 public:
  MotionModel(MotionFamily family, const MotionRanges& ranges, int dof, double duration, std::uint64_t seed);

  /// q, qd, qdd at t = 0, 1/fps, ... for floor(duration * fps) frames.
  kin::Trajectory sample(double fps) const;
  int frames(double fps) const;
  double duration() const { return duration_; }

 private:
  struct Wave {
    int joint;
    double amplitude, omega, phase;
  };
  struct Segment {
    double start, length;
    std::vector<double> from, to;
  };
  void evaluate(double t, double* q, double* qd, double* qdd) const;

  MotionFamily family_;
  int dof_;
  double duration_;
  std::vector<double> offset_;
  std::vector<Wave> waves_;
  std::vector<Segment> segments_;
};

}  // namespace hdys::data
