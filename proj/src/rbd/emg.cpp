#include "hdys/rbd/emg.hpp"

#include <cmath>
#include <random>

#include "hdys/common/error.hpp"

namespace hdys::rbd {

MatX synth_emg(const MatX& activations, double fps, std::uint64_t noise_seed, const EmgOptions& opt) {
  if (!(fps > 0.0)) throw ConfigError("synth_emg: fps must be positive");
  if (!(opt.time_constant > 0.0)) throw ConfigError("synth_emg: time constant must be positive");
  if (activations.size() > 0 && !(activations.minCoeff() >= 0.0 && activations.maxCoeff() <= 1.0))
    throw ConfigError("synth_emg: activations must lie in [0,1]");

  const double alpha = 1.0 - std::exp(-1.0 / (fps * opt.time_constant));
  MatX out(activations.rows(), activations.cols());
  if (activations.rows() == 0) return out;
  out.row(0) = activations.row(0);
  for (Eigen::Index t = 1; t < activations.rows(); ++t)
    out.row(t) = out.row(t - 1) + alpha * (activations.row(t - 1) - out.row(t - 1));
  if (!opt.noise) return out;

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index t = 0; t < out.rows(); ++t)
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const double mult = 1.0 + opt.multiplicative_sigma * normal(rng);
      const double add = opt.additive_sigma * normal(rng);
      out(t, c) = std::max(0.0, out(t, c) * mult + add);
    }
  return out;
}

}  // namespace hdys::rbd
