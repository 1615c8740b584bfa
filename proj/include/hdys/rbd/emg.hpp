#pragma once

#include <cstdint>

#include "hdys/rbd/tree.hpp"

namespace hdys::rbd {

struct EmgOptions {
  double time_constant = 0.04;  // s
  double multiplicative_sigma = 0.1;
  double additive_sigma = 0.02;
  bool noise = true;
};

/// Rows are frames, columns are channels. Each channel is a first-order
/// low-pass of the activation, started at the first sample, with Gaussian
/// noise and a clamp at zero.
MatX synth_emg(const MatX& activations, double fps, std::uint64_t noise_seed, const EmgOptions& opt = {});

}  // namespace hdys::rbd
