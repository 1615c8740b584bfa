#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hdys/numcore/params.hpp"

namespace hdys::nc {

struct AdamWHyper {
  double lr = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamWHyper&) const = default;
};

struct AdamWState {
  AdamWHyper hyper;
  std::uint64_t step = 0;
  std::map<std::string, std::vector<double>> first;   // m
  std::map<std::string, std::vector<double>> second;  // v

  bool operator==(const AdamWState&) const = default;
};

AdamWState adamw_init(const ParameterStore& params, const AdamWHyper& hyper);

/// Decoupled-weight-decay Adam update of every trainable parameter:
/// p <- p(1 - lr*wd) - lr * mhat / (sqrt(vhat) + eps). `lr_scale` multiplies
/// the learning rate for schedules.
void adamw_step(AdamWState& state, ParameterStore& params, const GradMap& grads, double lr_scale = 1.0);

}  // namespace hdys::nc
