#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hdys/numcore/graph.hpp"

namespace hdys::nc {

struct GradCheckEntry {
  std::string kernel;
  int trials = 0;
  double max_rel_error = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  double tolerance = 0.0;
  std::vector<GradCheckEntry> entries;
  bool pass() const;
};

/// Builds the kernel under test from leaf inputs.
using KernelBuilder = std::function<Var(Graph&, std::span<const Var>)>;

/// One randomized case: inputs plus the builder that consumes them.
struct GradCheckCase {
  std::vector<Tensor> inputs;
  KernelBuilder build;
};

/// Compares reverse-mode gradients of sum(kernel(x) * r), r a fixed random
/// weighting, against central differences with step `h`. The error per
/// entry is |analytic - numeric| / max(1, |analytic|, |numeric|).
double max_gradient_error(const GradCheckCase& c, std::mt19937_64& rng, double h = 1e-5);

/// Random 3-8 element cases drawn from [-2, 2] for a catalog kernel.
GradCheckCase random_case(OpKind kind, std::mt19937_64& rng);

GradCheckEntry grad_check(OpKind kind, int trials, double tolerance, std::uint64_t seed = 7);
GradCheckEntry grad_check(const std::string& label, const std::function<GradCheckCase(std::mt19937_64&)>& make,
                          int trials, double tolerance, std::uint64_t seed = 7);
/// Every catalog kernel.
GradCheckReport grad_check_all(int trials, double tolerance, std::uint64_t seed = 7);

}  // namespace hdys::nc
