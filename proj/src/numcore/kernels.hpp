#pragma once

#include <span>
#include <vector>

#include "hdys/numcore/graph.hpp"

namespace hdys::nc::detail {

using Inputs = std::vector<const Tensor*>;

Tensor forward(OpKind kind, const Inputs& in, const Attrs& attrs, std::vector<double>& cache);

/// Gradient with respect to each input flagged in `need`; unflagged entries
/// are returned empty.
std::vector<std::vector<double>> backward(OpKind kind, const Inputs& in, const Tensor& out,
                                          std::span<const double> grad_out, const Attrs& attrs,
                                          const std::vector<double>& cache,
                                          const std::vector<bool>& need);

}  // namespace hdys::nc::detail
