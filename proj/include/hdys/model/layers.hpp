#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hdys/numcore/graph.hpp"
#include "hdys/numcore/params.hpp"

namespace hdys::model {

using nc::Var;

/// Parameter creation context.
struct Init {
  nc::ParameterStore& store;
  std::mt19937_64& rng;
};

void add_linear(Init& init, const std::string& name, int in, int out);
/// x W + b over rows of x.
Var linear(nc::Binding& b, const std::string& name, Var x);

/// Dense stack; `widths` = {in, hidden..., out}. GELU between layers.
void add_mlp(Init& init, const std::string& name, const std::vector<int>& widths);
Var mlp(nc::Binding& b, const std::string& name, Var x);

/// Pre-norm transformer encoder (attention + GELU feed-forward per layer,
/// final layer norm). No positional terms.
void add_transformer(Init& init, const std::string& name, int width, int ff, int layers);
/// `segments` partitions the rows into independent token sets.
Var transformer(nc::Binding& b, const std::string& name, Var x, int heads, const std::vector<std::int64_t>& segments);

/// Number of stacked layers under `name` (".l<i>." prefixes present).
int layer_count(const nc::ParameterStore& store, const std::string& name);

}  // namespace hdys::model
