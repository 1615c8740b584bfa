#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "hdys/numcore/graph.hpp"
#include "hdys/numcore/tensor.hpp"

namespace hdys::nc {

/// Gradient per parameter name.
using GradMap = std::map<std::string, Tensor>;

/// Named model tensors in insertion order. Entries flagged non-trainable
/// (data statistics) are saved with the model but never optimized.
class ParameterStore {
 public:
  void add(const std::string& name, Tensor value, bool trainable = true);
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  const Tensor& get(const std::string& name) const;
  void set(const std::string& name, Tensor value);
  bool trainable(const std::string& name) const;

  const std::vector<std::string>& names() const { return names_; }
  std::vector<std::string> trainable_names() const;
  /// Scalar count over trainable tensors.
  std::size_t parameter_count() const;
  bool identical(const ParameterStore& other) const;

 private:
  struct Entry {
    Tensor value;
    bool trainable;
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, Entry> index_;
};

/// Uniform fan-in scaled initializer, bound 1/sqrt(fan_in).
Tensor kaiming_uniform(Shape shape, std::size_t fan_in, std::mt19937_64& rng);

/// Binds store entries into one graph as leaves, once per name.
class Binding {
 public:
  Binding(Graph& graph, const ParameterStore& store) : graph_(graph), store_(store) {}

  Var operator()(const std::string& name);
  Graph& graph() { return graph_; }
  const ParameterStore& store() const { return store_; }
  /// Gradients for every trainable entry; unbound entries get zeros.
  GradMap collect(const Gradients& grads) const;

 private:
  Graph& graph_;
  const ParameterStore& store_;
  std::unordered_map<std::string, Var> bound_;
};

}  // namespace hdys::nc
