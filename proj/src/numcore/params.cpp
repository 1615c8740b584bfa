#include "hdys/numcore/params.hpp"

#include <cmath>

namespace hdys::nc {

void ParameterStore::add(const std::string& name, Tensor value, bool trainable) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  names_.push_back(name);
  index_.emplace(name, Entry{std::move(value), trainable});
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second.value;
}

void ParameterStore::set(const std::string& name, Tensor value) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  if (it->second.value.shape() != value.shape())
    throw ShapeError("parameter '" + name + "' shape " + shape_str(it->second.value.shape()) +
                     " cannot take " + shape_str(value.shape()));
  it->second.value = std::move(value);
}

bool ParameterStore::trainable(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second.trainable;
}

std::vector<std::string> ParameterStore::trainable_names() const {
  std::vector<std::string> out;
  for (const auto& n : names_)
    if (index_.at(n).trainable) out.push_back(n);
  return out;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : index_)
    if (e.trainable) n += e.value.size();
  return n;
}

bool ParameterStore::identical(const ParameterStore& other) const {
  if (names_ != other.names_) return false;
  for (const auto& n : names_) {
    const auto& a = index_.at(n);
    const auto& b = other.index_.at(n);
    if (a.trainable != b.trainable || !a.value.identical(b.value)) return false;
  }
  return true;
}

Tensor kaiming_uniform(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v));
}

Var Binding::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var v = graph_.leaf(store_.get(name), store_.trainable(name));
  bound_.emplace(name, v);
  return v;
}

GradMap Binding::collect(const Gradients& grads) const {
  GradMap out;
  for (const auto& name : store_.trainable_names()) {
    auto it = bound_.find(name);
    if (it != bound_.end() && grads.contains(it->second))
      out.emplace(name, grads[it->second]);
    else
      out.emplace(name, Tensor::zeros(store_.get(name).shape()));
  }
  return out;
}

}  // namespace hdys::nc
