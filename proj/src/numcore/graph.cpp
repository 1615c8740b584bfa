#include "hdys/numcore/graph.hpp"

#include <array>

#include "kernels.hpp"

namespace hdys::nc {
namespace {

constexpr std::array<std::pair<OpKind, std::string_view>, 19> kNames{{
    {OpKind::Leaf, "leaf"},
    {OpKind::MatMul, "matmul"},
    {OpKind::Add, "add"},
    {OpKind::Sub, "sub"},
    {OpKind::Mul, "mul"},
    {OpKind::Scale, "scale"},
    {OpKind::Sum, "sum"},
    {OpKind::Mean, "mean"},
    {OpKind::Concat, "concat"},
    {OpKind::Slice, "slice"},
    {OpKind::Transpose, "transpose"},
    {OpKind::Gelu, "gelu"},
    {OpKind::LayerNorm, "layernorm"},
    {OpKind::Softmax, "softmax"},
    {OpKind::Attention, "attention"},
    {OpKind::L1Distance, "l1"},
    {OpKind::LogSumExp, "logsumexp"},
    {OpKind::L2Normalize, "l2normalize"},
    {OpKind::Custom, "custom"},
}};

}  // namespace

std::string_view op_name(OpKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "?";
}

OpKind parse_op_kind(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  throw UnknownOpError("unknown operation kind '" + std::string(name) + "'");
}

const std::vector<OpKind>& catalog_kinds() {
  static const std::vector<OpKind> kinds = [] {
    std::vector<OpKind> out;
    for (const auto& [k, name] : kNames)
      if (k != OpKind::Leaf && k != OpKind::Custom) out.push_back(k);
    return out;
  }();
  return kinds;
}

double Attrs::real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
  throw ShapeError("attribute '" + key + "' is not a scalar");
}

std::int64_t Attrs::integer(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
  throw ShapeError("attribute '" + key + "' is not an integer");
}

std::vector<std::int64_t> Attrs::integers(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return {};
  if (const auto* v = std::get_if<std::vector<std::int64_t>>(&it->second)) return *v;
  throw ShapeError("attribute '" + key + "' is not an integer list");
}

std::vector<double> Attrs::reals(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return {};
  if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
  throw ShapeError("attribute '" + key + "' is not a real list");
}

const Tensor& Var::value() const {
  if (!valid()) throw GraphError("use of an unbound variable");
  return graph->value(*this);
}

const Tensor& Gradients::operator[](Var leaf) const {
  auto it = by_node_.find(leaf.id);
  if (it == by_node_.end()) throw GraphError("no gradient recorded for node " + std::to_string(leaf.id));
  return it->second;
}

void Graph::check_owned(Var v) const {
  if (v.graph != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
    throw GraphError("variable does not belong to this graph");
}

Var Graph::leaf(Tensor value, bool requires_grad) {
  if (consumed_) throw GraphError("graph already consumed by backward()");
  Node n;
  n.kind = OpKind::Leaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::apply(OpKind kind, std::span<const Var> inputs, const Attrs& attrs) {
  if (consumed_) throw GraphError("graph already consumed by backward()");
  if (kind == OpKind::Leaf || kind == OpKind::Custom)
    throw UnknownOpError("'" + std::string(op_name(kind)) + "' cannot be applied as a kernel");
  Node n;
  n.kind = kind;
  n.attrs = attrs;
  detail::Inputs values;
  for (Var v : inputs) {
    check_owned(v);
    n.parents.push_back(v.id);
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
    values.push_back(&nodes_[v.id].value);
  }
  n.value = detail::forward(kind, values, attrs, n.cache);
  if (!n.value.all_finite())
    throw NonFiniteError(std::string(op_name(kind)) + " produced a non-finite value");
  if (!n.requires_grad) n.cache.clear();
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::custom(std::span<const Var> inputs, Tensor output, CustomBackward backward) {
  if (consumed_) throw GraphError("graph already consumed by backward()");
  Node n;
  n.kind = OpKind::Custom;
  for (Var v : inputs) {
    check_owned(v);
    n.parents.push_back(v.id);
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  if (!output.all_finite()) throw NonFiniteError("custom kernel produced a non-finite value");
  n.value = std::move(output);
  n.custom = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

const Tensor& Graph::value(Var v) const {
  check_owned(v);
  return nodes_[v.id].value;
}

bool Graph::requires_grad(Var v) const {
  check_owned(v);
  return nodes_[v.id].requires_grad;
}

Gradients Graph::backward(Var root) {
  check_owned(root);
  if (consumed_) throw GraphError("graph already consumed by backward()");
  if (nodes_[root.id].value.size() != 1)
    throw ShapeError("backward root must be scalar, got " + shape_str(nodes_[root.id].value.shape()));
  consumed_ = true;

  std::vector<std::vector<double>> grad(nodes_.size());
  grad[root.id] = {1.0};
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || grad[id].empty() || n.kind == OpKind::Leaf) continue;
    std::vector<bool> need(n.parents.size());
    for (std::size_t i = 0; i < n.parents.size(); ++i) need[i] = nodes_[n.parents[i]].requires_grad;
    std::vector<std::vector<double>> pg;
    if (n.kind == OpKind::Custom) {
      std::vector<Tensor> ins;
      for (int p : n.parents) ins.push_back(nodes_[p].value);
      auto out = n.custom(ins, n.value, Tensor(n.value.shape(), grad[id]));
      if (out.size() != n.parents.size()) throw GraphError("custom backward returned wrong arity");
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].shape() != ins[i].shape()) throw ShapeError("custom backward gradient shape mismatch");
        pg.emplace_back(out[i].values().begin(), out[i].values().end());
      }
    } else {
      detail::Inputs ins;
      for (int p : n.parents) ins.push_back(&nodes_[p].value);
      pg = detail::backward(n.kind, ins, n.value, grad[id], n.attrs, n.cache, need);
    }
    for (std::size_t i = 0; i < n.parents.size(); ++i) {
      if (!need[i] || pg[i].empty()) continue;
      auto& dst = grad[n.parents[i]];
      if (dst.empty()) {
        dst = std::move(pg[i]);
      } else {
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += pg[i][j];
      }
    }
    grad[id].clear();
    grad[id].shrink_to_fit();
  }

  Gradients out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.kind != OpKind::Leaf || !n.requires_grad) continue;
    if (grad[id].empty())
      out.by_node_.emplace(static_cast<int>(id), Tensor::zeros(n.value.shape()));
    else
      out.by_node_.emplace(static_cast<int>(id), Tensor(n.value.shape(), std::move(grad[id])));
  }
  return out;
}

// Typed front-ends.

Var matmul(Var a, Var b) { return a.graph->apply(OpKind::MatMul, {a, b}); }
Var add(Var a, Var b) { return a.graph->apply(OpKind::Add, {a, b}); }
Var sub(Var a, Var b) { return a.graph->apply(OpKind::Sub, {a, b}); }
Var mul(Var a, Var b) { return a.graph->apply(OpKind::Mul, {a, b}); }
Var scale(Var a, double factor) { return a.graph->apply(OpKind::Scale, {a}, Attrs{{"factor", factor}}); }
Var sum(Var a) { return a.graph->apply(OpKind::Sum, {a}); }
Var mean_rows(Var a) { return a.graph->apply(OpKind::Mean, {a}); }

Var segment_mean(Var a, const std::vector<std::int64_t>& segments) {
  return a.graph->apply(OpKind::Mean, {a}, Attrs{{"segments", segments}});
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: needs at least one input");
  return parts.front().graph->apply(OpKind::Concat, parts);
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice_cols(Var a, std::int64_t begin, std::int64_t end) {
  return a.graph->apply(OpKind::Slice, {a}, Attrs{{"begin", begin}, {"end", end}});
}

Var transpose(Var a) { return a.graph->apply(OpKind::Transpose, {a}); }
Var gelu(Var a) { return a.graph->apply(OpKind::Gelu, {a}); }

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  return x.graph->apply(OpKind::LayerNorm, {x, gain, bias}, Attrs{{"eps", eps}});
}

Var softmax(Var a) { return a.graph->apply(OpKind::Softmax, {a}); }

Var attention(Var q, Var k, Var v, std::int64_t heads, const std::vector<std::int64_t>& segments) {
  Attrs attrs{{"heads", heads}};
  if (!segments.empty()) attrs.set("segments", segments);
  return q.graph->apply(OpKind::Attention, {q, k, v}, attrs);
}

Var l1_distance(Var pred, Var target, const std::vector<double>& row_weights) {
  Attrs attrs;
  if (!row_weights.empty()) attrs.set("row_weights", row_weights);
  return pred.graph->apply(OpKind::L1Distance, {pred, target}, attrs);
}

Var logsumexp(Var a) { return a.graph->apply(OpKind::LogSumExp, {a}); }
Var l2_normalize(Var a) { return a.graph->apply(OpKind::L2Normalize, {a}); }

}  // namespace hdys::nc
