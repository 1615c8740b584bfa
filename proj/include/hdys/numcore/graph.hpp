#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "hdys/common/error.hpp"
#include "hdys/numcore/tensor.hpp"

namespace hdys::nc {

/// Kernel catalog. Every kind except Leaf and Custom is covered by grad_check.
enum class OpKind {
  Leaf,
  MatMul,
  Add,
  Sub,
  Mul,
  Scale,
  Sum,
  Mean,
  Concat,
  Slice,
  Transpose,
  Gelu,
  LayerNorm,
  Softmax,
  Attention,
  L1Distance,
  LogSumExp,
  L2Normalize,
  Custom,
};

class UnknownOpError : public Error {
 public:
  using Error::Error;
};

std::string_view op_name(OpKind kind);
OpKind parse_op_kind(std::string_view name);
inline std::ostream& operator<<(std::ostream& os, OpKind kind) { return os << op_name(kind); }
/// Differentiable catalog kernels, in declaration order.
const std::vector<OpKind>& catalog_kinds();

using AttrValue = std::variant<double, std::int64_t, std::vector<std::int64_t>, std::vector<double>>;

class Attrs {
 public:
  Attrs() = default;
  Attrs(std::initializer_list<std::pair<const std::string, AttrValue>> init) : values_(init) {}

  Attrs& set(const std::string& key, AttrValue value) {
    values_[key] = std::move(value);
    return *this;
  }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  double real(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::vector<std::int64_t> integers(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;

 private:
  std::map<std::string, AttrValue> values_;
};

class Graph;

/// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Result of a backward pass: one gradient per leaf that requires grad.
class Gradients {
 public:
  const Tensor& operator[](Var leaf) const;
  bool contains(Var leaf) const { return by_node_.count(leaf.id) > 0; }
  std::size_t size() const { return by_node_.size(); }

 private:
  friend class Graph;
  std::unordered_map<int, Tensor> by_node_;
};

/// Tape of operation records in creation (topological) order. A graph is
/// single-use: backward() consumes it.
class Graph {
 public:
  /// Receives the forward inputs, the forward output and the output
  /// gradient; returns one gradient per input (same shapes).
  using CustomBackward = std::function<std::vector<Tensor>(
      const std::vector<Tensor>& inputs, const Tensor& output, const Tensor& grad_out)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Runs kernel `kind` forward and records it.
  Var apply(OpKind kind, std::span<const Var> inputs, const Attrs& attrs = {});
  Var apply(OpKind kind, std::initializer_list<Var> inputs, const Attrs& attrs = {}) {
    return apply(kind, std::span<const Var>(inputs.begin(), inputs.size()), attrs);
  }

  /// Records a user-supplied kernel whose forward value is already computed.
  Var custom(std::span<const Var> inputs, Tensor output, CustomBackward backward);

  Gradients backward(Var root);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    OpKind kind = OpKind::Leaf;
    std::vector<int> parents;
    Tensor value;
    Attrs attrs;
    bool requires_grad = false;
    std::vector<double> cache;
    CustomBackward custom;
  };

  void check_owned(Var v) const;

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// Typed front-ends over Graph::apply. All operands must belong to one graph.

Var matmul(Var a, Var b);
/// Element-wise sum; `b` may also be a length-cols row broadcast over `a`.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// Sum of all entries, shape [1].
Var sum(Var a);
/// Mean over rows, shape [1, cols].
Var mean_rows(Var a);
/// Mean over consecutive row segments of the given lengths, shape [segments, cols].
Var segment_mean(Var a, const std::vector<std::int64_t>& segments);
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
/// Columns [begin, end) of the trailing axis.
Var slice_cols(Var a, std::int64_t begin, std::int64_t end);
Var transpose(Var a);
Var gelu(Var a);
/// Normalizes each row; gain and bias have length cols.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
Var softmax(Var a);
/// Multi-head scaled dot-product attention on projected queries, keys and
/// values [tokens, width]. Tokens attend only within their segment.
Var attention(Var q, Var k, Var v, std::int64_t heads, const std::vector<std::int64_t>& segments);
/// Weighted mean absolute difference, shape [1]. Row weights default to 1.
Var l1_distance(Var pred, Var target, const std::vector<double>& row_weights = {});
/// Row-wise log-sum-exp, shape [rows, 1].
Var logsumexp(Var a);
Var l2_normalize(Var a);

}  // namespace hdys::nc
