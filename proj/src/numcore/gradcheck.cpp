#include "hdys/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hdys::nc {
namespace {

Tensor uniform(Shape shape, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v));
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Rows x cols with 3..8 elements.
Shape small_matrix(std::mt19937_64& rng) {
  for (;;) {
    std::size_t r = pick(rng, 1, 4), c = pick(rng, 1, 4);
    if (r * c >= 3 && r * c <= 8) return {r, c};
  }
}

double weighted_sum(const GradCheckCase& c, const std::vector<Tensor>& inputs, const Tensor& weights) {
  Graph g;
  std::vector<Var> leaves;
  for (const auto& t : inputs) leaves.push_back(g.constant(t));
  Var out = c.build(g, leaves);
  const Tensor& y = out.value();
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * weights[i];
  return s;
}

}  // namespace

bool GradCheckReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

double max_gradient_error(const GradCheckCase& c, std::mt19937_64& rng, double h) {
  Graph g;
  std::vector<Var> leaves;
  for (const auto& t : c.inputs) leaves.push_back(g.leaf(t, true));
  Var out = c.build(g, leaves);
  const Tensor weights = uniform(out.shape(), rng, -1.0, 1.0);
  Var root = sum(mul(out, g.constant(weights)));
  Gradients grads = g.backward(root);

  double worst = 0.0;
  for (std::size_t k = 0; k < c.inputs.size(); ++k) {
    const Tensor& analytic = grads[leaves[k]];
    for (std::size_t i = 0; i < c.inputs[k].size(); ++i) {
      auto perturbed = [&](double delta) {
        std::vector<Tensor> ins = c.inputs;
        std::vector<double> v(ins[k].values().begin(), ins[k].values().end());
        v[i] += delta;
        ins[k] = Tensor(ins[k].shape(), std::move(v));
        return weighted_sum(c, ins, weights);
      };
      const double numeric = (perturbed(h) - perturbed(-h)) / (2.0 * h);
      const double a = analytic[i];
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

GradCheckCase random_case(OpKind kind, std::mt19937_64& rng) {
  GradCheckCase c;
  auto unary = [&](auto fn) {
    c.inputs = {uniform(small_matrix(rng), rng)};
    c.build = [fn](Graph&, std::span<const Var> x) { return fn(x[0]); };
  };
  switch (kind) {
    case OpKind::MatMul: {
      std::size_t r = pick(rng, 1, 3), k = pick(rng, 2, 3), n = pick(rng, 2, 3);
      c.inputs = {uniform({r, k}, rng), uniform({k, n}, rng)};
      c.build = [](Graph&, std::span<const Var> x) { return matmul(x[0], x[1]); };
      break;
    }
    case OpKind::Add: {
      Shape s = small_matrix(rng);
      if (s[0] > 1 && pick(rng, 0, 1) == 1)
        c.inputs = {uniform(s, rng), uniform({s[1]}, rng)};
      else
        c.inputs = {uniform(s, rng), uniform(s, rng)};
      c.build = [](Graph&, std::span<const Var> x) { return add(x[0], x[1]); };
      break;
    }
    case OpKind::Sub:
    case OpKind::Mul: {
      Shape s = small_matrix(rng);
      c.inputs = {uniform(s, rng), uniform(s, rng)};
      if (kind == OpKind::Sub)
        c.build = [](Graph&, std::span<const Var> x) { return sub(x[0], x[1]); };
      else
        c.build = [](Graph&, std::span<const Var> x) { return mul(x[0], x[1]); };
      break;
    }
    case OpKind::Scale: {
      const double f = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
      unary([f](Var x) { return scale(x, f); });
      break;
    }
    case OpKind::Sum:
      unary([](Var x) { return sum(x); });
      break;
    case OpKind::Mean: {
      std::size_t r = pick(rng, 2, 4), cols = pick(rng, 2, 2);
      c.inputs = {uniform({r, cols}, rng)};
      std::vector<std::int64_t> seg;
      if (pick(rng, 0, 1) == 1) {
        const auto first = static_cast<std::int64_t>(pick(rng, 1, r - 1));
        seg = {first, static_cast<std::int64_t>(r) - first};
      }
      c.build = [seg](Graph&, std::span<const Var> x) { return seg.empty() ? mean_rows(x[0]) : segment_mean(x[0], seg); };
      break;
    }
    case OpKind::Concat: {
      std::size_t r = pick(rng, 1, 2);
      c.inputs = {uniform({r, pick(rng, 1, 3)}, rng), uniform({r, pick(rng, 1, 2)}, rng), uniform({r, pick(rng, 1, 2)}, rng)};
      c.build = [](Graph&, std::span<const Var> x) { return concat(x); };
      break;
    }
    case OpKind::Slice: {
      std::size_t r = pick(rng, 1, 2), cols = pick(rng, 3, 4);
      c.inputs = {uniform({r, cols}, rng)};
      const auto b = static_cast<std::int64_t>(pick(rng, 0, cols - 2));
      const auto e = static_cast<std::int64_t>(pick(rng, static_cast<std::size_t>(b) + 1, cols));
      c.build = [b, e](Graph&, std::span<const Var> x) { return slice_cols(x[0], b, e); };
      break;
    }
    case OpKind::Transpose:
      unary([](Var x) { return transpose(x); });
      break;
    case OpKind::Gelu:
      unary([](Var x) { return gelu(x); });
      break;
    case OpKind::LayerNorm: {
      std::size_t r = pick(rng, 1, 2), cols = pick(rng, 3, 4);
      c.inputs = {uniform({r, cols}, rng), uniform({cols}, rng), uniform({cols}, rng)};
      c.build = [](Graph&, std::span<const Var> x) { return layer_norm(x[0], x[1], x[2]); };
      break;
    }
    case OpKind::Softmax:
      unary([](Var x) { return softmax(x); });
      break;
    case OpKind::Attention: {
      const std::size_t n = pick(rng, 2, 4), d = 4;
      c.inputs = {uniform({n, d}, rng), uniform({n, d}, rng), uniform({n, d}, rng)};
      std::vector<std::int64_t> seg;
      if (n > 2 && pick(rng, 0, 1) == 1) seg = {1, static_cast<std::int64_t>(n) - 1};
      const auto heads = static_cast<std::int64_t>(pick(rng, 1, 2));
      c.build = [seg, heads](Graph&, std::span<const Var> x) { return attention(x[0], x[1], x[2], heads, seg); };
      break;
    }
    case OpKind::L1Distance: {
      Shape s = small_matrix(rng);
      Tensor p = uniform(s, rng);
      // keep every difference away from the kink so central differences apply
      std::vector<double> t(p.values().begin(), p.values().end());
      std::uniform_real_distribution<double> off(0.05, 1.0);
      for (double& v : t) v += (pick(rng, 0, 1) ? 1.0 : -1.0) * off(rng);
      std::vector<double> w(s[0]);
      for (double& v : w) v = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
      c.inputs = {p, Tensor(s, std::move(t))};
      c.build = [w](Graph&, std::span<const Var> x) { return l1_distance(x[0], x[1], w); };
      break;
    }
    case OpKind::LogSumExp:
      unary([](Var x) { return logsumexp(x); });
      break;
    case OpKind::L2Normalize:
      unary([](Var x) { return l2_normalize(x); });
      break;
    case OpKind::Leaf:
    case OpKind::Custom:
      throw UnknownOpError("'" + std::string(op_name(kind)) + "' is not a catalog kernel");
  }
  return c;
}

GradCheckEntry grad_check(const std::string& label, const std::function<GradCheckCase(std::mt19937_64&)>& make,
                          int trials, double tolerance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradCheckEntry e;
  e.kernel = label;
  e.trials = trials;
  for (int t = 0; t < trials; ++t) e.max_rel_error = std::max(e.max_rel_error, max_gradient_error(make(rng), rng));
  e.pass = e.max_rel_error <= tolerance;
  return e;
}

GradCheckEntry grad_check(OpKind kind, int trials, double tolerance, std::uint64_t seed) {
  return grad_check(std::string(op_name(kind)), [kind](std::mt19937_64& rng) { return random_case(kind, rng); },
                    trials, tolerance, seed);
}

GradCheckReport grad_check_all(int trials, double tolerance, std::uint64_t seed) {
  GradCheckReport report;
  report.tolerance = tolerance;
  for (OpKind k : catalog_kinds()) report.entries.push_back(grad_check(k, trials, tolerance, seed));
  return report;
}

}  // namespace hdys::nc
