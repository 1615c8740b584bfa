#include "hdys/numcore/adamw.hpp"

#include <cmath>

namespace hdys::nc {

AdamWState adamw_init(const ParameterStore& params, const AdamWHyper& hyper) {
  AdamWState s;
  s.hyper = hyper;
  for (const auto& name : params.trainable_names()) {
    const std::size_t n = params.get(name).size();
    s.first.emplace(name, std::vector<double>(n, 0.0));
    s.second.emplace(name, std::vector<double>(n, 0.0));
  }
  return s;
}

void adamw_step(AdamWState& state, ParameterStore& params, const GradMap& grads, double lr_scale) {
  const auto names = params.trainable_names();
  for (const auto& name : names) {
    auto g = grads.find(name);
    if (g == grads.end()) throw ShapeError("adamw: missing gradient for '" + name + "'");
    if (g->second.shape() != params.get(name).shape())
      throw ShapeError("adamw: gradient shape " + shape_str(g->second.shape()) + " for '" + name +
                       "' of shape " + shape_str(params.get(name).shape()));
    auto m = state.first.find(name);
    if (m == state.first.end() || m->second.size() != g->second.size())
      throw ShapeError("adamw: moment accumulator does not match '" + name + "'");
  }

  state.step += 1;
  const auto& h = state.hyper;
  const double lr = h.lr * lr_scale;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (const auto& name : names) {
    const Tensor& p = params.get(name);
    const Tensor& g = grads.at(name);
    auto& m = state.first.at(name);
    auto& v = state.second.at(name);
    std::vector<double> next(p.values().begin(), p.values().end());
    for (std::size_t i = 0; i < next.size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      next[i] *= 1.0 - lr * h.weight_decay;
      next[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + h.eps);
    }
    params.set(name, Tensor(p.shape(), std::move(next)));
  }
}

}  // namespace hdys::nc
