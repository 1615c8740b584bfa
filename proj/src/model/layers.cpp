#include "hdys/model/layers.hpp"

namespace hdys::model {
namespace {

std::string layer(const std::string& name, int i) { return name + ".l" + std::to_string(i); }

void add_norm(Init& init, const std::string& name, int width) {
  init.store.add(name + ".g", nc::Tensor::filled({1, static_cast<std::size_t>(width)}, 1.0));
  init.store.add(name + ".b", nc::Tensor::zeros({1, static_cast<std::size_t>(width)}));
}

Var norm(nc::Binding& b, const std::string& name, Var x) { return nc::layer_norm(x, b(name + ".g"), b(name + ".b")); }

}  // namespace

void add_linear(Init& init, const std::string& name, int in, int out) {
  const auto i = static_cast<std::size_t>(in), o = static_cast<std::size_t>(out);
  init.store.add(name + ".w", nc::kaiming_uniform({i, o}, i, init.rng));
  init.store.add(name + ".b", nc::Tensor::zeros({1, o}));
}

Var linear(nc::Binding& b, const std::string& name, Var x) {
  return nc::add(nc::matmul(x, b(name + ".w")), b(name + ".b"));
}

int layer_count(const nc::ParameterStore& store, const std::string& name) {
  int n = 0;
  while (store.contains(layer(name, n) + ".w") || store.contains(layer(name, n) + ".ln1.g")) ++n;
  return n;
}

void add_mlp(Init& init, const std::string& name, const std::vector<int>& widths) {
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    add_linear(init, layer(name, static_cast<int>(i)), widths[i], widths[i + 1]);
}

Var mlp(nc::Binding& b, const std::string& name, Var x) {
  const int n = layer_count(b.store(), name);
  for (int i = 0; i < n; ++i) {
    x = linear(b, layer(name, i), x);
    if (i + 1 < n) x = nc::gelu(x);
  }
  return x;
}

void add_transformer(Init& init, const std::string& name, int width, int ff, int layers) {
  for (int i = 0; i < layers; ++i) {
    const auto l = layer(name, i);
    add_norm(init, l + ".ln1", width);
    add_linear(init, l + ".qkv", width, 3 * width);
    add_linear(init, l + ".out", width, width);
    add_norm(init, l + ".ln2", width);
    add_linear(init, l + ".ff1", width, ff);
    add_linear(init, l + ".ff2", ff, width);
  }
  add_norm(init, name + ".lnf", width);
}

Var transformer(nc::Binding& b, const std::string& name, Var x, int heads, const std::vector<std::int64_t>& segments) {
  const int n = layer_count(b.store(), name);
  const auto w = static_cast<std::int64_t>(x.shape().back());
  for (int i = 0; i < n; ++i) {
    const auto l = layer(name, i);
    const Var qkv = linear(b, l + ".qkv", norm(b, l + ".ln1", x));
    const Var att = nc::attention(nc::slice_cols(qkv, 0, w), nc::slice_cols(qkv, w, 2 * w),
                                  nc::slice_cols(qkv, 2 * w, 3 * w), heads, segments);
    x = nc::add(x, linear(b, l + ".out", att));
    x = nc::add(x, linear(b, l + ".ff2", nc::gelu(linear(b, l + ".ff1", norm(b, l + ".ln2", x)))));
  }
  return norm(b, name + ".lnf", x);
}

}  // namespace hdys::model
