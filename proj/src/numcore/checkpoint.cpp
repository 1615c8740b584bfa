#include "hdys/numcore/checkpoint.hpp"

#include "hdys/common/binary.hpp"
#include "hdys/common/util.hpp"

namespace hdys::nc {
namespace {
constexpr std::string_view kMagic = "HDYS1";
constexpr std::string_view kOptMagic = "ADAMW";
}  // namespace

std::string encode_checkpoint(const ParameterStore& params, const AdamWState& optimizer) {
  ByteWriter w;
  w.raw(kMagic);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.names().size()));
  for (const auto& name : params.names()) {
    const Tensor& t = params.get(name);
    w.str(name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) w.put<std::uint64_t>(e);
    w.doubles(t.data(), t.size());
  }
  w.raw(kOptMagic);
  const auto& h = optimizer.hyper;
  w.put<std::uint64_t>(optimizer.step);
  for (double x : {h.lr, h.weight_decay, h.beta1, h.beta2, h.eps}) w.put<double>(x);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(optimizer.first.size()));
  for (const auto& [name, m] : optimizer.first) {
    const auto& v = optimizer.second.at(name);
    w.str(name);
    w.put<std::uint64_t>(m.size());
    w.doubles(m.data(), m.size());
    w.doubles(v.data(), v.size());
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic)
    throw FormatError("not a checkpoint: magic mismatch (expected HDYS1)");
  Checkpoint ck;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const auto rank = r.get<std::uint32_t>();
    if (rank == 0 || rank > 8) throw FormatError("checkpoint: bad rank for '" + name + "'");
    Shape shape(rank);
    for (auto& e : shape) e = static_cast<std::size_t>(r.get<std::uint64_t>());
    std::vector<double> values(shape_size(shape));
    r.doubles(values.data(), values.size());
    const bool trainable = !name.starts_with(kStatPrefix);
    ck.params.add(name, Tensor(std::move(shape), std::move(values)), trainable);
  }
  if (r.raw(kOptMagic.size()) != kOptMagic) throw FormatError("checkpoint: optimizer block missing");
  auto& h = ck.optimizer.hyper;
  ck.optimizer.step = r.get<std::uint64_t>();
  h.lr = r.get<double>();
  h.weight_decay = r.get<double>();
  h.beta1 = r.get<double>();
  h.beta2 = r.get<double>();
  h.eps = r.get<double>();
  const auto n_opt = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_opt; ++i) {
    std::string name = r.str();
    const auto n = static_cast<std::size_t>(r.get<std::uint64_t>());
    if (!ck.params.contains(name) || ck.params.get(name).size() != n)
      throw FormatError("checkpoint: optimizer moments do not match parameter '" + name + "'");
    std::vector<double> m(n), v(n);
    r.doubles(m.data(), n);
    r.doubles(v.data(), n);
    ck.optimizer.first.emplace(name, std::move(m));
    ck.optimizer.second.emplace(name, std::move(v));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params, const AdamWState& optimizer) {
  write_file_atomic(path, encode_checkpoint(params, optimizer));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace hdys::nc
