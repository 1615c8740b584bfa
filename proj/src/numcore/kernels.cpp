#include "kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace hdys::nc::detail {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using StridedConst = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using StridedMut = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;

void require(bool ok, OpKind kind, const std::string& detail) {
  if (!ok) throw ShapeError(std::string(op_name(kind)) + ": " + detail);
}

std::string shapes_of(const Inputs& in) {
  std::string s;
  for (std::size_t i = 0; i < in.size(); ++i) s += (i ? " x " : "") + shape_str(in[i]->shape());
  return s;
}

void require_arity(OpKind kind, const Inputs& in, std::size_t n) {
  require(in.size() == n, kind, "expected " + std::to_string(n) + " inputs, got " + std::to_string(in.size()));
}

bool is_row_broadcast(const Tensor& a, const Tensor& b) {
  return b.rows() == 1 && b.cols() == a.cols() && a.rows() > 1;
}

std::vector<std::int64_t> resolve_segments(OpKind kind, const Attrs& attrs, std::size_t rows) {
  std::vector<std::int64_t> seg = attrs.integers("segments");
  if (seg.empty()) return {static_cast<std::int64_t>(rows)};
  std::int64_t total = 0;
  for (auto s : seg) {
    require(s > 0, kind, "segment lengths must be positive");
    total += s;
  }
  require(total == static_cast<std::int64_t>(rows), kind,
          "segments cover " + std::to_string(total) + " rows, input has " + std::to_string(rows));
  return seg;
}

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_slope(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

// Row-wise softmax in place over an r x c block.
void softmax_rows(double* p, std::size_t r, std::size_t c, std::size_t stride) {
  for (std::size_t i = 0; i < r; ++i) {
    double* row = p + i * stride;
    double m = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      row[j] = std::exp(row[j] - m);
      z += row[j];
    }
    for (std::size_t j = 0; j < c; ++j) row[j] /= z;
  }
}

}  // namespace

Tensor forward(OpKind kind, const Inputs& in, const Attrs& attrs, std::vector<double>& cache) {
  switch (kind) {
    case OpKind::MatMul: {
      require_arity(kind, in, 2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows(), kind, "shape mismatch " + shapes_of(in));
      std::vector<double> out(a.rows() * b.cols());
      MutMap(out.data(), a.rows(), b.cols()).noalias() =
          ConstMap(a.data(), a.rows(), a.cols()) * ConstMap(b.data(), b.rows(), b.cols());
      return Tensor::matrix(a.rows(), b.cols(), std::move(out));
    }
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Mul: {
      require_arity(kind, in, 2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      std::vector<double> out(a.size());
      if (a.shape() == b.shape()) {
        for (std::size_t i = 0; i < out.size(); ++i)
          out[i] = kind == OpKind::Add ? a[i] + b[i] : kind == OpKind::Sub ? a[i] - b[i] : a[i] * b[i];
      } else {
        require(kind == OpKind::Add && is_row_broadcast(a, b), kind, "shape mismatch " + shapes_of(in));
        const std::size_t c = a.cols(), r = a.rows();
        const double* pa = a.data();
        const double* pb = b.data();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) out[i * c + j] = pa[i * c + j] + pb[j];
      }
      return Tensor(a.shape(), std::move(out));
    }
    case OpKind::Scale: {
      require_arity(kind, in, 1);
      const double f = attrs.real("factor", 1.0);
      std::vector<double> out(in[0]->values().begin(), in[0]->values().end());
      for (double& v : out) v *= f;
      return Tensor(in[0]->shape(), std::move(out));
    }
    case OpKind::Sum: {
      require_arity(kind, in, 1);
      double s = 0.0;
      for (double v : in[0]->values()) s += v;
      return Tensor::scalar(s);
    }
    case OpKind::Mean: {
      require_arity(kind, in, 1);
      const Tensor& a = *in[0];
      const auto seg = resolve_segments(kind, attrs, a.rows());
      const std::size_t c = a.cols();
      std::vector<double> out(seg.size() * c, 0.0);
      std::size_t row = 0;
      for (std::size_t s = 0; s < seg.size(); ++s) {
        for (std::int64_t i = 0; i < seg[s]; ++i, ++row)
          for (std::size_t j = 0; j < c; ++j) out[s * c + j] += a[row * c + j];
        for (std::size_t j = 0; j < c; ++j) out[s * c + j] /= static_cast<double>(seg[s]);
      }
      return Tensor::matrix(seg.size(), c, std::move(out));
    }
    case OpKind::Concat: {
      require(!in.empty(), kind, "needs at least one input");
      const std::size_t r = in[0]->rows();
      std::size_t total = 0;
      for (const Tensor* t : in) {
        require(t->rows() == r, kind, "row mismatch " + shapes_of(in));
        total += t->cols();
      }
      std::vector<double> out(r * total);
      std::size_t offset = 0;
      for (const Tensor* t : in) {
        const std::size_t c = t->cols();
        for (std::size_t i = 0; i < r; ++i)
          std::copy_n(t->data() + i * c, c, out.data() + i * total + offset);
        offset += c;
      }
      return Tensor::matrix(r, total, std::move(out));
    }
    case OpKind::Slice: {
      require_arity(kind, in, 1);
      const Tensor& a = *in[0];
      const auto b = attrs.integer("begin", 0);
      const auto e = attrs.integer("end", static_cast<std::int64_t>(a.cols()));
      require(0 <= b && b < e && e <= static_cast<std::int64_t>(a.cols()), kind,
              "range [" + std::to_string(b) + "," + std::to_string(e) + ") outside " + shape_str(a.shape()));
      const std::size_t r = a.rows(), c = a.cols(), w = static_cast<std::size_t>(e - b);
      std::vector<double> out(r * w);
      for (std::size_t i = 0; i < r; ++i) std::copy_n(a.data() + i * c + b, w, out.data() + i * w);
      return Tensor::matrix(r, w, std::move(out));
    }
    case OpKind::Transpose: {
      require_arity(kind, in, 1);
      const Tensor& a = *in[0];
      require(a.rank() == 2, kind, "expects a matrix, got " + shape_str(a.shape()));
      std::vector<double> out(a.size());
      MutMap(out.data(), a.cols(), a.rows()) = ConstMap(a.data(), a.rows(), a.cols()).transpose();
      return Tensor::matrix(a.cols(), a.rows(), std::move(out));
    }
    case OpKind::Gelu: {
      require_arity(kind, in, 1);
      std::vector<double> out(in[0]->size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = gelu_value((*in[0])[i]);
      return Tensor(in[0]->shape(), std::move(out));
    }
    case OpKind::LayerNorm: {
      require_arity(kind, in, 3);
      const Tensor& x = *in[0];
      const std::size_t r = x.rows(), c = x.cols();
      require(in[1]->size() == c && in[2]->size() == c, kind, "gain/bias width mismatch " + shapes_of(in));
      const double eps = attrs.real("eps", 1e-5);
      cache.assign(2 * r, 0.0);  // mean, inverse std per row
      std::vector<double> out(x.size());
      for (std::size_t i = 0; i < r; ++i) {
        const double* row = x.data() + i * c;
        double mu = 0.0;
        for (std::size_t j = 0; j < c; ++j) mu += row[j];
        mu /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= static_cast<double>(c);
        const double rstd = 1.0 / std::sqrt(var + eps);
        cache[2 * i] = mu;
        cache[2 * i + 1] = rstd;
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = (row[j] - mu) * rstd * (*in[1])[j] + (*in[2])[j];
      }
      return Tensor(x.shape(), std::move(out));
    }
    case OpKind::Softmax: {
      require_arity(kind, in, 1);
      std::vector<double> out(in[0]->values().begin(), in[0]->values().end());
      softmax_rows(out.data(), in[0]->rows(), in[0]->cols(), in[0]->cols());
      return Tensor(in[0]->shape(), std::move(out));
    }
    case OpKind::Attention: {
      require_arity(kind, in, 3);
      const Tensor& q = *in[0];
      const Tensor& k = *in[1];
      const Tensor& v = *in[2];
      require(q.rank() == 2 && q.shape() == k.shape() && q.shape() == v.shape(), kind,
              "query/key/value must share [tokens, width], got " + shapes_of(in));
      const std::int64_t heads = attrs.integer("heads", 1);
      const std::size_t n = q.rows(), d = q.cols();
      require(heads > 0 && d % static_cast<std::size_t>(heads) == 0, kind,
              "width " + std::to_string(d) + " not divisible by " + std::to_string(heads) + " heads");
      const std::size_t dh = d / static_cast<std::size_t>(heads);
      const auto seg = resolve_segments(kind, attrs, n);
      const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
      std::size_t probs = 0;
      for (auto s : seg) probs += static_cast<std::size_t>(s * s) * static_cast<std::size_t>(heads);
      cache.assign(probs, 0.0);
      std::vector<double> out(n * d, 0.0);
      std::size_t row = 0, pofs = 0;
      for (auto s : seg) {
        const auto len = static_cast<std::size_t>(s);
        for (std::size_t h = 0; h < static_cast<std::size_t>(heads); ++h) {
          StridedConst qh(q.data() + row * d + h * dh, len, dh, Eigen::OuterStride<>(d));
          StridedConst kh(k.data() + row * d + h * dh, len, dh, Eigen::OuterStride<>(d));
          StridedConst vh(v.data() + row * d + h * dh, len, dh, Eigen::OuterStride<>(d));
          MutMap p(cache.data() + pofs, len, len);
          p.noalias() = (qh * kh.transpose()) * inv;
          softmax_rows(p.data(), len, len, len);
          StridedMut oh(out.data() + row * d + h * dh, len, dh, Eigen::OuterStride<>(d));
          oh.noalias() = p * vh;
          pofs += len * len;
        }
        row += len;
      }
      return Tensor(q.shape(), std::move(out));
    }
    case OpKind::L1Distance: {
      require_arity(kind, in, 2);
      const Tensor& p = *in[0];
      const Tensor& t = *in[1];
      require(p.shape() == t.shape(), kind, "shape mismatch " + shapes_of(in));
      const auto w = attrs.reals("row_weights");
      const std::size_t r = p.rows(), c = p.cols();
      require(w.empty() || w.size() == r, kind, "row_weights length " + std::to_string(w.size()) + " != rows " + std::to_string(r));
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < r; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        require(wi >= 0.0, kind, "row weights must be non-negative");
        if (wi == 0.0) continue;
        double acc = 0.0;
        for (std::size_t j = 0; j < c; ++j) acc += std::abs(p[i * c + j] - t[i * c + j]);
        num += wi * acc;
        den += wi;
      }
      require(den > 0.0, kind, "all rows carry zero weight");
      cache.assign(1, den * static_cast<double>(c));
      return Tensor::scalar(num / cache[0]);
    }
    case OpKind::LogSumExp: {
      require_arity(kind, in, 1);
      const Tensor& a = *in[0];
      const std::size_t r = a.rows(), c = a.cols();
      std::vector<double> out(r);
      for (std::size_t i = 0; i < r; ++i) {
        const double* row = a.data() + i * c;
        const double m = *std::max_element(row, row + c);
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - m);
        out[i] = m + std::log(z);
      }
      return Tensor::matrix(r, 1, std::move(out));
    }
    case OpKind::L2Normalize: {
      require_arity(kind, in, 1);
      const Tensor& a = *in[0];
      const std::size_t r = a.rows(), c = a.cols();
      cache.assign(r, 0.0);
      std::vector<double> out(a.size());
      for (std::size_t i = 0; i < r; ++i) {
        double n2 = 0.0;
        for (std::size_t j = 0; j < c; ++j) n2 += a[i * c + j] * a[i * c + j];
        const double norm = std::max(std::sqrt(n2), 1e-12);
        cache[i] = norm;
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] = a[i * c + j] / norm;
      }
      return Tensor(a.shape(), std::move(out));
    }
    case OpKind::Leaf:
    case OpKind::Custom:
      break;
  }
  throw UnknownOpError("kernel '" + std::string(op_name(kind)) + "' has no forward rule");
}

std::vector<std::vector<double>> backward(OpKind kind, const Inputs& in, const Tensor& out,
                                          std::span<const double> g, const Attrs& attrs,
                                          const std::vector<double>& cache,
                                          const std::vector<bool>& need) {
  std::vector<std::vector<double>> grads(in.size());
  auto want = [&](std::size_t i) -> std::vector<double>* {
    if (!need[i]) return nullptr;
    grads[i].assign(in[i]->size(), 0.0);
    return &grads[i];
  };

  switch (kind) {
    case OpKind::MatMul: {
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      ConstMap gm(g.data(), a.rows(), b.cols());
      if (auto* ga = want(0))
        MutMap(ga->data(), a.rows(), a.cols()).noalias() = gm * ConstMap(b.data(), b.rows(), b.cols()).transpose();
      if (auto* gb = want(1))
        MutMap(gb->data(), b.rows(), b.cols()).noalias() = ConstMap(a.data(), a.rows(), a.cols()).transpose() * gm;
      break;
    }
    case OpKind::Add:
    case OpKind::Sub: {
      const double sign = kind == OpKind::Add ? 1.0 : -1.0;
      if (auto* ga = want(0)) std::copy(g.begin(), g.end(), ga->begin());
      if (auto* gb = want(1)) {
        if (in[0]->shape() == in[1]->shape()) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] = sign * g[i];
        } else {
          const std::size_t c = in[0]->cols(), r = in[0]->rows();
          double* pb = gb->data();
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) pb[j] += g[i * c + j];
        }
      }
      break;
    }
    case OpKind::Mul: {
      if (auto* ga = want(0))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] = g[i] * (*in[1])[i];
      if (auto* gb = want(1))
        for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] = g[i] * (*in[0])[i];
      break;
    }
    case OpKind::Scale: {
      const double f = attrs.real("factor", 1.0);
      if (auto* ga = want(0))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] = f * g[i];
      break;
    }
    case OpKind::Sum: {
      if (auto* ga = want(0)) std::fill(ga->begin(), ga->end(), g[0]);
      break;
    }
    case OpKind::Mean: {
      if (auto* ga = want(0)) {
        const auto seg = resolve_segments(kind, attrs, in[0]->rows());
        const std::size_t c = in[0]->cols();
        std::size_t row = 0;
        for (std::size_t s = 0; s < seg.size(); ++s) {
          const double inv = 1.0 / static_cast<double>(seg[s]);
          for (std::int64_t i = 0; i < seg[s]; ++i, ++row)
            for (std::size_t j = 0; j < c; ++j) (*ga)[row * c + j] = g[s * c + j] * inv;
        }
      }
      break;
    }
    case OpKind::Concat: {
      const std::size_t r = out.rows(), total = out.cols();
      std::size_t offset = 0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        const std::size_t c = in[k]->cols();
        if (auto* gk = want(k))
          for (std::size_t i = 0; i < r; ++i) std::copy_n(g.data() + i * total + offset, c, gk->data() + i * c);
        offset += c;
      }
      break;
    }
    case OpKind::Slice: {
      if (auto* ga = want(0)) {
        const auto b = static_cast<std::size_t>(attrs.integer("begin", 0));
        const std::size_t r = out.rows(), w = out.cols(), c = in[0]->cols();
        for (std::size_t i = 0; i < r; ++i) std::copy_n(g.data() + i * w, w, ga->data() + i * c + b);
      }
      break;
    }
    case OpKind::Transpose: {
      if (auto* ga = want(0))
        MutMap(ga->data(), in[0]->rows(), in[0]->cols()) = ConstMap(g.data(), out.rows(), out.cols()).transpose();
      break;
    }
    case OpKind::Gelu: {
      if (auto* ga = want(0))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] = g[i] * gelu_slope((*in[0])[i]);
      break;
    }
    case OpKind::LayerNorm: {
      const Tensor& x = *in[0];
      const Tensor& gain = *in[1];
      const std::size_t r = x.rows(), c = x.cols();
      auto* gx = want(0);
      auto* gg = want(1);
      auto* gbias = want(2);
      std::vector<double> xhat(c), dxhat(c);
      for (std::size_t i = 0; i < r; ++i) {
        const double mu = cache[2 * i], rstd = cache[2 * i + 1];
        double mean_d = 0.0, mean_dx = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
          xhat[j] = (x[i * c + j] - mu) * rstd;
          dxhat[j] = g[i * c + j] * gain[j];
          if (gg) (*gg)[j] += g[i * c + j] * xhat[j];
          if (gbias) (*gbias)[j] += g[i * c + j];
          mean_d += dxhat[j];
          mean_dx += dxhat[j] * xhat[j];
        }
        if (!gx) continue;
        mean_d /= static_cast<double>(c);
        mean_dx /= static_cast<double>(c);
        for (std::size_t j = 0; j < c; ++j) (*gx)[i * c + j] = rstd * (dxhat[j] - mean_d - xhat[j] * mean_dx);
      }
      break;
    }
    case OpKind::Softmax: {
      if (auto* ga = want(0)) {
        const std::size_t r = out.rows(), c = out.cols();
        for (std::size_t i = 0; i < r; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * out[i * c + j];
          for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] = out[i * c + j] * (g[i * c + j] - dot);
        }
      }
      break;
    }
    case OpKind::Attention: {
      const Tensor& q = *in[0];
      const Tensor& k = *in[1];
      const Tensor& v = *in[2];
      const auto heads = static_cast<std::size_t>(attrs.integer("heads", 1));
      const std::size_t n = q.rows(), d = q.cols(), dh = d / heads;
      const auto seg = resolve_segments(kind, attrs, n);
      const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
      std::vector<double> dq(n * d, 0.0), dk(n * d, 0.0), dv(n * d, 0.0);
      std::size_t row = 0, pofs = 0;
      RowMat dp, ds;
      for (auto s : seg) {
        const auto len = static_cast<std::size_t>(s);
        for (std::size_t h = 0; h < heads; ++h) {
          auto block = [&](const double* base) {
            return StridedConst(base + row * d + h * dh, len, dh, Eigen::OuterStride<>(d));
          };
          auto mblock = [&](std::vector<double>& buf) {
            return StridedMut(buf.data() + row * d + h * dh, len, dh, Eigen::OuterStride<>(d));
          };
          ConstMap p(cache.data() + pofs, len, len);
          StridedConst go(g.data() + row * d + h * dh, len, dh, Eigen::OuterStride<>(d));
          mblock(dv).noalias() = p.transpose() * go;
          dp.noalias() = go * block(v.data()).transpose();
          ds.resize(len, len);
          for (std::size_t i = 0; i < len; ++i) {
            const double dot = p.row(i).dot(dp.row(i));
            for (std::size_t j = 0; j < len; ++j) ds(i, j) = p(i, j) * (dp(i, j) - dot) * inv;
          }
          mblock(dq).noalias() = ds * block(k.data());
          mblock(dk).noalias() = ds.transpose() * block(q.data());
          pofs += len * len;
        }
        row += len;
      }
      if (need[0]) grads[0] = std::move(dq);
      if (need[1]) grads[1] = std::move(dk);
      if (need[2]) grads[2] = std::move(dv);
      break;
    }
    case OpKind::L1Distance: {
      const Tensor& p = *in[0];
      const Tensor& t = *in[1];
      const auto w = attrs.reals("row_weights");
      const std::size_t r = p.rows(), c = p.cols();
      auto* gp = want(0);
      auto* gt = want(1);
      const double base = g[0] / cache[0];
      for (std::size_t i = 0; i < r; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        for (std::size_t j = 0; j < c; ++j) {
          const double diff = p[i * c + j] - t[i * c + j];
          const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
          if (gp) (*gp)[i * c + j] = base * wi * s;
          if (gt) (*gt)[i * c + j] = -base * wi * s;
        }
      }
      break;
    }
    case OpKind::LogSumExp: {
      if (auto* ga = want(0)) {
        const Tensor& a = *in[0];
        const std::size_t r = a.rows(), c = a.cols();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] = g[i] * std::exp(a[i * c + j] - out[i]);
      }
      break;
    }
    case OpKind::L2Normalize: {
      if (auto* ga = want(0)) {
        const std::size_t r = out.rows(), c = out.cols();
        for (std::size_t i = 0; i < r; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * out[i * c + j];
          for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] = (g[i * c + j] - out[i * c + j] * dot) / cache[i];
        }
      }
      break;
    }
    case OpKind::Leaf:
    case OpKind::Custom:
      throw UnknownOpError("kernel '" + std::string(op_name(kind)) + "' has no backward rule");
  }
  return grads;
}

}  // namespace hdys::nc::detail
