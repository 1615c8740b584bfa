#include "hdys/engine/metrics.hpp"

#include <cmath>

#include "hdys/common/error.hpp"

namespace hdys::engine {

double pcc(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred, bool& guarded) {
  guarded = false;
  if (truth.size() != pred.size()) throw ShapeError("pcc: length mismatch");
  const Eigen::ArrayXd a = truth.array() - truth.mean(), b = pred.array() - pred.mean();
  const double va = a.square().sum(), vb = b.square().sum();
  // relative threshold; an exact zero test misses round-off in the centring
  const double scale_a = truth.array().abs().maxCoeff(), scale_b = pred.array().abs().maxCoeff();
  const double n = static_cast<double>(truth.size());
  if (truth.size() < 2 || va <= n * 1e-24 * (1.0 + scale_a * scale_a) ||
      vb <= n * 1e-24 * (1.0 + scale_b * scale_b)) {
    guarded = true;
    return 0.0;
  }
  return (a * b).sum() / std::sqrt(va * vb);
}

void MetricAccumulator::add(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols())
    throw ShapeError("metrics: prediction " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) +
                     " does not match truth " + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  if (truth.size() == 0) return;
  const Eigen::ArrayXXd d = truth.array() - pred.array();
  if (!d.allFinite()) throw NonFiniteError("metrics: non-finite prediction or truth");
  abs_ += d.abs().sum();
  sq_ += d.square().sum();
  n_ += static_cast<long>(d.size());
  double p = 0.0;
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    bool g = false;
    p += pcc(truth.col(j), pred.col(j), g);
    guarded_ += g ? 1 : 0;
  }
  pcc_ += p / static_cast<double>(truth.cols());
  ++sequences_;
}

Metrics MetricAccumulator::result() const {
  Metrics m;
  if (n_ == 0) return m;
  m.mpje = abs_ / static_cast<double>(n_);
  m.rmse = std::sqrt(sq_ / static_cast<double>(n_));
  m.pcc = pcc_ / sequences_;
  m.guarded = guarded_;
  m.components = n_;
  return m;
}

Metrics compute_metrics(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred) {
  MetricAccumulator acc;
  acc.add(truth, pred);
  return acc.result();
}

}  // namespace hdys::engine
