#pragma once

#include <Eigen/Dense>

namespace hdys::engine {

/// Pearson correlation of two columns. Zero variance in either signal gives
/// 0 and sets `guarded`.
double pcc(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred, bool& guarded);

struct Metrics {
  double mpje = 0.0;  // mean |truth - pred| over components
  double rmse = 0.0;
  double pcc = 0.0;   // per channel over time, averaged over channels then sequences
  int guarded = 0;    // channels that hit the zero-variance guard
  long components = 0;
};

/// Pools absolute and squared errors over every component; PCC is averaged
/// per sequence. Feed one sequence per add() call.
class MetricAccumulator {
 public:
  void add(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);
  Metrics result() const;
  bool empty() const { return n_ == 0; }

 private:
  double abs_ = 0.0, sq_ = 0.0, pcc_ = 0.0;
  long n_ = 0;
  int sequences_ = 0, guarded_ = 0;
};

Metrics compute_metrics(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred);

}  // namespace hdys::engine
