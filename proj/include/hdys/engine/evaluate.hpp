#pragma once

#include <map>
#include <string>
#include <vector>

#include "hdys/engine/metrics.hpp"
#include "hdys/engine/train.hpp"

namespace hdys::engine {

/// Dense per-frame predictions for one sequence. Torque channels are
/// mass-normalized, everything else is in label units.
struct SequencePrediction {
  std::string id;
  std::string profile;
  double mass = 1.0;
  // target channel -> source representation -> [frames, width]
  std::map<kin::Channel, std::map<std::string, Eigen::MatrixXd>> dynamics;
  std::map<kin::Channel, Eigen::MatrixXd> truth;
  double latent_cosine = 0.0;  // NaN with fewer than two sources
};

/// Runs the inverse path over windows tiling the sequence; each frame takes
/// the first window covering it.
SequencePrediction predict_sequence(const TrainedModel& run, const kin::SequenceRecord& r);

/// Mean of the per-representation predictions of one target.
Eigen::MatrixXd averaged_prediction(const std::map<std::string, Eigen::MatrixXd>& by_source);

/// Headline metric of a dynamics target: mPJE for torques, RMSE otherwise.
const char* headline_metric(kin::Channel target);

struct EvalRow {
  std::string profile;
  std::string target;
  std::string representation;  // a source channel, "avg", "best" or "zero"
  std::string chosen;          // best row only
  Metrics metrics;
  double headline() const;
  std::string headline_name;
};

struct EvalReport {
  std::string checkpoint;
  std::uint64_t seed = 0;
  std::vector<EvalRow> rows;
  double latent_cosine = 0.0;  // mean over held-out sequences with >= 2 sources
  int latent_sequences = 0;

  /// Throws ConfigError when absent.
  const EvalRow& row(const std::string& profile, const std::string& representation) const;
  bool has(const std::string& profile, const std::string& representation) const;
};

/// Test-split evaluation over every profile of the dataset.
EvalReport evaluate(const TrainedModel& run, const data::Dataset& data, const std::string& checkpoint_id = "");

/// profile,target,representation,chosen,metric,value rows.
std::string eval_csv(const EvalReport& report);
std::string eval_json(const EvalReport& report);

/// Content id of a trained model: hash of its checkpoint bytes.
std::string checkpoint_id(const TrainedModel& run);

}  // namespace hdys::engine
