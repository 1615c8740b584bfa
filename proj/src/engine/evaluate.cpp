#include "hdys/engine/evaluate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"
#include "hdys/numcore/checkpoint.hpp"

namespace hdys::engine {
namespace {

using MatX = Eigen::MatrixXd;
using kin::Channel;

std::vector<int> tile_starts(int frames, int window) {
  if (frames < window)
    throw ConfigError("sequence of " + std::to_string(frames) + " frames is shorter than the window (" +
                      std::to_string(window) + ")");
  std::vector<int> s;
  for (int t = 0; t + window <= frames; t += window) s.push_back(t);
  if (s.back() + window < frames) s.push_back(frames - window);
  return s;
}

Channel channel_from_name(const std::string& name) {
  for (int i = 0; i < kin::kChannelCount; ++i)
    if (name == kin::channel_name(static_cast<Channel>(i))) return static_cast<Channel>(i);
  throw ConfigError("unknown channel '" + name + "'");
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

}  // namespace

const char* headline_metric(Channel target) { return model::mass_normalized(target) ? "mpje" : "rmse"; }

double EvalRow::headline() const { return headline_name == "mpje" ? metrics.mpje : metrics.rmse; }

SequencePrediction predict_sequence(const TrainedModel& run, const kin::SequenceRecord& r) {
  auto cfg = run.config;
  cfg.no_fdae = true;  // inference needs only the inverse path
  const model::HDySModel m(cfg, run.shape);
  const auto starts = tile_starts(r.frames(), cfg.window);
  std::vector<model::WindowRef> windows;
  for (int s : starts) windows.push_back({&r, s});
  const auto group = model::make_group(cfg, run.params, windows);

  SequencePrediction out;
  out.id = r.id;
  out.profile = r.profile;
  out.mass = r.mass;
  nc::Graph graph;
  nc::Binding bind(graph, run.params);
  const auto fwd = m.forward(bind, group);
  for (const auto& term : fwd.inverse) {
    const Channel c = channel_from_name(term.target);
    const MatX flat = model::destandardize(run.params, c, term.pred.value());
    MatX dense(r.frames(), flat.cols());
    int filled = 0;
    for (std::size_t w = 0; w < starts.size(); ++w)
      for (int t = 0; t < cfg.window; ++t) {
        const int frame = starts[w] + t;
        if (frame < filled) continue;
        dense.row(frame) = flat.row(static_cast<Eigen::Index>(w) * cfg.window + t);
        filled = frame + 1;
      }
    out.dynamics[c][term.source] = dense;
    if (!out.truth.count(c)) out.truth[c] = model::mass_normalized(c) ? MatX(r.at(c) / r.mass) : r.at(c);
  }
  out.latent_cosine = fwd.kinematics.size() >= 2 ? model::cross_source_cosine(fwd.kinematics)
                                                  : std::numeric_limits<double>::quiet_NaN();
  return out;
}

MatX averaged_prediction(const std::map<std::string, MatX>& by_source) {
  if (by_source.empty()) throw ConfigError("no representation predicted this target");
  MatX acc = MatX::Zero(by_source.begin()->second.rows(), by_source.begin()->second.cols());
  for (const auto& [_, p] : by_source) acc += p;
  return acc / static_cast<double>(by_source.size());
}

const EvalRow& EvalReport::row(const std::string& profile, const std::string& representation) const {
  for (const auto& r : rows)
    if (r.profile == profile && r.representation == representation) return r;
  throw ConfigError("no evaluation row for profile " + profile + ", representation " + representation);
}

bool EvalReport::has(const std::string& profile, const std::string& representation) const {
  for (const auto& r : rows)
    if (r.profile == profile && r.representation == representation) return true;
  return false;
}

EvalReport evaluate(const TrainedModel& run, const data::Dataset& data, const std::string& id) {
  EvalReport rep;
  rep.checkpoint = id;
  rep.seed = run.config.seed;
  double cos_sum = 0.0;
  for (const auto& p : data.manifest.profiles) {
    // target -> representation -> accumulator
    std::map<Channel, std::map<std::string, MetricAccumulator>> acc;
    for (const auto& sid : data.manifest.test_ids(p.id)) {
      const auto pred = predict_sequence(run, data.record(sid));
      if (!std::isnan(pred.latent_cosine)) {
        cos_sum += pred.latent_cosine;
        ++rep.latent_sequences;
      }
      for (const auto& [c, by_source] : pred.dynamics) {
        const MatX& truth = pred.truth.at(c);
        for (const auto& [src, x] : by_source) acc[c][src].add(truth, x);
        acc[c]["avg"].add(truth, averaged_prediction(by_source));
        acc[c]["zero"].add(truth, MatX::Zero(truth.rows(), truth.cols()));
      }
    }
    for (auto& [c, by_rep] : acc) {
      const std::string head = headline_metric(c);
      const EvalRow* best = nullptr;
      const auto first = rep.rows.size();
      for (const auto& [name, a] : by_rep)
        if (name != "avg" && name != "zero")
          rep.rows.push_back({p.id, kin::channel_name(c), name, "", a.result(), head});
      for (auto i = first; i < rep.rows.size(); ++i)
        if (!best || rep.rows[i].headline() < best->headline()) best = &rep.rows[i];
      EvalRow best_row = *best;
      best_row.representation = "best";
      best_row.chosen = best->representation;
      rep.rows.push_back({p.id, kin::channel_name(c), "avg", "", by_rep["avg"].result(), head});
      rep.rows.push_back(best_row);
      rep.rows.push_back({p.id, kin::channel_name(c), "zero", "", by_rep["zero"].result(), head});
    }
  }
  rep.latent_cosine = rep.latent_sequences > 0 ? cos_sum / rep.latent_sequences : 0.0;
  return rep;
}

std::string eval_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "profile,target,representation,chosen,metric,value\n";
  for (const auto& r : report.rows) {
    const std::string head = r.profile + ',' + r.target + ',' + r.representation + ',' + r.chosen + ',';
    out << head << "mpje," << fmt(r.metrics.mpje) << '\n';
    out << head << "rmse," << fmt(r.metrics.rmse) << '\n';
    out << head << "pcc," << fmt(r.metrics.pcc) << '\n';
    out << head << "pcc_guarded," << r.metrics.guarded << '\n';
  }
  return out.str();
}

std::string eval_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["checkpoint"] = report.checkpoint;
  j["seed"] = report.seed;
  j["latent_cosine"] = report.latent_cosine;
  j["latent_sequences"] = report.latent_sequences;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json o;
    o["profile"] = r.profile;
    o["target"] = r.target;
    o["representation"] = r.representation;
    if (!r.chosen.empty()) o["chosen"] = r.chosen;
    o["headline"] = r.headline_name;
    o["mpje"] = r.metrics.mpje;
    o["rmse"] = r.metrics.rmse;
    o["pcc"] = r.metrics.pcc;
    o["pcc_guarded"] = r.metrics.guarded;
    rows.push_back(o);
  }
  return j.dump(2) + "\n";
}

std::string checkpoint_id(const TrainedModel& run) {
  return hex64(fnv1a64(nc::encode_checkpoint(run.params, run.optimizer)));
}

}  // namespace hdys::engine
