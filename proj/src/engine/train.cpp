#include "hdys/engine/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"
#include "hdys/numcore/checkpoint.hpp"

namespace hdys::engine {
namespace {

enum SeedTag : std::uint64_t { kInit = 11, kWindows = 12 };

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double lr_scale(const model::HDySConfig& cfg, long step, long steps) {
  double s = 1.0;
  const double ramp = cfg.warmup * static_cast<double>(steps);
  if (ramp > 0.0 && static_cast<double>(step) < ramp) s = (static_cast<double>(step) + 1.0) / (ramp + 1.0);
  if (cfg.cosine_decay && steps > 0) s *= 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(steps)));
  return s;
}

model::HDySModel model_for(const model::HDySConfig& cfg, const data::DatasetManifest& full) {
  return model::HDySModel(cfg, model::shape_from_profiles(full.profiles));
}

data::DatasetManifest training_manifest(const model::HDySConfig& cfg, const data::DatasetManifest& full) {
  if (cfg.fractions.empty()) return full;
  std::map<std::string, double> f;
  for (const auto& [id, v] : model::parse_fractions(cfg.fractions)) f[id] = v;
  return data::subset_dataset(full, f);
}

std::vector<model::GroupInput> make_groups(const model::HDySConfig& cfg, const nc::ParameterStore& params,
                                           std::vector<model::WindowRef> windows) {
  std::stable_sort(windows.begin(), windows.end(), [](const model::WindowRef& a, const model::WindowRef& b) {
    return a.record->profile < b.record->profile;
  });
  std::vector<model::GroupInput> out;
  for (std::size_t i = 0; i < windows.size();) {
    std::size_t j = i;
    while (j < windows.size() && windows[j].record->profile == windows[i].record->profile) ++j;
    out.push_back(model::make_group(cfg, params, {windows.begin() + static_cast<std::ptrdiff_t>(i),
                                                  windows.begin() + static_cast<std::ptrdiff_t>(j)}));
    i = j;
  }
  return out;
}

BatchLoss batch_loss(const model::HDySModel& m, nc::Binding& b, const std::vector<model::GroupInput>& groups) {
  const auto& cfg = m.config();
  BatchLoss out;
  nc::Var recon, align;
  double recon_frames = 0.0, align_frames = 0.0;
  std::vector<std::pair<nc::Var, double>> recon_parts, align_parts;
  for (const auto& g : groups) {
    const auto fwd = m.forward(b, g);
    std::vector<model::ReconTerm> terms = fwd.inverse;
    terms.insert(terms.end(), fwd.forward.begin(), fwd.forward.end());
    const double frames = g.frames();
    if (!terms.empty()) {
      try {
        recon_parts.emplace_back(model::loss_recon(terms), frames);
        recon_frames += frames;
      } catch (const DeadConfigError&) {
        // every frame of this group is boundary-masked; it only aligns
      }
    }
    std::vector<model::Latent> z = fwd.kinematics;
    z.insert(z.end(), fwd.composed.begin(), fwd.composed.end());
    if (!cfg.no_align && z.size() >= 2) {
      align_parts.emplace_back(model::loss_align(z, cfg.temperature, cfg.similarity), frames);
      align_frames += frames;
    }
  }
  auto weighted = [](const std::vector<std::pair<nc::Var, double>>& parts, double total) {
    nc::Var acc;
    for (const auto& [v, w] : parts) {
      const nc::Var t = nc::scale(v, w / total);
      acc = acc.valid() ? nc::add(acc, t) : t;
    }
    return acc;
  };
  if (!recon_parts.empty()) {
    recon = weighted(recon_parts, recon_frames);
    out.recon = recon.value()[0];
    out.has_recon = true;
  }
  if (!align_parts.empty()) {
    align = weighted(align_parts, align_frames);
    out.align = align.value()[0];
    out.has_align = true;
  }
  if (!out.has_recon && !out.has_align)
    throw DeadConfigError("no loss term is available for this batch (every target masked and alignment off)");
  if (out.has_recon) out.total = nc::scale(recon, cfg.alpha_recon);
  if (out.has_align) {
    const nc::Var a = nc::scale(align, cfg.alpha_align);
    out.total = out.total.valid() ? nc::add(out.total, a) : a;
  }
  return out;
}

nc::ParameterStore initialize(const model::HDySConfig& cfg, const data::Dataset& data) {
  const auto manifest = training_manifest(cfg, data.manifest);
  const auto m = model_for(cfg, data.manifest);
  auto params = m.init(mix_seed(cfg.seed, kInit));
  std::vector<const kin::SequenceRecord*> train_records;
  for (const auto& p : manifest.profiles)
    if (p.train_enabled)
      for (const auto& id : manifest.train_ids(p.id)) train_records.push_back(&data.record(id));
  model::add_stats(params, m.shape(), train_records);
  return params;
}

TrainedModel train(const model::HDySConfig& cfg, const data::Dataset& data,
                   const std::function<void(const EpochLoss&)>& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  const auto manifest = training_manifest(cfg, data.manifest);
  const auto m = model_for(cfg, data.manifest);

  TrainedModel run;
  run.config = cfg;
  run.shape = m.shape();
  run.params = initialize(cfg, data);
  run.optimizer = nc::adamw_init(run.params, {cfg.lr, cfg.weight_decay});

  const int per_batch = std::max(1, cfg.frames_per_batch / cfg.window);
  int enabled = 0;
  for (const auto& p : manifest.profiles) enabled += p.train_enabled ? 1 : 0;
  const long steps = static_cast<long>(cfg.epochs) * ((static_cast<long>(enabled) * cfg.quota + per_batch - 1) / per_batch);
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto ids = data::balanced_epoch_sampler(manifest, cfg.quota, cfg.seed, epoch);
    std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed, kWindows), static_cast<std::uint64_t>(epoch)));
    std::vector<model::WindowRef> windows;
    for (const auto& id : ids) {
      const auto& r = data.record(id);
      if (r.frames() < cfg.window)
        throw ConfigError("sequence " + id + " is shorter than data.window (" + std::to_string(cfg.window) + ")");
      const int starts = (r.frames() - cfg.window) / cfg.stride + 1;
      windows.push_back({&r, cfg.stride * std::uniform_int_distribution<int>(0, starts - 1)(rng)});
    }
    std::shuffle(windows.begin(), windows.end(), rng);

    EpochLoss e;
    e.epoch = epoch + 1;
    int recon_batches = 0, align_batches = 0;
    for (std::size_t begin = 0; begin < windows.size(); begin += static_cast<std::size_t>(per_batch)) {
      const auto end = std::min(windows.size(), begin + static_cast<std::size_t>(per_batch));
      const auto groups = make_groups(cfg, run.params, {windows.begin() + static_cast<std::ptrdiff_t>(begin),
                                                        windows.begin() + static_cast<std::ptrdiff_t>(end)});
      nc::Graph graph;
      nc::Binding bind(graph, run.params);
      BatchLoss loss;
      try {
        loss = batch_loss(m, bind, groups);
      } catch (const NonFiniteError& err) {
        throw NonFiniteError("epoch " + std::to_string(e.epoch) + ", batch " + std::to_string(e.batches + 1) + ": " +
                             err.what());
      } catch (const DeadConfigError& err) {
        throw DeadConfigError("epoch " + std::to_string(e.epoch) + ", batch " + std::to_string(e.batches + 1) + ": " +
                              err.what());
      }
      const double total = loss.total.value()[0];
      if (!std::isfinite(total))
        throw NonFiniteError("epoch " + std::to_string(e.epoch) + ", batch " + std::to_string(e.batches + 1) +
                             ": non-finite loss");
      const auto grads = bind.collect(graph.backward(loss.total));
      nc::adamw_step(run.optimizer, run.params, grads, lr_scale(cfg, step++, steps));
      e.total += total;
      if (loss.has_recon) {
        e.recon += loss.recon;
        ++recon_batches;
      }
      if (loss.has_align) {
        e.align += loss.align;
        ++align_batches;
      }
      ++e.batches;
      for (const auto& g : groups) run.seen_frames += static_cast<std::size_t>(g.frames());
    }
    if (e.batches > 0) e.total /= e.batches;
    if (recon_batches > 0) e.recon /= recon_batches;
    if (align_batches > 0) e.align /= align_batches;
    run.curve.push_back(e);
    if (progress) progress(e);
  }
  run.seconds = seconds_since(t0);
  return run;
}

std::string loss_curve_csv(const std::vector<EpochLoss>& curve) {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,recon,align,total,batches\n";
  for (const auto& e : curve) out << e.epoch << ',' << e.recon << ',' << e.align << ',' << e.total << ',' << e.batches << '\n';
  return out.str();
}

void save_run(const std::filesystem::path& dir, const TrainedModel& run) {
  std::filesystem::create_directories(dir);
  nc::save_checkpoint(dir / kCheckpointFile, run.params, run.optimizer);
  model::save_config(dir / kConfigFile, run.config);
  write_file_atomic(dir / kLossFile, loss_curve_csv(run.curve));
}

TrainedModel load_run(const std::filesystem::path& dir, const data::DatasetManifest& full) {
  if (!std::filesystem::exists(dir / kCheckpointFile))
    throw IoError("no checkpoint at " + (dir / kCheckpointFile).string() + " (run `hdysctl train` first)");
  TrainedModel run;
  run.config = model::load_config(dir / kConfigFile);
  auto ckpt = nc::load_checkpoint(dir / kCheckpointFile);
  const auto m = model_for(run.config, full);
  m.check(ckpt.params);
  run.shape = m.shape();
  run.params = std::move(ckpt.params);
  run.optimizer = std::move(ckpt.optimizer);
  return run;
}

}  // namespace hdys::engine
