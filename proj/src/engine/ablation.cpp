#include "hdys/engine/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <mutex>
#include <sstream>
#include <thread>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"

namespace hdys::engine {
namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

std::string fractions_text(const std::map<std::string, double>& f) {
  std::string out;
  for (const auto& [id, v] : f) out += (out.empty() ? "" : ",") + id + "=" + shortest(v);
  return out;
}

std::map<std::string, double> only(const data::DatasetManifest& m, const std::string& keep, double fraction) {
  std::map<std::string, double> f;
  for (const auto& p : m.profiles) f[p.id] = p.id == keep ? fraction : 0.0;
  return f;
}

constexpr const char* kMetaFile = "meta.txt";

}  // namespace

std::vector<AblationRun> scale_grid(const data::DatasetManifest& m, const std::string& target) {
  m.profile(target);
  return {
      {"single50-" + target, {"train.fractions=" + fractions_text(only(m, target, 0.5))}},
      {"fifty50-" + target, {"train.fractions=" + fractions_text(data::fifty_fifty_fractions(m, target))}},
      {"single-" + target, {"train.fractions=" + fractions_text(only(m, target, 1.0))}},
  };
}

std::vector<AblationRun> ablation_grid(const data::DatasetManifest& m, const std::string& target) {
  std::vector<AblationRun> g{{"full", {}}};
  for (const auto& p : m.profiles) g.push_back({p.id + "-only", {"train.fractions=" + fractions_text(only(m, p.id, 1.0))}});
  for (const auto& p : m.profiles) g.push_back({"without-" + p.id, {"train.fractions=" + p.id + "=0"}});
  g.push_back({"no_align", {"ablation.no_align=true"}});
  g.push_back({"no_fdae", {"ablation.no_fdae=true"}});
  g.push_back({"no_temporal_refinement", {"ablation.no_temporal_refinement=true"}});
  for (int d : {32, 64, 128}) g.push_back({"d" + std::to_string(d), {"model.latent_dim=" + std::to_string(d)}});
  for (auto& r : scale_grid(m, target)) g.push_back(std::move(r));
  return g;
}

model::HDySConfig apply_run(const model::HDySConfig& base, const AblationRun& run) {
  auto cfg = base;
  for (const auto& o : run.overrides) model::apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

RunResult train_and_evaluate(const std::string& name, const model::HDySConfig& cfg, const data::Dataset& data,
                             const std::filesystem::path& cache_dir) {
  RunResult r;
  r.name = name;
  r.seed = cfg.seed;
  r.config_hash = model::config_hash(cfg);
  TrainedModel run;
  std::filesystem::path dir;
  if (!cache_dir.empty()) {
    dir = cache_dir / (r.config_hash + "-" + data::dataset_hash(data.root, data.manifest));
    if (std::filesystem::exists(dir / kMetaFile)) {
      run = load_run(dir, data.manifest);
      if (model::config_hash(run.config) != r.config_hash)
        throw ConfigError("cached run at " + dir.string() + " holds a different config");
      std::istringstream meta(read_file(dir / kMetaFile));
      meta >> run.seen_frames;
      r.cached = true;
    }
  }
  if (!r.cached) {
    run = train(cfg, data);
    if (!dir.empty()) {
      save_run(dir, run);
      // written last: its presence marks a complete run
      write_file_atomic(dir / kMetaFile, std::to_string(run.seen_frames) + "\n");
    }
  }
  r.parameters = run.params.parameter_count();
  r.seen_frames = run.seen_frames;
  r.eval = evaluate(run, data, checkpoint_id(run));
  return r;
}

AblationReport ablation_suite(const model::HDySConfig& base, const std::vector<AblationRun>& grid,
                              const std::vector<std::uint64_t>& seeds, const data::Dataset& data,
                              const std::filesystem::path& cache_dir, int jobs,
                              const std::function<void(const RunResult&)>& progress) {
  AblationReport rep;
  rep.dataset_hash = data::dataset_hash(data.root, data.manifest);
  struct Job {
    std::string name;
    model::HDySConfig cfg;
  };
  std::vector<Job> todo;
  for (auto seed : seeds)
    for (const auto& g : grid) {
      auto cfg = apply_run(base, g);
      cfg.seed = seed;
      todo.push_back({g.name, cfg});
    }
  // duplicate configs (d64 = full, single = <P>-only) train once
  std::map<std::string, std::size_t> first;
  for (std::size_t i = 0; i < todo.size(); ++i) first.emplace(model::config_hash(todo[i].cfg), i);

  std::vector<RunResult> results(todo.size());
  std::vector<std::exception_ptr> errors(todo.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      if (first.at(model::config_hash(todo[i].cfg)) != i) continue;
      try {
        results[i] = train_and_evaluate(todo[i].name, todo[i].cfg, data, cache_dir);
        if (progress) {
          std::lock_guard lock(report_mu);
          progress(results[i]);
        }
      } catch (...) {
        errors[i] = std::current_exception();
        next = todo.size();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(todo.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < todo.size(); ++i) {
    const auto src = first.at(model::config_hash(todo[i].cfg));
    RunResult r = results[src];
    if (src != i) {
      r.name = todo[i].name;
      r.cached = true;
    }
    rep.runs.push_back(std::move(r));
  }
  return rep;
}

std::string ablation_csv(const AblationReport& report) {
  std::ostringstream out;
  out << "run,seed,config_hash,parameters,seen_frames,profile,target,headline,avg,best,best_representation,zero,"
         "latent_cosine\n";
  for (const auto& r : report.runs)
    for (const auto& row : r.eval.rows) {
      if (row.representation != "avg") continue;
      const auto& best = r.eval.row(row.profile, "best");
      const auto& zero = r.eval.row(row.profile, "zero");
      out << r.name << ',' << r.seed << ',' << r.config_hash << ',' << r.parameters << ',' << r.seen_frames << ','
          << row.profile << ',' << row.target << ',' << row.headline_name << ',' << fmt(row.headline()) << ','
          << fmt(best.headline()) << ',' << best.chosen << ',' << fmt(zero.headline()) << ','
          << fmt(r.eval.latent_cosine) << '\n';
    }
  return out.str();
}

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of nothing");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace hdys::engine
