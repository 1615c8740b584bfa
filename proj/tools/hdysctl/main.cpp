// hdysctl: data generation, training, evaluation, rollout and ablations.
#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <map>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"
#include "hdys/datahub/generate.hpp"
#include "hdys/engine/reproduce.hpp"

namespace fs = std::filesystem;
using namespace hdys;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::string manifest;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  int jobs = 1;
};

fs::path data_root(const Common& c) {
  fs::path p = c.manifest.empty() ? data::default_data_root() : fs::path(c.manifest);
  if (p.filename() == "manifest.json") p = p.parent_path();
  if (!fs::exists(p / "manifest.json"))
    throw IoError("no dataset at " + p.string() + " (run `hdysctl gen-data --out " + p.string() +
                  "` or set HDYS_DATA_DIR)");
  return p;
}

model::HDySConfig effective_config(const Common& c) {
  auto cfg = c.config.empty() ? model::desk_config() : model::load_config(c.config);
  for (const auto& s : c.sets) model::apply_override(cfg, s);
  if (c.seed_given) cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

void write_provenance(const fs::path& dir, const std::string& command, const model::HDySConfig& cfg,
                      const std::string& dataset_hash) {
  Json j;
  j["command"] = command;
  j["seeds"] = {cfg.seed};
  j["config_hash"] = model::config_hash(cfg);
  j["dataset_hash"] = dataset_hash;
  write_file_atomic(dir / "provenance.json", j.dump(2) + "\n");
}

void add_common(CLI::App* app, Common& c, bool with_config) {
  app->add_option("--manifest", c.manifest, "dataset directory or its manifest.json (default $HDYS_DATA_DIR)");
  if (with_config) {
    app->add_option("--config", c.config, "config file (default: desk preset)");
    app->add_option("--set", c.sets, "override key=value (repeatable)")->allow_extra_args(false);
    app->add_option_function<std::uint64_t>(
        "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_given = true; }, "training seed");
  }
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

int cmd_gen_data(const Common& c, std::uint64_t seed, int train_count, int test_count) {
  const fs::path root = c.out.empty() ? data::default_data_root() : fs::path(c.out);
  const auto m = data::plan_manifest(data::default_profiles(train_count, test_count), seed);
  data::generate_dataset(m, root, c.jobs);
  std::cout << "wrote " << m.sequences.size() << " sequences to " << root.string() << "\n";
  std::cout << "dataset hash " << data::dataset_hash(root, m) << "\n";
  return 0;
}

int cmd_validate(const Common& c) {
  const auto ds = data::load_dataset(data_root(c));
  ds.manifest.validate();
  std::map<std::string, std::pair<long, long>> frames;
  for (const auto& s : ds.manifest.sequences) {
    const auto& r = ds.record(s.id);
    kin::validate(r);
    if (r.profile != s.profile) throw FormatError("record " + s.id + " claims profile " + r.profile);
    (s.train ? frames[s.profile].first : frames[s.profile].second) += r.frames();
  }
  std::cout << "profile,train_frames,test_frames\n";
  for (const auto& p : ds.manifest.profiles)
    std::cout << p.id << ',' << frames[p.id].first << ',' << frames[p.id].second << '\n';
  std::cout << "dataset hash " << data::dataset_hash(ds.root, ds.manifest) << "\n";
  return 0;
}

int cmd_train(const Common& c) {
  const auto cfg = effective_config(c);
  const auto ds = data::load_dataset(data_root(c));
  const fs::path out = c.out.empty() ? fs::path("hdys-run") : fs::path(c.out);
  const auto run = engine::train(cfg, ds, [](const engine::EpochLoss& e) {
    std::cerr << "epoch " << e.epoch << " recon " << e.recon << " align " << e.align << " total " << e.total << "\n";
  });
  engine::save_run(out, run);
  write_provenance(out, "train", cfg, data::dataset_hash(ds.root, ds.manifest));
  std::cout << "checkpoint " << (out / engine::kCheckpointFile).string() << " (" << run.params.parameter_count()
            << " parameters, " << run.seconds << " s)\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& run_dir) {
  const auto ds = data::load_dataset(data_root(c));
  const auto run = engine::load_run(run_dir, ds.manifest);
  const fs::path out = c.out.empty() ? fs::path(run_dir) : fs::path(c.out);
  fs::create_directories(out);
  const auto rep = engine::evaluate(run, ds, engine::checkpoint_id(run));
  write_file_atomic(out / "eval.csv", engine::eval_csv(rep));
  write_file_atomic(out / "eval.json", engine::eval_json(rep));
  model::save_config(out / "eval_config.txt", run.config);
  write_provenance(out, "eval", run.config, data::dataset_hash(ds.root, ds.manifest));
  for (const auto& r : rep.rows)
    if (r.representation == "avg" || r.representation == "best" || r.representation == "zero")
      std::cout << r.profile << ' ' << r.target << ' ' << r.representation << (r.chosen.empty() ? "" : "(" + r.chosen + ")")
                << ' ' << r.headline_name << ' ' << r.headline() << '\n';
  return 0;
}

int cmd_rollout(const Common& c, const std::string& run_dir) {
  const auto ds = data::load_dataset(data_root(c));
  const auto run = engine::load_run(run_dir, ds.manifest);
  const fs::path out = c.out.empty() ? fs::path(run_dir) : fs::path(c.out);
  fs::create_directories(out);
  const auto text = engine::rollout_csv(engine::rollout_eval(run, ds));
  write_file_atomic(out / "rollout.csv", text);
  write_provenance(out, "rollout", run.config, data::dataset_hash(ds.root, ds.manifest));
  std::cout << text;
  return 0;
}

std::vector<std::uint64_t> seed_list(const Common& c, int count) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < count; ++i) s.push_back((c.seed_given ? c.seed : 0) + static_cast<std::uint64_t>(i));
  return s;
}

int cmd_ablate(const Common& c, int seeds, const std::string& target) {
  const auto base = effective_config(c);
  const auto ds = data::load_dataset(data_root(c));
  const fs::path out = c.out.empty() ? fs::path("hdys-ablate") : fs::path(c.out);
  fs::create_directories(out);
  model::save_config(out / "config.txt", base);
  const auto rep = engine::ablation_suite(base, engine::ablation_grid(ds.manifest, target), seed_list(c, seeds), ds,
                                          out / "runs", c.jobs, [](const engine::RunResult& r) {
                                            std::cerr << r.name << " seed " << r.seed
                                                      << (r.cached ? " (cached)\n" : " trained\n");
                                          });
  write_file_atomic(out / "ablation.csv", engine::ablation_csv(rep));
  Json j;
  j["command"] = "ablate";
  j["seeds"] = seed_list(c, seeds);
  j["config_hash"] = model::config_hash(base);
  j["dataset_hash"] = rep.dataset_hash;
  write_file_atomic(out / "provenance.json", j.dump(2) + "\n");
  std::cout << (out / "ablation.csv").string() << "\n";
  return 0;
}

int cmd_reproduce(const Common& c, const std::string& study) {
  const auto base = effective_config(c);
  const auto ds = data::load_dataset(data_root(c));
  const fs::path out = c.out.empty() ? fs::path("hdys-" + study) : fs::path(c.out);
  fs::create_directories(out);
  model::save_config(out / "config.txt", base);
  std::vector<std::uint64_t> seeds(std::begin(engine::kPinnedSeeds), std::end(engine::kPinnedSeeds));
  if (study == "rollout-table") seeds.resize(1);
  const auto b = engine::reproduce(study, base, ds, out, seeds, c.jobs, [](const std::string& s) { std::cerr << s << "\n"; });
  std::cout << b.csv.string() << "\n" << b.provenance.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdysctl: heterogeneous dynamics space toolkit"};
  app.require_subcommand(1);
  Common c;

  std::uint64_t data_seed = 0;
  int train_count = 48, test_count = 12;
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic multi-profile dataset");
  add_common(gen, c, false);
  gen->add_option("--out", c.out, "dataset directory (default $HDYS_DATA_DIR)");
  gen->add_option("--seed", data_seed, "dataset seed");
  gen->add_option("--train-count", train_count, "training sequences per profile")->check(CLI::NonNegativeNumber);
  gen->add_option("--test-count", test_count, "test sequences per profile")->check(CLI::NonNegativeNumber);

  auto* val = app.add_subcommand("validate", "check a dataset and print per-profile frame counts");
  add_common(val, c, false);

  auto* tr = app.add_subcommand("train", "train a model");
  add_common(tr, c, true);
  tr->add_option("--out", c.out, "run directory");

  std::string run_dir;
  auto* ev = app.add_subcommand("eval", "evaluate a run on the test splits");
  add_common(ev, c, false);
  ev->add_option("--run", run_dir, "run directory")->required();
  ev->add_option("--out", c.out, "report directory (default: the run directory)");

  auto* ro = app.add_subcommand("rollout", "k-step torque rollout benchmark");
  add_common(ro, c, false);
  ro->add_option("--run", run_dir, "run directory")->required();
  ro->add_option("--out", c.out, "report directory (default: the run directory)");

  int seeds = 1;
  std::string target = "A";
  auto* ab = app.add_subcommand("ablate", "run the ablation grid");
  add_common(ab, c, true);
  ab->add_option("--out", c.out, "output directory");
  ab->add_option("--seeds", seeds, "number of consecutive seeds from --seed")->check(CLI::PositiveNumber);
  ab->add_option("--target", target, "profile for the scale-vs-heterogeneity rows");

  std::string study;
  auto* rp = app.add_subcommand("reproduce", "regenerate a study's comparative CSV with pinned seeds");
  add_common(rp, c, true);
  rp->add_option("--out", c.out, "output directory");
  rp->add_option("study", study, "table1-analogue | table2-analogue | rollout-table")
      ->required()
      ->check(CLI::IsMember(engine::study_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen_data(c, data_seed, train_count, test_count);
    if (*val) return cmd_validate(c);
    if (*tr) return cmd_train(c);
    if (*ev) return cmd_eval(c, run_dir);
    if (*ro) return cmd_rollout(c, run_dir);
    if (*ab) return cmd_ablate(c, seeds, target);
    if (*rp) return cmd_reproduce(c, study);
  } catch (const ConfigError& e) {
    std::cerr << "hdysctl: config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "hdysctl: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "hdysctl: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
