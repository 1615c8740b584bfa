#include "hdys/engine/reproduce.hpp"

#include <sstream>

#include <json.hpp>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"

namespace hdys::engine {
namespace {

using Json = nlohmann::ordered_json;

void say(const std::function<void(const std::string&)>& log, const std::string& s) {
  if (log) log(s);
}

Json run_list(const AblationReport& rep) {
  Json a = Json::array();
  for (const auto& r : rep.runs)
    a.push_back({{"run", r.name}, {"seed", r.seed}, {"config_hash", r.config_hash}, {"checkpoint", r.eval.checkpoint}});
  return a;
}

}  // namespace

const std::vector<std::string>& study_names() {
  static const std::vector<std::string> names = {"table1-analogue", "table2-analogue", "rollout-table"};
  return names;
}

std::map<std::string, double> median_headline(const AblationReport& report, const std::string& profile) {
  std::map<std::string, std::vector<double>> by_run;
  for (const auto& r : report.runs)
    if (r.eval.has(profile, "avg")) by_run[r.name].push_back(r.eval.row(profile, "avg").headline());
  std::map<std::string, double> out;
  for (auto& [name, v] : by_run) out[name] = median(v);
  return out;
}

Bundle reproduce(const std::string& study, const model::HDySConfig& base, const data::Dataset& data,
                 const std::filesystem::path& out, const std::vector<std::uint64_t>& seeds, int jobs,
                 const std::function<void(const std::string&)>& log) {
  if (seeds.empty()) throw ConfigError("reproduce needs at least one seed");
  std::filesystem::create_directories(out);
  const auto cache = out / "runs";
  Json prov;
  prov["study"] = study;
  prov["seeds"] = seeds;
  prov["config_hash"] = model::config_hash(base);
  prov["dataset_hash"] = data::dataset_hash(data.root, data.manifest);
  auto progress = [&](const RunResult& r) {
    say(log, r.name + " seed " + std::to_string(r.seed) + (r.cached ? " (cached)" : " trained"));
  };

  Bundle b;
  if (study == "table1-analogue" || study == "table2-analogue") {
    std::vector<AblationRun> grid;
    if (study == "table1-analogue") {
      grid = ablation_grid(data.manifest, "A");
    } else {
      grid = {{"full", {}}};
      for (auto& r : scale_grid(data.manifest, "A")) grid.push_back(std::move(r));
    }
    const auto rep = ablation_suite(base, grid, seeds, data, cache, jobs, progress);
    b.csv = out / (study == "table1-analogue" ? "table1.csv" : "table2.csv");
    b.csv_text = ablation_csv(rep);
    prov["runs"] = run_list(rep);
    const auto med = median_headline(rep, "A");
    Json h;
    for (const auto& [name, v] : med) h[name] = v;
    prov["median_A"] = h;
  } else if (study == "rollout-table") {
    std::ostringstream csv;
    Json runs = Json::array();
    bool header = true;
    for (auto seed : seeds) {
      auto cfg = base;
      cfg.seed = seed;
      const auto trained = train_and_evaluate("full", cfg, data, cache);
      say(log, "full seed " + std::to_string(seed) + (trained.cached ? " (cached)" : " trained"));
      const auto dir = cache / (trained.config_hash + "-" + prov["dataset_hash"].get<std::string>());
      const auto run = load_run(dir, data.manifest);
      const auto text = rollout_csv(rollout_eval(run, data));
      std::istringstream lines(text);
      std::string line;
      std::getline(lines, line);
      if (header) csv << "seed," << line << '\n';
      header = false;
      while (std::getline(lines, line)) csv << seed << ',' << line << '\n';
      runs.push_back({{"run", "full"}, {"seed", seed}, {"config_hash", trained.config_hash},
                      {"checkpoint", trained.eval.checkpoint}});
    }
    b.csv = out / "rollout_table.csv";
    b.csv_text = csv.str();
    prov["runs"] = runs;
  } else {
    throw ConfigError("unknown study '" + study + "' (expected table1-analogue, table2-analogue or rollout-table)");
  }
  prov["csv"] = b.csv.filename().string();
  prov["csv_hash"] = hex64(fnv1a64(b.csv_text));
  write_file_atomic(b.csv, b.csv_text);
  b.provenance = out / "provenance.json";
  write_file_atomic(b.provenance, prov.dump(2) + "\n");
  return b;
}

}  // namespace hdys::engine
