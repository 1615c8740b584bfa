#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hdys/engine/evaluate.hpp"

namespace hdys::engine {

/// One grid entry: a name and the overrides applied on top of the base.
struct AblationRun {
  std::string name;
  std::vector<std::string> overrides;
};

/// full, <P>-only and without-<P> for every profile, no_align, no_fdae,
/// no_temporal_refinement, d32/d64/d128 and the three scale-vs-heterogeneity
/// variants for `target` (single-50, 50/50, single).
std::vector<AblationRun> ablation_grid(const data::DatasetManifest& m, const std::string& target = "A");

/// Scale-vs-heterogeneity subset of the grid.
std::vector<AblationRun> scale_grid(const data::DatasetManifest& m, const std::string& target = "A");

model::HDySConfig apply_run(const model::HDySConfig& base, const AblationRun& run);

struct RunResult {
  std::string name;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::size_t parameters = 0;
  std::size_t seen_frames = 0;
  bool cached = false;
  EvalReport eval;
};

/// Trains (or reuses) and evaluates a config. Runs are cached under
/// `cache_dir/<config hash>-<dataset hash>`; an empty path disables caching.
RunResult train_and_evaluate(const std::string& name, const model::HDySConfig& cfg, const data::Dataset& data,
                             const std::filesystem::path& cache_dir);

struct AblationReport {
  std::string dataset_hash;
  std::vector<RunResult> runs;
};

/// Every run for every seed; `jobs` runs train concurrently.
AblationReport ablation_suite(const model::HDySConfig& base, const std::vector<AblationRun>& grid,
                              const std::vector<std::uint64_t>& seeds, const data::Dataset& data,
                              const std::filesystem::path& cache_dir, int jobs = 1,
                              const std::function<void(const RunResult&)>& progress = {});

/// run,seed,config_hash,parameters,seen_frames,profile,target,avg_<headline>,best,best_representation,zero,latent_cosine
std::string ablation_csv(const AblationReport& report);

double median(std::vector<double> v);

}  // namespace hdys::engine
