#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hdys/engine/ablation.hpp"
#include "hdys/engine/rollout.hpp"

namespace hdys::engine {

inline constexpr std::uint64_t kPinnedSeeds[] = {0, 1, 2};

/// "table1-analogue", "table2-analogue" or "rollout-table".
const std::vector<std::string>& study_names();

struct Bundle {
  std::filesystem::path csv;
  std::filesystem::path provenance;
  std::string csv_text;
};

/// Median over seeds of the averaged-prediction headline metric for one
/// profile, per run name.
std::map<std::string, double> median_headline(const AblationReport& report, const std::string& profile);

/// Regenerates one study's comparative CSV under `out` plus provenance.json
/// (seeds, config hash, dataset hash, per-run hashes). Trained runs are
/// cached under out/runs.
Bundle reproduce(const std::string& study, const model::HDySConfig& base, const data::Dataset& data,
                 const std::filesystem::path& out, const std::vector<std::uint64_t>& seeds, int jobs = 1,
                 const std::function<void(const std::string&)>& log = {});

}  // namespace hdys::engine
