#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hdys/datahub/profile.hpp"

namespace hdys::data {

inline constexpr const char* kManifestSchema = "hdys-manifest/1";

/// Everything needed to regenerate one sequence; per-sequence randomness
/// (motion, marker subset, jitter, sEMG noise) derives from `seed`.
struct SequenceEntry {
  std::string id;
  std::string profile;
  std::uint64_t seed = 0;
  double mass_scale = 1.0;
  double duration = 3.0;
  bool train = true;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::vector<DomainProfile> profiles;
  std::vector<SequenceEntry> sequences;

  const DomainProfile& profile(const std::string& id) const;
  const SequenceEntry& sequence(const std::string& id) const;
  std::vector<std::string> train_ids(const std::string& profile) const;
  std::vector<std::string> test_ids(const std::string& profile) const;
  /// Relative path of a sequence's record file.
  static std::filesystem::path record_path(const SequenceEntry& e);
  /// Checks split disjointness and references. Throws ConfigError.
  void validate() const;
};

/// Draws per-sequence seeds, mass scales and durations for `profiles`.
DatasetManifest plan_manifest(std::vector<DomainProfile> profiles, std::uint64_t seed);

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Exactly `quota` training ids per profile, profile order preserved. Ids are
/// drawn from successive seeded permutations, so a profile with fewer than
/// `quota` sequences repeats ids but covers every one. Deterministic per
/// (seed, epoch).
std::vector<std::string> balanced_epoch_sampler(const DatasetManifest& m, int quota, std::uint64_t seed, int epoch);

/// Keeps round(fraction * n) training ids per profile (seeded prefix of a
/// permutation); a fraction of 0 drops the profile. Test ids are untouched.
DatasetManifest subset_dataset(const DatasetManifest& m, const std::map<std::string, double>& fractions);

/// Fractions for the "target at 50%, others filling 50% of the target
/// volume in proportion to their size" construction.
std::map<std::string, double> fifty_fifty_fractions(const DatasetManifest& m, const std::string& target);

/// FNV-1a over the manifest text and every record file.
std::string dataset_hash(const std::filesystem::path& root, const DatasetManifest& m);

}  // namespace hdys::data
