#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hdys/datahub/manifest.hpp"
#include "hdys/kinrep/record.hpp"
#include "hdys/rbd/tree.hpp"

namespace hdys::data {

/// A sequence's oracle ingredients at a chosen sampling rate.
struct RealizedSequence {
  rbd::KinematicTree tree;  // mass-scaled
  kin::Trajectory trajectory;
  std::vector<int> marker_subset;
};

RealizedSequence realize(const DomainProfile& profile, const SequenceEntry& entry, double fps);

/// Builds one record: kinematics, jitter, then oracle dynamics labels. Labels
/// come from the noise-free trajectory. Keeps the oracle trajectory attached.
/// `fps` <= 0 uses the profile rate.
kin::SequenceRecord generate_sequence(const DatasetManifest& m, const SequenceEntry& entry, double fps = 0.0);

/// Writes every record and then manifest.json under `root`. `jobs` > 1
/// generates sequences on that many threads.
void generate_dataset(const DatasetManifest& m, const std::filesystem::path& root, int jobs = 1);

struct Dataset {
  std::filesystem::path root;
  DatasetManifest manifest;
  std::map<std::string, kin::SequenceRecord> records;

  const kin::SequenceRecord& record(const std::string& id) const;
};

/// Loads the manifest and the records it lists (all when `ids` is empty).
Dataset load_dataset(const std::filesystem::path& root, const std::vector<std::string>& ids = {});

/// $HDYS_DATA_DIR, or ./hdys-data.
std::filesystem::path default_data_root();

}  // namespace hdys::data
