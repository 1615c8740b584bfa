#include "hdys/datahub/generate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"
#include "hdys/datahub/record_io.hpp"
#include "hdys/datahub/standard.hpp"
#include "hdys/kinrep/representations.hpp"

namespace hdys::data {
namespace {

enum SeedTag : std::uint64_t { kMotion = 1, kMarkers = 2, kJitter = 3, kEmg = 4 };

}  // namespace

RealizedSequence realize(const DomainProfile& profile, const SequenceEntry& entry, double fps) {
  const auto base = standard_tree(profile.tree);
  RealizedSequence out{base.scaled(entry.mass_scale), {}, {}};
  const MotionModel motion(profile.family, profile.ranges, base.dof(), entry.duration, mix_seed(entry.seed, kMotion));
  out.trajectory = motion.sample(fps);

  std::mt19937_64 rng(mix_seed(entry.seed, kMarkers));
  const int sites = static_cast<int>(base.markers().size());
  const int hi = std::min(profile.markers_max, sites), lo = std::min(profile.markers_min, hi);
  const int count = std::uniform_int_distribution<int>(lo, hi)(rng);
  std::vector<int> all(sites);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  out.marker_subset.assign(all.begin(), all.begin() + count);
  std::sort(out.marker_subset.begin(), out.marker_subset.end());
  return out;
}

kin::SequenceRecord generate_sequence(const DatasetManifest& m, const SequenceEntry& entry, double fps) {
  const DomainProfile& p = m.profile(entry.profile);
  if (fps <= 0.0) fps = p.fps;
  auto seq = realize(p, entry, fps);
  kin::BuildOptions opt{p.jitter_sigma, mix_seed(entry.seed, kJitter)};
  auto rec = kin::build_representations(seq.tree, seq.trajectory, seq.marker_subset, p.kinematics, fps, opt);
  rec.id = entry.id;
  rec.profile = p.id;
  if (p.has_dynamics()) {
    kin::DynamicsRequest req;
    req.kinds = p.dynamics;
    req.seed = mix_seed(entry.seed, kEmg);
    rbd::MuscleSet muscles;
    if (p.dynamics.test(kin::index(kin::Channel::Muscle)) || p.dynamics.test(kin::index(kin::Channel::Emg))) {
      muscles = standard_muscles(standard_tree(p.tree));
      req.muscles = &muscles;
      req.emg_muscles = emg_electrodes();
    }
    kin::attach_dynamics(rec, seq.tree, req);
  }
  return rec;
}

void generate_dataset(const DatasetManifest& m, const std::filesystem::path& root, int jobs) {
  m.validate();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < m.sequences.size(); i = next++) {
      try {
        const auto& e = m.sequences[i];
        write_record(root / DatasetManifest::record_path(e), generate_sequence(m, e));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = m.sequences.size();
      }
    }
  };
  const int n = std::max(1, jobs);
  std::vector<std::thread> threads;
  for (int t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  save_manifest(root / "manifest.json", m);
}

const kin::SequenceRecord& Dataset::record(const std::string& id) const {
  const auto it = records.find(id);
  if (it == records.end()) throw ConfigError("sequence '" + id + "' is not loaded");
  return it->second;
}

Dataset load_dataset(const std::filesystem::path& root, const std::vector<std::string>& ids) {
  const auto manifest_path = root / "manifest.json";
  if (!std::filesystem::exists(manifest_path))
    throw IoError("no dataset at " + root.string() + " (run `hdysctl gen-data --out " + root.string() + "` first)");
  Dataset d{root, load_manifest(manifest_path), {}};
  auto load = [&](const SequenceEntry& e) {
    auto r = read_record(root / DatasetManifest::record_path(e));
    if (r.id != e.id || r.profile != e.profile) throw FormatError("record " + e.id + " does not match the manifest");
    d.records.emplace(e.id, std::move(r));
  };
  if (ids.empty())
    for (const auto& e : d.manifest.sequences) load(e);
  else
    for (const auto& id : ids) load(d.manifest.sequence(id));
  return d;
}

std::filesystem::path default_data_root() {
  const char* env = std::getenv("HDYS_DATA_DIR");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("hdys-data");
}

}  // namespace hdys::data
