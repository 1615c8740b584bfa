#include "hdys/datahub/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"

namespace hdys::data {
namespace {

using nlohmann::json;

json mask_json(const kin::ChannelMask& m) {
  json out = json::array();
  for (int c = 0; c < kin::kChannelCount; ++c)
    if (m.test(c)) out.push_back(kin::channel_name(static_cast<kin::Channel>(c)));
  return out;
}

kin::ChannelMask mask_from(const json& j) {
  kin::ChannelMask m;
  for (const auto& name : j) m.set(kin::index(kin::parse_channel(name.get<std::string>())));
  return m;
}

json profile_json(const DomainProfile& p) {
  return {{"id", p.id},
          {"name", p.name},
          {"tree", p.tree},
          {"kinematics", mask_json(p.kinematics)},
          {"dynamics", mask_json(p.dynamics)},
          {"family", family_name(p.family)},
          {"amplitude", {p.ranges.amplitude_min, p.ranges.amplitude_max}},
          {"frequency", {p.ranges.frequency_min, p.ranges.frequency_max}},
          {"jitter_sigma", p.jitter_sigma},
          {"train_count", p.train_count},
          {"test_count", p.test_count},
          {"fps", p.fps},
          {"duration", {p.duration_min, p.duration_max}},
          {"markers", {p.markers_min, p.markers_max}},
          {"mass_scale", {p.mass_scale_min, p.mass_scale_max}},
          {"train_enabled", p.train_enabled}};
}

DomainProfile profile_from(const json& j) {
  DomainProfile p;
  p.id = j.at("id").get<std::string>();
  p.name = j.at("name").get<std::string>();
  p.tree = j.at("tree").get<std::string>();
  p.kinematics = mask_from(j.at("kinematics"));
  p.dynamics = mask_from(j.at("dynamics"));
  p.family = parse_family(j.at("family").get<std::string>());
  p.ranges = {j.at("amplitude")[0], j.at("amplitude")[1], j.at("frequency")[0], j.at("frequency")[1]};
  p.jitter_sigma = j.at("jitter_sigma");
  p.train_count = j.at("train_count");
  p.test_count = j.at("test_count");
  p.fps = j.at("fps");
  p.duration_min = j.at("duration")[0];
  p.duration_max = j.at("duration")[1];
  p.markers_min = j.at("markers")[0];
  p.markers_max = j.at("markers")[1];
  p.mass_scale_min = j.at("mass_scale")[0];
  p.mass_scale_max = j.at("mass_scale")[1];
  p.train_enabled = j.at("train_enabled");
  return p;
}

// Seeded permutation of 0..n-1.
std::vector<int> permutation(int n, std::uint64_t seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

std::uint64_t tag_of(const std::string& s) { return fnv1a64(s); }

}  // namespace

const DomainProfile& DatasetManifest::profile(const std::string& id) const {
  for (const auto& p : profiles)
    if (p.id == id) return p;
  throw ConfigError("manifest has no profile '" + id + "'");
}

const SequenceEntry& DatasetManifest::sequence(const std::string& id) const {
  for (const auto& s : sequences)
    if (s.id == id) return s;
  throw ConfigError("manifest has no sequence '" + id + "'");
}

std::vector<std::string> DatasetManifest::train_ids(const std::string& profile) const {
  std::vector<std::string> out;
  for (const auto& s : sequences)
    if (s.profile == profile && s.train) out.push_back(s.id);
  return out;
}

std::vector<std::string> DatasetManifest::test_ids(const std::string& profile) const {
  std::vector<std::string> out;
  for (const auto& s : sequences)
    if (s.profile == profile && !s.train) out.push_back(s.id);
  return out;
}

std::filesystem::path DatasetManifest::record_path(const SequenceEntry& e) {
  return std::filesystem::path(e.profile) / (e.id + ".rec");
}

void DatasetManifest::validate() const {
  std::set<std::string> profile_ids, seq_ids;
  for (const auto& p : profiles) {
    p.validate();
    if (!profile_ids.insert(p.id).second) throw ConfigError("duplicate profile '" + p.id + "'");
  }
  for (const auto& s : sequences) {
    if (!seq_ids.insert(s.id).second) throw ConfigError("sequence '" + s.id + "' assigned more than once");
    if (!profile_ids.count(s.profile)) throw ConfigError("sequence '" + s.id + "' references unknown profile");
    if (!(s.mass_scale > 0.0) || !(s.duration > 0.0)) throw ConfigError("sequence '" + s.id + "' has invalid scale");
  }
}

DatasetManifest plan_manifest(std::vector<DomainProfile> profiles, std::uint64_t seed) {
  DatasetManifest m;
  m.seed = seed;
  m.profiles = std::move(profiles);
  for (const auto& p : m.profiles) {
    p.validate();
    std::mt19937_64 rng(mix_seed(seed, tag_of(p.id)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int total = p.train_count + p.test_count;
    for (int i = 0; i < total; ++i) {
      SequenceEntry e;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-%04d", p.id.c_str(), i);
      e.id = buf;
      e.profile = p.id;
      e.seed = rng();
      e.mass_scale = p.mass_scale_min + (p.mass_scale_max - p.mass_scale_min) * unit(rng);
      e.duration = p.duration_min + (p.duration_max - p.duration_min) * unit(rng);
      e.train = i < p.train_count;
      m.sequences.push_back(e);
    }
  }
  m.validate();
  return m;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json doc;
  doc["schema"] = kManifestSchema;
  doc["seed"] = m.seed;
  json profiles = json::array();
  for (const auto& p : m.profiles) profiles.push_back(profile_json(p));
  doc["profiles"] = profiles;
  json seqs = json::array();
  for (const auto& s : m.sequences)
    seqs.push_back({{"id", s.id},
                    {"profile", s.profile},
                    {"seed", s.seed},
                    {"mass_scale", s.mass_scale},
                    {"duration", s.duration},
                    {"split", s.train ? "train" : "test"},
                    {"file", DatasetManifest::record_path(s).generic_string()}});
  doc["sequences"] = seqs;
  return doc.dump(1);
}

DatasetManifest manifest_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("schema", std::string()) != kManifestSchema)
      throw FormatError(std::string("manifest: expected schema '") + kManifestSchema + "'");
    DatasetManifest m;
    m.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& p : doc.at("profiles")) m.profiles.push_back(profile_from(p));
    for (const auto& j : doc.at("sequences")) {
      SequenceEntry e;
      e.id = j.at("id");
      e.profile = j.at("profile");
      e.seed = j.at("seed").get<std::uint64_t>();
      e.mass_scale = j.at("mass_scale");
      e.duration = j.at("duration");
      const std::string split = j.at("split");
      if (split != "train" && split != "test") throw FormatError("manifest: bad split '" + split + "'");
      e.train = split == "train";
      m.sequences.push_back(e);
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  write_file_atomic(path, manifest_to_json(m));
}

DatasetManifest load_manifest(const std::filesystem::path& path) { return manifest_from_json(read_file(path)); }

std::vector<std::string> balanced_epoch_sampler(const DatasetManifest& m, int quota, std::uint64_t seed, int epoch) {
  if (quota <= 0) throw ConfigError("sampler quota must be positive");
  std::vector<std::string> out;
  for (const auto& p : m.profiles) {
    if (!p.train_enabled) continue;
    const auto ids = m.train_ids(p.id);
    if (ids.empty()) throw ConfigError("profile '" + p.id + "' has no training sequences");
    const std::uint64_t base = mix_seed(mix_seed(seed, static_cast<std::uint64_t>(epoch)), tag_of(p.id));
    int drawn = 0;
    for (std::uint64_t pass = 0; drawn < quota; ++pass) {
      for (int i : permutation(static_cast<int>(ids.size()), mix_seed(base, pass))) {
        if (drawn == quota) break;
        out.push_back(ids[i]);
        ++drawn;
      }
    }
  }
  return out;
}

DatasetManifest subset_dataset(const DatasetManifest& m, const std::map<std::string, double>& fractions) {
  DatasetManifest out = m;
  for (const auto& [id, f] : fractions) {
    (void)out.profile(id);
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("subset fraction for '" + id + "' must lie in [0,1]");
  }
  std::set<std::string> dropped;
  for (auto& p : out.profiles) {
    const auto it = fractions.find(p.id);
    if (it == fractions.end() || it->second == 1.0) continue;
    const auto ids = m.train_ids(p.id);
    if (it->second == 0.0) {
      p.train_enabled = false;
      dropped.insert(ids.begin(), ids.end());
      continue;
    }
    const auto keep = static_cast<int>(std::llround(it->second * static_cast<double>(ids.size())));
    if (keep == 0) throw ConfigError("subset fraction for '" + p.id + "' keeps zero sequences");
    const auto perm = permutation(static_cast<int>(ids.size()), mix_seed(m.seed, tag_of("subset:" + p.id)));
    for (std::size_t i = keep; i < perm.size(); ++i) dropped.insert(ids[perm[i]]);
  }
  std::erase_if(out.sequences, [&](const SequenceEntry& s) { return dropped.count(s.id) > 0; });
  return out;
}

std::map<std::string, double> fifty_fifty_fractions(const DatasetManifest& m, const std::string& target) {
  const double n_target = static_cast<double>(m.train_ids(target).size());
  double n_other = 0.0;
  for (const auto& p : m.profiles)
    if (p.id != target && p.train_enabled) n_other += static_cast<double>(m.train_ids(p.id).size());
  std::map<std::string, double> out;
  for (const auto& p : m.profiles) {
    if (p.id == target)
      out[p.id] = 0.5;
    else if (n_other > 0.0)
      out[p.id] = std::min(1.0, 0.5 * n_target / n_other);
  }
  return out;
}

std::string dataset_hash(const std::filesystem::path& root, const DatasetManifest& m) {
  std::uint64_t h = fnv1a64(manifest_to_json(m));
  for (const auto& s : m.sequences) h = fnv1a64(read_file(root / DatasetManifest::record_path(s)), h);
  return hex64(h);
}

}  // namespace hdys::data
