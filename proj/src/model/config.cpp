#include "hdys/model/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"

namespace hdys::model {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not a number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean (true/false)");
}

struct Entry {
  std::string key;
  std::string doc;
  std::function<std::string(const HDySConfig&)> get;
  std::function<void(HDySConfig&, const std::string&)> set;
};

Entry int_key(std::string key, std::string doc, int HDySConfig::*field) {
  return {key, std::move(doc), [field](const HDySConfig& c) { return std::to_string(c.*field); },
          [field, key](HDySConfig& c, const std::string& v) { c.*field = static_cast<int>(to_int(key, v)); }};
}

Entry real_key(std::string key, std::string doc, double HDySConfig::*field) {
  return {key, std::move(doc), [field](const HDySConfig& c) { return fmt(c.*field); },
          [field, key](HDySConfig& c, const std::string& v) { c.*field = to_double(key, v); }};
}

Entry bool_key(std::string key, std::string doc, bool HDySConfig::*field) {
  return {key, std::move(doc), [field](const HDySConfig& c) { return std::string(c.*field ? "true" : "false"); },
          [field, key](HDySConfig& c, const std::string& v) { c.*field = to_bool(key, v); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(int_key("model.latent_dim", "latent dimension d", &HDySConfig::latent_dim));
    t.push_back(int_key("model.set_width", "token width of the marker/keypoint set encoders", &HDySConfig::set_width));
    t.push_back(int_key("model.set_layers", "set encoder layers", &HDySConfig::set_layers));
    t.push_back(int_key("model.set_heads", "set encoder attention heads", &HDySConfig::set_heads));
    t.push_back(int_key("model.set_ff", "set encoder feed-forward width", &HDySConfig::set_ff));
    t.push_back(int_key("model.mlp_hidden1", "angle/pose encoder first hidden width", &HDySConfig::mlp_hidden1));
    t.push_back(int_key("model.mlp_hidden2", "angle/pose encoder second hidden width", &HDySConfig::mlp_hidden2));
    t.push_back(int_key("model.temporal_layers", "ID decoder transformer layers", &HDySConfig::temporal_layers));
    t.push_back(int_key("model.temporal_heads", "ID decoder transformer heads", &HDySConfig::temporal_heads));
    t.push_back(int_key("model.temporal_ff", "ID decoder feed-forward width", &HDySConfig::temporal_ff));
    t.push_back(int_key("model.head_hidden_small", "hidden width of tau_tr, tau_e, angle and keypoint accel heads",
                        &HDySConfig::head_hidden_small));
    t.push_back(int_key("model.head_hidden_large", "hidden width of tau_ts, tau_m and pose accel heads",
                        &HDySConfig::head_hidden_large));
    t.push_back(int_key("model.dyn_hidden", "FDAE dynamics encoder hidden width", &HDySConfig::dyn_hidden));
    t.push_back(int_key("model.composer_hidden", "FDAE composer hidden width", &HDySConfig::composer_hidden));
    t.push_back(bool_key("model.tie_fdae_encoders", "FDAE reuses the IDAE kinematics encoders (accel zeroed)",
                         &HDySConfig::tie_fdae_encoders));
    t.push_back(real_key("loss.alpha_recon", "weight of the reconstruction loss", &HDySConfig::alpha_recon));
    t.push_back(real_key("loss.alpha_align", "weight of the alignment loss", &HDySConfig::alpha_align));
    t.push_back(real_key("loss.temperature", "contrastive temperature", &HDySConfig::temperature));
    t.push_back({"loss.similarity", "cosine (normalized inner product) or raw",
                 [](const HDySConfig& c) { return std::string(c.similarity == Similarity::Cosine ? "cosine" : "raw"); },
                 [](HDySConfig& c, const std::string& v) {
                   if (v == "cosine")
                     c.similarity = Similarity::Cosine;
                   else if (v == "raw")
                     c.similarity = Similarity::Raw;
                   else
                     throw ConfigError("loss.similarity: '" + v + "' is not cosine or raw");
                 }});
    t.push_back(bool_key("loss.exclude_boundary", "drop one-sided finite-difference frames from L_recon",
                         &HDySConfig::exclude_boundary));
    t.push_back(bool_key("ablation.no_fdae", "remove the forward-dynamics auto-encoder", &HDySConfig::no_fdae));
    t.push_back(bool_key("ablation.no_align", "drop the alignment loss", &HDySConfig::no_align));
    t.push_back(bool_key("ablation.no_temporal_refinement", "heads read per-frame latents directly",
                         &HDySConfig::no_temporal_refinement));
    t.push_back({"data.channels", "enabled channels, comma separated",
                 [](const HDySConfig& c) {
                   std::string out;
                   for (int i = 0; i < kin::kChannelCount; ++i)
                     if (c.channels.test(i)) out += (out.empty() ? "" : ",") + std::string(kin::channel_name(static_cast<kin::Channel>(i)));
                   return out;
                 },
                 [](HDySConfig& c, const std::string& v) {
                   kin::ChannelMask m;
                   try {
                     for (const auto& name : split(v, ',')) m.set(kin::index(kin::parse_channel(name)));
                   } catch (const Error& e) {
                     throw ConfigError(std::string("data.channels: ") + e.what());
                   }
                   c.channels = m;
                 }});
    t.push_back(int_key("data.window", "frames per training window", &HDySConfig::window));
    t.push_back(int_key("data.stride", "spacing of window starts", &HDySConfig::stride));
    t.push_back(int_key("train.epochs", "training epochs", &HDySConfig::epochs));
    t.push_back(int_key("train.frames_per_batch", "frames per optimizer step", &HDySConfig::frames_per_batch));
    t.push_back(int_key("train.quota", "sequences drawn per profile per epoch", &HDySConfig::quota));
    t.push_back(real_key("train.lr", "AdamW learning rate", &HDySConfig::lr));
    t.push_back(real_key("train.weight_decay", "AdamW decoupled weight decay", &HDySConfig::weight_decay));
    t.push_back(real_key("train.warmup", "fraction of steps with a linear learning-rate ramp", &HDySConfig::warmup));
    t.push_back(bool_key("train.cosine_decay", "cosine learning-rate decay to zero", &HDySConfig::cosine_decay));
    t.push_back({"train.seed", "seed for initialization, sampling and windows",
                 [](const HDySConfig& c) { return std::to_string(c.seed); },
                 [](HDySConfig& c, const std::string& v) {
                   const auto n = to_int("train.seed", v);
                   if (n < 0) throw ConfigError("train.seed must be non-negative");
                   c.seed = static_cast<std::uint64_t>(n);
                 }});
    t.push_back({"train.fractions", "per-profile training fractions, e.g. A=0.5,B=0 (empty: all)",
                 [](const HDySConfig& c) { return c.fractions; },
                 [](HDySConfig& c, const std::string& v) {
                   parse_fractions(v);
                   c.fractions = v;
                 }});
    t.push_back({"rollout.k", "rollout horizons",
                 [](const HDySConfig& c) {
                   std::string out;
                   for (int k : c.rollout_k) out += (out.empty() ? "" : ",") + std::to_string(k);
                   return out;
                 },
                 [](HDySConfig& c, const std::string& v) {
                   c.rollout_k.clear();
                   for (const auto& s : split(v, ',')) c.rollout_k.push_back(static_cast<int>(to_int("rollout.k", s)));
                 }});
    t.push_back({"rollout.fps", "rollout frame rates",
                 [](const HDySConfig& c) {
                   std::string out;
                   for (double f : c.rollout_fps) out += (out.empty() ? "" : ",") + fmt(f);
                   return out;
                 },
                 [](HDySConfig& c, const std::string& v) {
                   c.rollout_fps.clear();
                   for (const auto& s : split(v, ',')) c.rollout_fps.push_back(to_double("rollout.fps", s));
                 }});
    t.push_back(int_key("rollout.start_stride", "frames between rollout start frames", &HDySConfig::rollout_start_stride));
    return t;
  }();
  return table;
}

const Entry& entry(const std::string& key) {
  for (const auto& e : entries())
    if (e.key == key) return e;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void HDySConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  need(latent_dim > 0 && set_width > 0 && set_ff > 0 && temporal_ff > 0, "widths must be positive");
  need(set_layers >= 1 && temporal_layers >= 1, "layer counts must be at least 1");
  need(set_heads > 0 && set_width % set_heads == 0, "model.set_width must be divisible by model.set_heads");
  need(temporal_heads > 0 && latent_dim % temporal_heads == 0,
       "model.latent_dim must be divisible by model.temporal_heads");
  need(mlp_hidden1 > 0 && mlp_hidden2 > 0 && head_hidden_small > 0 && head_hidden_large > 0 && dyn_hidden > 0 &&
           composer_hidden > 0,
       "hidden widths must be positive");
  need(alpha_recon >= 0.0 && alpha_align >= 0.0, "loss weights must be non-negative");
  need(temperature > 0.0, "loss.temperature must be positive");
  need(window >= 1, "data.window must be at least 1");
  need(stride >= 1, "data.stride must be at least 1");
  need(epochs >= 0, "train.epochs must be non-negative");
  need(frames_per_batch >= window, "train.frames_per_batch must be at least data.window");
  need(quota >= 1, "train.quota must be at least 1");
  need(lr > 0.0 && weight_decay >= 0.0, "optimizer settings out of range");
  need(warmup >= 0.0 && warmup < 1.0, "train.warmup must lie in [0, 1)");
  bool kin = false;
  for (auto c : kin::kKinematicsChannels) kin = kin || channel(c);
  need(kin, "data.channels must enable a kinematics channel");
  for (int k : rollout_k) need(k >= 1, "rollout.k entries must be at least 1");
  for (double f : rollout_fps) need(f > 0.0, "rollout.fps entries must be positive");
  need(rollout_start_stride >= 1, "rollout.start_stride must be at least 1");
}

HDySConfig desk_config() { return HDySConfig{}; }

HDySConfig paper_config() {
  HDySConfig c;
  c.preset = "paper";
  c.latent_dim = 128;
  c.set_width = 128;
  c.set_ff = 256;
  c.temporal_ff = 256;
  c.epochs = 1000;
  c.frames_per_batch = 9600;
  c.quota = 3000;
  return c;
}

HDySConfig preset_config(const std::string& name) {
  if (name == "desk") return desk_config();
  if (name == "paper") return paper_config();
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back({e.key, e.doc});
    return out;
  }();
  return keys;
}

std::string config_to_text(const HDySConfig& cfg) {
  std::string out = "schema = " + std::string(kConfigSchema) + "\npreset = " + cfg.preset + "\n";
  for (const auto& e : entries()) out += e.key + " = " + e.get(cfg) + "\n";
  return out;
}

HDySConfig config_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  HDySConfig cfg;
  bool schema = false, body = false;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "schema") {
      if (value != kConfigSchema)
        throw ConfigError("config schema '" + value + "' is not supported (expected " + kConfigSchema + ")");
      schema = true;
    } else if (key == "preset") {
      if (body) throw ConfigError("config line " + std::to_string(n) + ": preset must precede other keys");
      cfg = preset_config(value);
    } else {
      entry(key).set(cfg, value);
      body = true;
    }
  }
  if (!schema) throw ConfigError(std::string("config is missing the 'schema = ") + kConfigSchema + "' line");
  cfg.validate();
  return cfg;
}

HDySConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return config_from_text(read_file(path));
}

void save_config(const std::filesystem::path& path, const HDySConfig& cfg) {
  write_file_atomic(path, config_to_text(cfg));
}

void apply_override(HDySConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq)), value = trim(assignment.substr(eq + 1));
  if (key == "preset") {
    cfg = preset_config(value);
    return;
  }
  entry(key).set(cfg, value);
}

std::string get_value(const HDySConfig& cfg, const std::string& key) { return entry(key).get(cfg); }

std::string config_hash(const HDySConfig& cfg) { return hex64(fnv1a64(config_to_text(cfg))); }

std::vector<std::pair<std::string, double>> parse_fractions(const std::string& spec) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& item : split(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("train.fractions: '" + item + "' is not PROFILE=fraction");
    const double f = to_double("train.fractions", trim(item.substr(eq + 1)));
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("train.fractions: fraction for " + item + " outside [0,1]");
    out.emplace_back(trim(item.substr(0, eq)), f);
  }
  return out;
}

}  // namespace hdys::model
