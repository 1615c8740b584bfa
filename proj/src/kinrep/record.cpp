#include "hdys/kinrep/record.hpp"

#include "hdys/common/error.hpp"

namespace hdys::kin {
namespace {

constexpr std::array<const char*, kChannelCount> kNames = {"x_m",    "x_k",    "x_a",   "x_s",
                                                           "tau_tr", "tau_ts", "tau_m", "tau_e"};

MatX select_components(const MatX& block, Channel c, bool keep_accel) {
  const int w = entity_width(c);
  if (w == 0) throw ShapeError(std::string("channel ") + channel_name(c) + " has no acceleration layout");
  if (block.cols() % w != 0)
    throw ShapeError(std::string("channel ") + channel_name(c) + " width " + std::to_string(block.cols()) +
                     " is not a multiple of " + std::to_string(w));
  const int per = w / 3;  // components per derivative order
  const auto n = block.cols() / w;
  MatX out(block.rows(), keep_accel ? n * per : n * 2 * per);
  for (Eigen::Index e = 0; e < n; ++e) {
    if (keep_accel)
      out.middleCols(e * per, per) = block.middleCols(e * w + 2 * per, per);
    else
      out.middleCols(e * 2 * per, 2 * per) = block.middleCols(e * w, 2 * per);
  }
  return out;
}

}  // namespace

const char* channel_name(Channel c) { return kNames[index(c)]; }

Channel parse_channel(const std::string& name) {
  for (int i = 0; i < kChannelCount; ++i)
    if (name == kNames[i]) return static_cast<Channel>(i);
  throw ConfigError("unknown channel '" + name + "'");
}

bool is_kinematics(Channel c) { return index(c) < 4; }

int entity_width(Channel c) {
  switch (c) {
    case Channel::Markers:
    case Channel::Keypoints: return 9;
    case Channel::Angles:
    case Channel::Pose: return 3;
    default: return 0;
  }
}

ChannelMask mask_of(std::initializer_list<Channel> channels) {
  ChannelMask m;
  for (Channel c : channels) m.set(index(c));
  return m;
}

std::string mask_string(const ChannelMask& m) {
  std::string out;
  for (int i = 0; i < kChannelCount; ++i)
    if (m.test(i)) out += (out.empty() ? "" : "+") + std::string(kNames[i]);
  return out.empty() ? "none" : out;
}

const MatX& SequenceRecord::at(Channel c) const {
  if (!has(c)) throw ShapeError("sequence '" + id + "' has no " + channel_name(c) + " channel");
  return channels[index(c)];
}

int SequenceRecord::entities(Channel c) const {
  const int w = entity_width(c);
  return w == 0 ? 0 : static_cast<int>(at(c).cols()) / w;
}

FrameSample frame_sample(const SequenceRecord& r, int t) {
  if (t < 0 || t >= r.frames()) throw ShapeError("frame " + std::to_string(t) + " out of range");
  FrameSample s;
  s.time = t;
  s.fps = r.fps;
  s.mass = r.mass;
  s.mask = r.mask;
  s.boundary = r.boundary[t] != 0;
  for (int c = 0; c < kChannelCount; ++c)
    if (r.mask.test(c)) s.values[c] = r.channels[c].row(t).transpose();
  return s;
}

MatX without_acceleration(const MatX& block, Channel c) { return select_components(block, c, false); }
MatX acceleration_part(const MatX& block, Channel c) { return select_components(block, c, true); }

void validate(const SequenceRecord& r) {
  const std::string where = "sequence '" + r.id + "'";
  if (r.frames() < 3) throw FormatError(where + ": fewer than 3 frames");
  if (!(r.fps > 0.0)) throw FormatError(where + ": fps must be positive");
  if (!(r.mass > 0.0)) throw FormatError(where + ": subject mass must be positive");
  bool any_kin = false;
  for (int c = 0; c < kChannelCount; ++c) {
    const Channel ch = static_cast<Channel>(c);
    const MatX& m = r.channels[c];
    if (!r.mask.test(c)) {
      if (m.size() != 0) throw FormatError(where + ": masked-out channel " + channel_name(ch) + " carries data");
      continue;
    }
    any_kin = any_kin || is_kinematics(ch);
    if (m.rows() != r.frames() || m.cols() == 0)
      throw FormatError(where + ": channel " + channel_name(ch) + " has inconsistent shape");
    if (!m.allFinite()) throw FormatError(where + ": channel " + channel_name(ch) + " is not finite");
    const int w = entity_width(ch);
    if (w != 0 && m.cols() % w != 0) throw FormatError(where + ": channel " + channel_name(ch) + " breaks entity layout");
    if (ch == Channel::Muscle && (m.minCoeff() < 0.0 || m.maxCoeff() > 1.0))
      throw FormatError(where + ": muscle actions outside [0,1]");
    if (ch == Channel::Emg && m.minCoeff() < 0.0) throw FormatError(where + ": negative sEMG");
  }
  if (!any_kin) throw FormatError(where + ": no kinematics channel");
}

}  // namespace hdys::kin
