#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "hdys/common/error.hpp"
#include "hdys/common/util.hpp"
#include "hdys/datahub/generate.hpp"
#include "hdys/datahub/record_io.hpp"
#include "hdys/datahub/standard.hpp"
#include "hdys/kinrep/representations.hpp"
#include "hdys/rbd/dynamics.hpp"

namespace hdys::data {
namespace {

namespace fs = std::filesystem;
using kin::Channel;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hdys_datahub_" + name);
  fs::remove_all(p);
  return p;
}

DatasetManifest small_manifest(int train, int test, std::uint64_t seed = 5) {
  auto profiles = default_profiles(train, test);
  for (auto& p : profiles) p.duration_min = p.duration_max = 0.5;
  return plan_manifest(profiles, seed);
}

TEST(StandardTrees, ShapesAndCounts) {
  const auto t1 = tree_t1(), t2 = tree_t2();
  EXPECT_EQ(t1.links().size(), 9u);
  EXPECT_EQ(t1.dof(), 23);
  EXPECT_TRUE(t1.fixed_base());
  EXPECT_EQ(t1.markers().size(), 40u);
  EXPECT_EQ(t2.links().size(), 12u);
  EXPECT_EQ(t2.dof(), 18);
  EXPECT_EQ(t2.markers().size(), 48u);
  EXPECT_EQ(standard_muscles(t1).count(), 2 * 23 + 4);
  EXPECT_EQ(standard_muscles(t2).count(), 2 * 18 + 4);
  EXPECT_EQ(emg_electrodes().size(), 8u);
  EXPECT_THROW(standard_tree("T3"), ConfigError);
}

TEST(Motion, AnalyticDerivativesAgreeWithFiniteDifferences) {
  for (auto family : {MotionFamily::PeriodicGait, MotionFamily::Reach, MotionFamily::RandomSpline}) {
    const MotionModel m(family, {0.1, 0.5, 0.5, 1.5}, 5, 2.0, 17);
    const double fps = 2000.0;
    const auto tr = m.sample(fps);
    const auto [v, a] = kin::finite_difference(tr.q, fps);
    for (int t = 1; t + 1 < tr.frames(); t += 97) {
      EXPECT_LT((v.row(t) - tr.qd.row(t)).cwiseAbs().maxCoeff(), 1e-4) << family_name(family);
      EXPECT_LT((a.row(t) - tr.qdd.row(t)).cwiseAbs().maxCoeff(), 1e-3) << family_name(family);
    }
  }
}

TEST(Motion, ResamplingHitsTheSameCurve) {
  const MotionModel m(MotionFamily::Reach, {0.1, 0.5, 0.6, 1.2}, 4, 3.0, 9);
  const auto a = m.sample(90.0), b = m.sample(180.0);
  EXPECT_EQ(a.frames(), 270);
  for (int t = 0; t < a.frames(); ++t) EXPECT_LT((a.q.row(t) - b.q.row(2 * t)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Generate, ProfileMasksMatchContract) {
  const auto m = small_manifest(1, 0);
  const std::map<std::string, kin::ChannelMask> expected = {
      {"A", kin::mask_of({Channel::Markers, Channel::Keypoints, Channel::Angles, Channel::TorqueAngleTree})},
      {"B", kin::mask_of({Channel::Markers, Channel::Keypoints, Channel::Pose, Channel::TorquePoseTree})},
      {"C", kin::mask_of({Channel::Markers, Channel::Keypoints, Channel::Pose, Channel::Muscle})},
      {"D", kin::mask_of({Channel::Markers, Channel::Keypoints, Channel::Emg})},
      {"E", kin::mask_of({Channel::Markers, Channel::Keypoints, Channel::Pose})}};
  for (const auto& e : m.sequences) {
    const auto r = generate_sequence(m, e);
    EXPECT_EQ(r.mask, expected.at(e.profile)) << e.profile << ": " << kin::mask_string(r.mask);
    for (int t = 0; t < r.frames(); ++t) EXPECT_EQ(kin::frame_sample(r, t).mask, expected.at(e.profile));
    const int markers = r.entities(Channel::Markers);
    EXPECT_GE(markers, 20);
    EXPECT_LE(markers, 40);
  }
}

TEST(Generate, TorqueWidthIsActuatedDof) {
  const auto m = small_manifest(1, 0);
  EXPECT_EQ(generate_sequence(m, m.sequence("A-0000")).at(Channel::TorqueAngleTree).cols(), 23);
  EXPECT_EQ(generate_sequence(m, m.sequence("B-0000")).at(Channel::TorquePoseTree).cols(), 18);
  EXPECT_EQ(generate_sequence(m, m.sequence("D-0000")).at(Channel::Emg).cols(), 8);
}

TEST(Generate, MuscleLabelsReplayOracleTorques) {
  const auto m = small_manifest(3, 0);
  const auto& p = m.profile("C");
  const auto muscles = standard_muscles(standard_tree("T2"));
  for (const auto& id : m.train_ids("C")) {
    const auto r = generate_sequence(m, m.sequence(id));
    const auto seq = realize(p, m.sequence(id), p.fps);
    for (int t = 0; t < r.frames(); ++t) {
      const rbd::GeneralizedState s{seq.trajectory.q.row(t).transpose(), seq.trajectory.qd.row(t).transpose(),
                                    seq.trajectory.qdd.row(t).transpose()};
      const auto tau = rbd::rnea(seq.tree, s);
      const auto replay = rbd::muscle_to_torque(muscles, r.at(Channel::Muscle).row(t).transpose());
      EXPECT_LE((replay - tau).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(Generate, SameSeedIsByteIdentical) {
  const auto m = small_manifest(2, 1);
  const auto a = scratch("det_a"), b = scratch("det_b");
  generate_dataset(m, a, 2);
  generate_dataset(m, b, 1);
  for (const auto& e : m.sequences)
    EXPECT_EQ(read_file(a / DatasetManifest::record_path(e)), read_file(b / DatasetManifest::record_path(e))) << e.id;
  EXPECT_EQ(read_file(a / "manifest.json"), read_file(b / "manifest.json"));
  EXPECT_EQ(dataset_hash(a, m), dataset_hash(b, m));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(RecordIo, RoundTripIsBitExact) {
  const auto m = small_manifest(1, 0);
  for (const auto& e : m.sequences) {
    const auto r = generate_sequence(m, e);
    const auto back = decode_record(encode_record(r));
    EXPECT_EQ(back.id, r.id);
    EXPECT_EQ(back.profile, r.profile);
    EXPECT_EQ(back.tree, r.tree);
    EXPECT_EQ(back.mask, r.mask);
    EXPECT_EQ(back.boundary, r.boundary);
    EXPECT_EQ(back.marker_subset, r.marker_subset);
    EXPECT_EQ(back.fps, r.fps);
    EXPECT_EQ(back.mass, r.mass);
    for (int c = 0; c < kin::kChannelCount; ++c) {
      ASSERT_EQ(back.channels[c].rows(), r.channels[c].rows());
      ASSERT_EQ(back.channels[c].cols(), r.channels[c].cols());
      EXPECT_EQ(std::memcmp(back.channels[c].data(), r.channels[c].data(), sizeof(double) * r.channels[c].size()), 0);
    }
    EXPECT_EQ(encode_record(back), encode_record(r));
  }
}

TEST(RecordIo, CorruptionIsRejected) {
  const auto m = small_manifest(1, 0);
  const auto bytes = encode_record(generate_sequence(m, m.sequence("A-0000")));
  std::string bad = bytes;
  bad[3] = 'X';
  EXPECT_THROW(decode_record(bad), FormatError);
  EXPECT_THROW(decode_record(bytes.substr(0, bytes.size() - 8)), FormatError);
  EXPECT_THROW(decode_record(bytes + "x"), FormatError);
}

TEST(Manifest, EmptyDatasetIsValid) {
  auto profiles = default_profiles(0, 0);
  const auto m = plan_manifest(profiles, 1);
  const auto dir = scratch("empty");
  generate_dataset(m, dir);
  const auto d = load_dataset(dir);
  EXPECT_TRUE(d.records.empty());
  EXPECT_EQ(d.manifest.profiles.size(), 5u);
  std::size_t files = 0;
  for (const auto& f : fs::recursive_directory_iterator(dir)) files += f.path().extension() == ".rec";
  EXPECT_EQ(files, 0u);
  fs::remove_all(dir);
}

TEST(Manifest, JsonRoundTripAndDisjointSplits) {
  const auto m = small_manifest(6, 2);
  const auto back = manifest_from_json(manifest_to_json(m));
  EXPECT_EQ(manifest_to_json(back), manifest_to_json(m));
  for (const auto& p : m.profiles) {
    const auto train = m.train_ids(p.id), test = m.test_ids(p.id);
    EXPECT_EQ(train.size(), 6u);
    EXPECT_EQ(test.size(), 2u);
    for (const auto& id : test) EXPECT_EQ(std::count(train.begin(), train.end(), id), 0);
  }
  EXPECT_THROW(manifest_from_json(R"({"schema":"other"})"), FormatError);
}

TEST(Sampler, QuotaPerProfile) {
  auto profiles = default_profiles(12, 3);
  profiles.resize(3);
  const auto m = plan_manifest(profiles, 3);
  const auto ids = balanced_epoch_sampler(m, 10, 1, 0);
  ASSERT_EQ(ids.size(), 30u);
  std::map<std::string, int> per;
  for (const auto& id : ids) per[m.sequence(id).profile]++;
  for (const auto& [p, n] : per) EXPECT_EQ(n, 10) << p;
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 30u);  // no repeats when quota <= size
  EXPECT_EQ(ids, balanced_epoch_sampler(m, 10, 1, 0));
  EXPECT_NE(ids, balanced_epoch_sampler(m, 10, 1, 1));
  EXPECT_THROW(balanced_epoch_sampler(m, 0, 1, 0), ConfigError);
}

TEST(Sampler, SmallProfileIsCoveredWithRepeats) {
  auto profiles = default_profiles(4, 1);
  profiles.resize(1);
  const auto m = plan_manifest(profiles, 3);
  for (int epoch = 0; epoch < 50; ++epoch) {
    const auto ids = balanced_epoch_sampler(m, 10, 8, epoch);
    ASSERT_EQ(ids.size(), 10u);
    const std::set<std::string> seen(ids.begin(), ids.end());
    EXPECT_EQ(seen.size(), 4u);
  }
}

TEST(Sampler, EmptyTrainingProfileThrows) {
  auto profiles = default_profiles(0, 2);
  profiles.resize(1);
  EXPECT_THROW(balanced_epoch_sampler(plan_manifest(profiles, 1), 5, 1, 0), ConfigError);
}

// Pearson chi-square over 200 epochs; the 0.99 quantile for 19 degrees of
// freedom is 36.19.
TEST(Sampler, UniformMarginalsAndNoLeakage) {
  auto profiles = default_profiles(20, 5);
  profiles.resize(2);
  const auto m = plan_manifest(profiles, 11);
  std::map<std::string, int> counts;
  std::set<std::string> test_ids;
  for (const auto& p : m.profiles)
    for (const auto& id : m.test_ids(p.id)) test_ids.insert(id);
  const int epochs = 200, quota = 7;
  for (int e = 0; e < epochs; ++e)
    for (const auto& id : balanced_epoch_sampler(m, quota, 99, e)) {
      EXPECT_EQ(test_ids.count(id), 0u);
      counts[id]++;
    }
  for (const auto& p : m.profiles) {
    const double expected = epochs * quota / 20.0;
    double chi2 = 0.0;
    for (const auto& id : m.train_ids(p.id)) chi2 += std::pow(counts[id] - expected, 2) / expected;
    EXPECT_LT(chi2, 36.19) << p.id;
  }
}

TEST(Subset, IdentitySingleAndFiftyFifty) {
  const auto m = small_manifest(20, 4);
  std::map<std::string, double> ones;
  for (const auto& p : m.profiles) ones[p.id] = 1.0;
  EXPECT_EQ(manifest_to_json(subset_dataset(m, ones)), manifest_to_json(m));

  std::map<std::string, double> single = {{"A", 0.5}};
  for (const auto& p : m.profiles)
    if (p.id != "A") single[p.id] = 0.0;
  const auto s50 = subset_dataset(m, single);
  EXPECT_EQ(s50.train_ids("A").size(), 10u);
  for (const auto& p : s50.profiles) {
    if (p.id == "A") continue;
    EXPECT_FALSE(p.train_enabled);
    EXPECT_TRUE(s50.train_ids(p.id).empty());
    EXPECT_EQ(s50.test_ids(p.id).size(), 4u);
  }
  const auto ids = balanced_epoch_sampler(s50, 5, 1, 0);
  for (const auto& id : ids) EXPECT_EQ(s50.sequence(id).profile, "A");

  const auto ff = subset_dataset(m, fifty_fifty_fractions(m, "A"));
  EXPECT_EQ(ff.train_ids("A").size(), 10u);
  std::size_t others = 0;
  for (const auto& p : ff.profiles)
    if (p.id != "A") others += ff.train_ids(p.id).size();
  // ceil(0.5 * 20) = 10, within one per rounded profile.
  EXPECT_LE(std::abs(static_cast<long>(others) - 10), 4);
  EXPECT_THROW(subset_dataset(m, {{"A", 0.01}}), ConfigError);
}

}  // namespace
}  // namespace hdys::data
