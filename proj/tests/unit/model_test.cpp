#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hdys/common/error.hpp"
#include "hdys/datahub/standard.hpp"
#include "hdys/engine/train.hpp"
#include "../support/tiny_dataset.hpp"

namespace hdys::model {
namespace {

using kin::Channel;
using testing::tiny_config;
using testing::tiny_dataset;

nc::Tensor random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = n(rng);
  return nc::Tensor::matrix(rows, cols, std::move(v));
}

double max_abs_diff(const nc::Tensor& a, const nc::Tensor& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

HDySModel tiny_model(HDySConfig cfg = tiny_config()) {
  return HDySModel(cfg, shape_from_profiles(tiny_dataset().manifest.profiles));
}

// ---- config ----

TEST(Config, TextRoundTripIsExact) {
  auto cfg = desk_config();
  apply_override(cfg, "loss.temperature=0.25");
  apply_override(cfg, "data.channels=x_m,x_a,tau_tr");
  apply_override(cfg, "train.fractions=A=0.5,B=0");
  apply_override(cfg, "rollout.fps=90,150");
  const auto back = config_from_text(config_to_text(cfg));
  EXPECT_EQ(config_to_text(back), config_to_text(cfg));
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_NE(config_hash(back), config_hash(desk_config()));
  EXPECT_EQ(back.temperature, 0.25);
  EXPECT_FALSE(back.channel(Channel::Keypoints));
}

TEST(Config, UnknownKeyIsNamed) {
  auto cfg = desk_config();
  try {
    apply_override(cfg, "model.latent_dims=32");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.latent_dims"), std::string::npos);
  }
  EXPECT_THROW(config_from_text("preset = desk\nmodel.latent_dim = 32\n"), ConfigError);  // no schema line
  EXPECT_THROW(apply_override(cfg, "model.latent_dim=abc"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "model.latent_dim"), ConfigError);
}

TEST(Config, PresetsAndValidation) {
  const auto paper = paper_config();
  EXPECT_EQ(paper.latent_dim, 128);
  EXPECT_EQ(paper.epochs, 1000);
  EXPECT_EQ(paper.frames_per_batch, 9600);
  EXPECT_EQ(paper.quota, 3000);
  auto cfg = desk_config();
  apply_override(cfg, "model.latent_dim=32");
  apply_override(cfg, "preset=paper");
  EXPECT_EQ(cfg.latent_dim, 128);
  EXPECT_THROW(preset_config("laptop"), ConfigError);
  cfg = desk_config();
  cfg.frames_per_batch = cfg.window - 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = desk_config();
  cfg.epochs = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, FractionsParse) {
  const auto f = parse_fractions("A=0.5, B=0");
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].first, "A");
  EXPECT_EQ(f[0].second, 0.5);
  EXPECT_EQ(f[1].second, 0.0);
  EXPECT_THROW(parse_fractions("A=1.5"), ConfigError);
  EXPECT_THROW(parse_fractions("A"), ConfigError);
}

// ---- encoders ----

TEST(SetEncoder, PermutationAndDuplicationInvariant) {
  const auto m = tiny_model();
  auto store = m.init(3);
  std::mt19937_64 rng(4);
  const std::size_t frames = 5, e = 7;
  const auto x = random_matrix(frames * e, 9, rng);
  const std::vector<std::int64_t> segs(frames, static_cast<std::int64_t>(e));

  auto encode = [&](const nc::Tensor& t, const std::vector<std::int64_t>& s) {
    nc::Graph g;
    nc::Binding b(g, store);
    return m.encode_kinematics(b, Channel::Markers, g.constant(t), s).value();
  };
  const auto base = encode(x, segs);
  ASSERT_EQ(base.shape(), (nc::Shape{frames, 16}));

  std::vector<double> perm(x.size()), dup(2 * x.size());
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<std::size_t> order(e);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < e; ++k)
      for (std::size_t c = 0; c < 9; ++c) {
        perm[(f * e + k) * 9 + c] = x.at(f * e + order[k], c);
        dup[(f * 2 * e + k) * 9 + c] = x.at(f * e + k, c);
        dup[(f * 2 * e + e + k) * 9 + c] = x.at(f * e + k, c);
      }
  }
  EXPECT_LE(max_abs_diff(encode(nc::Tensor::matrix(frames * e, 9, perm), segs), base), 1e-10);
  const std::vector<std::int64_t> segs2(frames, static_cast<std::int64_t>(2 * e));
  EXPECT_LE(max_abs_diff(encode(nc::Tensor::matrix(2 * frames * e, 9, dup), segs2), base), 1e-10);
}

TEST(SetEncoder, VariableSetSizes) {
  const auto m = tiny_model();
  auto store = m.init(3);
  std::mt19937_64 rng(5);
  for (std::size_t e : {20u, 40u}) {
    nc::Graph g;
    nc::Binding b(g, store);
    const auto z = m.encode_kinematics(b, Channel::Markers, g.constant(random_matrix(3 * e, 9, rng)),
                                       std::vector<std::int64_t>(3, static_cast<std::int64_t>(e)));
    EXPECT_EQ(z.shape(), (nc::Shape{3, 16}));
  }
  nc::Graph g;
  nc::Binding b(g, store);
  EXPECT_THROW(m.encode_kinematics(b, Channel::Markers, g.constant(random_matrix(10, 9, rng)), {3, 3}), ShapeError);
}

// Perturbing one frame: with refinement off only that frame's prediction
// moves; with it on the whole window moves but other windows do not.
TEST(Refinement, LocalityFollowsTheFlag) {
  std::mt19937_64 rng(6);
  const auto shape = shape_from_profiles(tiny_dataset().manifest.profiles);
  const auto w = static_cast<std::size_t>(shape.width[kin::index(Channel::Angles)]);
  const auto x = random_matrix(16, w, rng);
  std::vector<double> bumped(x.data(), x.data() + x.size());
  bumped[3 * w + 1] += 0.5;  // frame 3, inside the first window of 8
  for (bool off : {true, false}) {
    auto cfg = tiny_config();
    cfg.no_temporal_refinement = off;
    const auto m = tiny_model(cfg);
    auto store = m.init(7);
    auto predict = [&](const nc::Tensor& t) {
      nc::Graph g;
      nc::Binding b(g, store);
      const auto z = m.encode_kinematics(b, Channel::Angles, g.constant(t), {});
      return m.id_head(b, Channel::TorqueAngleTree, m.refine(b, z, cfg.window)).value();
    };
    const auto a = predict(x), b = predict(nc::Tensor::matrix(16, w, bumped));
    for (std::size_t f = 0; f < 16; ++f) {
      double d = 0.0;
      for (std::size_t c = 0; c < a.cols(); ++c) d = std::max(d, std::abs(a.at(f, c) - b.at(f, c)));
      if (f == 3 || (!off && f < 8))
        EXPECT_GT(d, 1e-9) << "frame " << f << " refinement off=" << off;
      else
        EXPECT_EQ(d, 0.0) << "frame " << f << " refinement off=" << off;
    }
  }
}

TEST(Heads, WidthsMatchTheShape) {
  const auto m = tiny_model();
  auto store = m.init(8);
  const auto& s = m.shape();
  EXPECT_EQ(s.width[kin::index(Channel::TorqueAngleTree)], 23);
  EXPECT_EQ(s.width[kin::index(Channel::TorquePoseTree)], data::standard_tree("T2").actuated_dof());
  EXPECT_EQ(s.width[kin::index(Channel::Emg)], 8);
  EXPECT_EQ(s.keypoint_counts, (std::vector<int>{9, 12}));
  nc::Graph g;
  nc::Binding b(g, store);
  std::mt19937_64 rng(9);
  const auto z = g.constant(random_matrix(4, 16, rng));
  for (auto c : kin::kDynamicsChannels)
    EXPECT_EQ(m.id_head(b, c, z).shape()[1], static_cast<std::size_t>(s.width[kin::index(c)])) << kin::channel_name(c);
  EXPECT_EQ(m.fd_head(b, Channel::Keypoints, z, 9).shape()[1], 27u);
  EXPECT_EQ(m.fd_head(b, Channel::Keypoints, z, 12).shape()[1], 36u);
  EXPECT_EQ(m.fd_head(b, Channel::Angles, z).shape()[1], 23u);
  EXPECT_THROW(m.fd_head(b, Channel::Markers, z), ConfigError);
  EXPECT_THROW(m.fd_head(b, Channel::Keypoints, z, 5), std::exception);
}

const kin::SequenceRecord& first_train(const std::string& profile) {
  const auto& ds = tiny_dataset();
  return ds.record(ds.manifest.train_ids(profile).front());
}

TEST(Forward, EmgProfilePredictsOnlyKeypointAccelerations) {
  const auto cfg = tiny_config();
  const auto m = tiny_model(cfg);
  auto store = engine::initialize(cfg, tiny_dataset());
  const auto group = make_group(cfg, store, {{&first_train("D"), 0}, {&first_train("D"), 8}});
  nc::Graph g;
  nc::Binding b(g, store);
  const auto out = m.forward(b, group);
  ASSERT_EQ(out.kinematics.size(), 2u);  // markers, keypoints
  ASSERT_EQ(out.inverse.size(), 2u);
  for (const auto& t : out.inverse) EXPECT_EQ(t.target, "tau_e");
  ASSERT_EQ(out.forward.size(), 2u);
  for (const auto& t : out.forward) {
    EXPECT_EQ(t.target, "acc.x_k");
    EXPECT_EQ(t.pred.shape(), (nc::Shape{16, 27}));
  }
  EXPECT_EQ(out.composed.size(), 2u);
}

TEST(Forward, KinematicsOnlyProfileHasNoReconstruction) {
  const auto cfg = tiny_config();
  const auto m = tiny_model(cfg);
  auto store = engine::initialize(cfg, tiny_dataset());
  nc::Graph g;
  nc::Binding b(g, store);
  const auto out = m.forward(b, make_group(cfg, store, {{&first_train("E"), 0}}));
  EXPECT_EQ(out.kinematics.size(), 3u);
  EXPECT_TRUE(out.inverse.empty());
  EXPECT_TRUE(out.forward.empty());
}

// ---- losses ----

ReconTerm term(nc::Graph& g, const std::string& target, std::vector<double> pred, std::vector<double> truth,
               std::vector<double> weights = {}) {
  const auto n = pred.size();
  return {target, "x", g.constant(nc::Tensor::matrix(n, 1, std::move(pred))),
          nc::Tensor::matrix(n, 1, std::move(truth)), std::move(weights)};
}

TEST(ReconLoss, HandFixtures) {
  nc::Graph g;
  const std::vector<ReconTerm> one{term(g, "tau", {3, 3}, {1, 1})};
  EXPECT_EQ(loss_recon(one).value()[0], 2.0);
  // masked row is ignored entirely
  const std::vector<ReconTerm> half{term(g, "tau", {3, 10}, {1, 1}, {1.0, 0.0})};
  EXPECT_EQ(loss_recon(half).value()[0], 2.0);
  // mean over sources of one target, sum over targets
  const std::vector<ReconTerm> mixed{term(g, "tau", {3}, {1}), term(g, "tau", {1}, {1}), term(g, "acc.x_a", {0}, {4})};
  EXPECT_EQ(loss_recon(mixed).value()[0], 1.0 + 4.0);
  const std::vector<ReconTerm> dead{term(g, "tau", {3}, {1}, {0.0})};
  EXPECT_THROW(loss_recon(dead), DeadConfigError);
}

Latent latent(nc::Graph& g, const std::string& name, std::size_t rows, std::size_t cols, std::vector<double> v) {
  return {name, g.constant(nc::Tensor::matrix(rows, cols, std::move(v)))};
}

TEST(AlignLoss, SingleFrameBatchIsZero) {
  nc::Graph g;
  const std::vector<Latent> z{latent(g, "a", 1, 3, {1, 2, 3}), latent(g, "b", 1, 3, {-1, 0, 4})};
  EXPECT_EQ(loss_align(z, 0.1, Similarity::Cosine).value()[0], 0.0);
  EXPECT_EQ(loss_align(z, 1.0, Similarity::Raw).value()[0], 0.0);
}

TEST(AlignLoss, OrthonormalFixture) {
  nc::Graph g;
  const std::vector<Latent> z{latent(g, "a", 2, 2, {1, 0, 0, 1}), latent(g, "b", 2, 2, {1, 0, 0, 1})};
  const double expect = std::log(1.0 + std::exp(-1.0));
  EXPECT_NEAR(loss_align(z, 1.0, Similarity::Raw).value()[0], expect, 1e-9);
  EXPECT_THROW(loss_align(std::vector<Latent>{z[0]}, 1.0, Similarity::Raw), ConfigError);
}

TEST(AlignLoss, AlignedBeatsRandom) {
  std::mt19937_64 rng(10);
  nc::Graph g;
  const auto a = random_matrix(12, 6, rng), r = random_matrix(12, 6, rng);
  const std::vector<Latent> aligned{{"a", g.constant(a)}, {"b", g.constant(a)}};
  const std::vector<Latent> random{{"a", g.constant(a)}, {"b", g.constant(r)}};
  EXPECT_LT(loss_align(aligned, 0.1, Similarity::Cosine).value()[0],
            loss_align(random, 0.1, Similarity::Cosine).value()[0]);
  EXPECT_GT(cross_source_cosine(aligned), 0.999999);
  EXPECT_LT(cross_source_cosine(random), cross_source_cosine(aligned));
}

TEST(TotalLoss, Weights) {
  auto cfg = desk_config();
  EXPECT_NEAR(total_loss(cfg, 2.0, 1.0), 0.07, 1e-15);
  cfg.no_align = true;
  EXPECT_NEAR(total_loss(cfg, 2.0, 1.0), 0.02, 1e-15);
}

TEST(Size, ParameterCountsGrowWithLatentDim) {
  std::size_t prev = 0;
  for (int d : {32, 64, 128}) {
    auto cfg = desk_config();
    cfg.latent_dim = d;
    const HDySModel m(cfg, shape_from_profiles(tiny_dataset().manifest.profiles));
    const auto n = m.init(0).parameter_count();
    EXPECT_GT(n, prev) << "d=" << d;
    prev = n;
  }
}

TEST(Checkpoint, CheckRejectsAnotherConfig) {
  auto cfg = tiny_config();
  const auto m = tiny_model(cfg);
  m.check(m.init(1));
  cfg.latent_dim = 32;
  EXPECT_THROW(m.check(tiny_model(cfg).init(1)), ConfigError);
  cfg = tiny_config();
  cfg.no_fdae = true;
  EXPECT_THROW(m.check(tiny_model(cfg).init(1)), ConfigError);
}

}  // namespace
}  // namespace hdys::model
