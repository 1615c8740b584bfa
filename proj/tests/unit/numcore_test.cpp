#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "hdys/numcore/adamw.hpp"
#include "hdys/numcore/checkpoint.hpp"
#include "hdys/numcore/gradcheck.hpp"
#include "hdys/numcore/graph.hpp"

namespace hdys::nc {
namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(r * c);
  for (double& x : v) x = d(rng);
  return Tensor::matrix(r, c, std::move(v));
}

TEST(Kernels, IdentityMatmul) {
  std::mt19937_64 rng(1);
  Graph g;
  Tensor a = random_matrix(3, 5, rng);
  Var eye = g.constant(Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
  Var y = matmul(eye, g.constant(a));
  EXPECT_TRUE(y.value().identical(a));
}

TEST(Kernels, SoftmaxOfZerosIsUniform) {
  Graph g;
  Var y = softmax(g.constant(Tensor::matrix(1, 3, {0, 0, 0})));
  for (double v : y.value().values()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Kernels, LayerNormOfConstantRowIsZero) {
  Graph g;
  Var x = g.constant(Tensor::matrix(2, 4, {3, 3, 3, 3, -1, -1, -1, -1}));
  Var y = layer_norm(x, g.constant(Tensor::filled({4}, 1.0)), g.constant(Tensor::zeros({4})));
  // (x - mean) = 0 exactly, so the eps-regularized scale is irrelevant
  for (double v : y.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(Kernels, LayerNormMatchesHandExpansion) {
  Graph g;
  Var x = g.constant(Tensor::matrix(1, 2, {1.0, 3.0}));
  Var y = layer_norm(x, g.constant(Tensor::filled({2}, 2.0)), g.constant(Tensor::filled({2}, 0.5)));
  const double rstd = 1.0 / std::sqrt(1.0 + 1e-5);  // mean 2, variance 1
  EXPECT_NEAR(y.value()[0], -rstd * 2.0 + 0.5, 1e-15);
  EXPECT_NEAR(y.value()[1], rstd * 2.0 + 0.5, 1e-15);
}

TEST(Kernels, SoftmaxRowsSumToOneAndNormalizeIsUnit) {
  std::mt19937_64 rng(3);
  Graph g;
  Var x = g.constant(random_matrix(6, 7, rng));
  const Tensor s = softmax(x).value();
  const Tensor n = l2_normalize(x).value();
  for (std::size_t i = 0; i < 6; ++i) {
    double total = 0.0, norm2 = 0.0;
    for (std::size_t j = 0; j < 7; ++j) {
      total += s.at(i, j);
      norm2 += n.at(i, j) * n.at(i, j);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(std::sqrt(norm2), 1.0, 1e-12);
  }
}

TEST(Kernels, ShapeMismatchNamesShapes) {
  Graph g;
  Var a = g.constant(Tensor::zeros({2, 3}));
  Var b = g.constant(Tensor::zeros({2, 3}));
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[2,3] x [2,3]"), std::string::npos);
  }
}

TEST(Kernels, UnknownKindAndNonFinite) {
  EXPECT_THROW(parse_op_kind("conv3d"), UnknownOpError);
  EXPECT_EQ(parse_op_kind("attention"), OpKind::Attention);
  Graph g;
  Var a = g.constant(Tensor::matrix(1, 2, {1.0, 1.0}));
  Var big = scale(a, 1e300);
  EXPECT_THROW(scale(big, 1e10), NonFiniteError);
}

TEST(Kernels, AttentionSegmentsAreIndependent) {
  std::mt19937_64 rng(5);
  Tensor q = random_matrix(5, 4, rng), k = random_matrix(5, 4, rng), v = random_matrix(5, 4, rng);
  Graph g;
  Var joint = attention(g.constant(q), g.constant(k), g.constant(v), 2, {2, 3});
  Graph h;
  auto rows = [](const Tensor& t, std::size_t b, std::size_t e) {
    return Tensor::matrix(e - b, t.cols(), std::vector<double>(t.data() + b * t.cols(), t.data() + e * t.cols()));
  };
  Var first = attention(h.constant(rows(q, 0, 2)), h.constant(rows(k, 0, 2)), h.constant(rows(v, 0, 2)), 2, {});
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(joint.value()[i], first.value()[i]);
}

TEST(Backward, SumGivesOnes) {
  Graph g;
  Var x = g.leaf(Tensor({5}, {1, -2, 3, 4, 5}), true);
  Gradients grads = g.backward(sum(x));
  for (double v : grads[x].values()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, L1GivesSign) {
  Graph g;
  Tensor t = Tensor::matrix(1, 4, {0.5, -1.5, 2.0, -0.1});
  Var x = g.leaf(t, true);
  Var zero = g.constant(Tensor::zeros({1, 4}));
  // mean |x| scaled back to the plain norm
  Gradients grads = g.backward(scale(l1_distance(x, zero), 4.0));
  EXPECT_EQ(grads[x][0], 1.0);
  EXPECT_EQ(grads[x][1], -1.0);
  EXPECT_EQ(grads[x][2], 1.0);
  EXPECT_EQ(grads[x][3], -1.0);
}

TEST(Backward, UnreachableLeafGetsExactZero) {
  Graph g;
  Var x = g.leaf(Tensor::matrix(2, 2, {1, 2, 3, 4}), true);
  Var unused = g.leaf(Tensor::matrix(1, 3, {1, 2, 3}), true);
  Gradients grads = g.backward(sum(gelu(x)));
  ASSERT_TRUE(grads.contains(unused));
  EXPECT_EQ(grads[unused].shape(), (Shape{1, 3}));
  for (double v : grads[unused].values()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, RejectsNonScalarRootAndReuse) {
  Graph g;
  Var x = g.leaf(Tensor::matrix(2, 2, {1, 2, 3, 4}), true);
  EXPECT_THROW(g.backward(x), ShapeError);
  Var s = sum(x);
  g.backward(s);
  EXPECT_THROW(g.backward(s), GraphError);
  EXPECT_THROW(sum(x), GraphError);
}

TEST(Backward, DeterministicAcrossRuns) {
  auto run = [] {
    std::mt19937_64 rng(11);
    Graph g;
    Var q = g.leaf(random_matrix(6, 4, rng), true);
    Var w = g.leaf(random_matrix(4, 4, rng), true);
    Var h = attention(matmul(q, w), q, q, 2, {3, 3});
    Var root = sum(logsumexp(layer_norm(h, g.constant(Tensor::filled({4}, 1.0)), g.constant(Tensor::zeros({4})))));
    Gradients gr = g.backward(root);
    return std::make_pair(root.value(), gr[w]);
  };
  auto a = run();
  auto b = run();
  EXPECT_TRUE(a.first.identical(b.first));
  EXPECT_TRUE(a.second.identical(b.second));
}

class CatalogGradCheck : public ::testing::TestWithParam<OpKind> {};

TEST_P(CatalogGradCheck, MatchesCentralDifferences) {
  GradCheckEntry e = grad_check(GetParam(), 10, 1e-4);
  EXPECT_TRUE(e.pass) << e.kernel << " max relative error " << e.max_rel_error;
}

INSTANTIATE_TEST_SUITE_P(AllKernels, CatalogGradCheck, ::testing::ValuesIn(catalog_kinds()),
                         [](const auto& info) { return std::string(op_name(info.param)); });

TEST(GradCheck, CorruptedKernelFails) {
  // y = x^2 with a backward rule that forgets the factor 2
  auto make = [](std::mt19937_64& rng) {
    GradCheckCase c;
    std::uniform_real_distribution<double> d(0.5, 2.0);
    c.inputs = {Tensor::matrix(1, 4, {d(rng), d(rng), d(rng), d(rng)})};
    c.build = [](Graph& g, std::span<const Var> x) {
      const Tensor& in = x[0].value();
      std::vector<double> out(in.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * in[i];
      Var vars[] = {x[0]};
      return g.custom(vars, Tensor(in.shape(), out), [](const std::vector<Tensor>& ins, const Tensor&, const Tensor& go) {
        std::vector<double> gx(ins[0].size());
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = go[i] * ins[0][i];
        return std::vector<Tensor>{Tensor(ins[0].shape(), gx)};
      });
    };
    return c;
  };
  GradCheckEntry e = grad_check("corrupted-square", make, 10, 1e-4);
  EXPECT_FALSE(e.pass);
  EXPECT_GT(e.max_rel_error, 1e-4);
}

TEST(AdamW, ZeroGradientsZeroDecayLeaveParamsUnchanged) {
  ParameterStore p;
  p.add("w", Tensor::matrix(2, 2, {1, -2, 3, 0.5}));
  AdamWHyper h;
  h.weight_decay = 0.0;
  AdamWState s = adamw_init(p, h);
  const Tensor before = p.get("w");
  adamw_step(s, p, {{"w", Tensor::zeros({2, 2})}});
  EXPECT_TRUE(p.get("w").identical(before));
  EXPECT_EQ(s.step, 1u);
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  ParameterStore p;
  p.add("x", Tensor::scalar(0.3));
  AdamWHyper h;
  h.weight_decay = 0.0;
  AdamWState s = adamw_init(p, h);
  adamw_step(s, p, {{"x", Tensor::scalar(1.0)}});
  // mhat = 1, vhat = 1 at t = 1, so the step is lr / (1 + eps)
  EXPECT_NEAR(p.get("x")[0], 0.3 - 1e-3 / (1.0 + 1e-8), 1e-15);
}

TEST(AdamW, SecondMomentGrowsOnRepeatedSteps) {
  ParameterStore p;
  p.add("x", Tensor::scalar(0.3));
  AdamWState s = adamw_init(p, AdamWHyper{});
  adamw_step(s, p, {{"x", Tensor::scalar(1.0)}});
  const double v1 = s.second.at("x")[0];
  adamw_step(s, p, {{"x", Tensor::scalar(1.0)}});
  EXPECT_GT(s.second.at("x")[0], v1);
  EXPECT_EQ(s.step, 2u);
}

TEST(AdamW, RejectsShapeMismatch) {
  ParameterStore p;
  p.add("x", Tensor::zeros({2}));
  AdamWState s = adamw_init(p, AdamWHyper{});
  EXPECT_THROW(adamw_step(s, p, {{"x", Tensor::zeros({3})}}), ShapeError);
  EXPECT_EQ(s.step, 0u);
}

TEST(Checkpoint, ByteExactRoundTrip) {
  std::mt19937_64 rng(9);
  ParameterStore p;
  p.add("enc.w", random_matrix(3, 4, rng));
  p.add("enc.b", Tensor({4}, {0.1, 0.2, 0.3, 0.4}));
  p.add("stat.mean", Tensor({2}, {1.5, -2.5}), false);
  AdamWState s = adamw_init(p, AdamWHyper{});
  GradMap g{{"enc.w", random_matrix(3, 4, rng)}, {"enc.b", Tensor({4}, {1, 2, 3, 4})}};
  adamw_step(s, p, g);

  const std::string bytes = encode_checkpoint(p, s);
  EXPECT_EQ(bytes.substr(0, 5), "HDYS1");
  Checkpoint back = decode_checkpoint(bytes);
  EXPECT_TRUE(back.params.identical(p));
  EXPECT_EQ(back.optimizer, s);
  EXPECT_FALSE(back.params.trainable("stat.mean"));
  EXPECT_EQ(encode_checkpoint(back.params, back.optimizer), bytes);

  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
}

}  // namespace
}  // namespace hdys::nc
