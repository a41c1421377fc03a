#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "almpinn/error.hpp"
#include "almpinn/network.hpp"
#include "almpinn/rng.hpp"

using namespace almpinn;
namespace fs = std::filesystem;

namespace {

Network perturbed(std::vector<int> layers, std::uint64_t seed, double scale = 0.3) {
  Network net = init_network(layers, seed, Domain{0.0, 1.0, 0.0, 2.0});
  CounterRng rng(seed + 100);
  std::vector<double> p = net.flatten();
  for (double& v : p) v += scale * rng.normal();
  net.assign(p);
  return net;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("almpinn_net_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Init, ParameterCountOfDefaultArchitecture) {
  std::vector<int> sizes{2};
  for (int i = 0; i < 8; ++i) sizes.push_back(40);
  sizes.push_back(1);
  const Network net = init_network(sizes, 7, Domain{});
  EXPECT_EQ(net.parameter_count(), 2u * 40 + 40 + 7u * (40 * 40 + 40) + 40 + 1);
  EXPECT_EQ(net.parameter_count(), 11641u);
}

TEST(Init, Deterministic) {
  const Network a = init_network({2, 5, 5, 1}, 3, Domain{});
  const Network b = init_network({2, 5, 5, 1}, 3, Domain{});
  const Network c = init_network({2, 5, 5, 1}, 4, Domain{});
  EXPECT_EQ(a.flatten(), b.flatten());
  EXPECT_NE(a.flatten(), c.flatten());
}

TEST(Init, GlorotBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Network net = init_network({2, 1}, seed, Domain{});
    for (int i = 0; i < 2; ++i) EXPECT_LE(std::abs(net.weight(0)(0, i)), std::sqrt(2.0));
    EXPECT_EQ(net.bias(0)(0), 0.0);
  }
}

TEST(Init, RejectsBadShapes) {
  EXPECT_THROW(init_network({3, 4, 1}, 0, Domain{}), InvalidArgument);
  EXPECT_THROW(init_network({2, 4, 2}, 0, Domain{}), InvalidArgument);
  EXPECT_THROW(init_network({2, 0, 1}, 0, Domain{}), InvalidArgument);
}

TEST(ForwardJet, ConstantNetwork) {
  Network net({2, 3, 1}, InputScaling::identity());
  std::vector<double> p(net.parameter_count(), 0.0);
  p.back() = 0.5;  // output bias
  net.assign(p);
  Tape tape;
  const Jet2 j = forward_jet(net, 0.4, 0.9, tape);
  EXPECT_EQ(j, (Jet2{0.5, 0, 0, 0, 0, 0}));
}

TEST(ForwardJet, LinearLayer) {
  Network net({2, 1}, InputScaling::identity());
  net.assign(std::vector<double>{1.5, -0.25, 0.1});
  Tape tape;
  const Jet2 j = forward_jet(net, 0.3, 0.8, tape);
  EXPECT_DOUBLE_EQ(j.v, 1.5 * 0.3 - 0.25 * 0.8 + 0.1);
  EXPECT_DOUBLE_EQ(j.gx, 1.5);
  EXPECT_DOUBLE_EQ(j.gt, -0.25);
  EXPECT_EQ(j.hxx, 0.0);
  EXPECT_EQ(j.hxt, 0.0);
  EXPECT_EQ(j.htt, 0.0);
}

TEST(ForwardJet, MatchesFiniteDifferences) {
  const Network net = perturbed({2, 8, 1}, 9);
  const double x = 0.35, t = 1.1, h = 1e-5;
  Tape tape;
  const Jet2 j = forward_jet(net, x, t, tape);
  const double gx = (net.evaluate(x + h, t) - net.evaluate(x - h, t)) / (2 * h);
  const double gt = (net.evaluate(x, t + h) - net.evaluate(x, t - h)) / (2 * h);
  EXPECT_LE(std::abs(j.gx - gx), 1e-6 * std::max(1.0, std::abs(gx)));
  EXPECT_LE(std::abs(j.gt - gt), 1e-6 * std::max(1.0, std::abs(gt)));
  // second derivatives from differences of the exact first-derivative jets
  const double hh = 1e-5;
  Tape tp, tm;
  const Jet2 jp = forward_jet(net, x + hh, t, tp), jm = forward_jet(net, x - hh, t, tm);
  EXPECT_NEAR(j.hxx, (jp.gx - jm.gx) / (2 * hh), 1e-7);
  EXPECT_NEAR(j.hxt, (jp.gt - jm.gt) / (2 * hh), 1e-7);
}

TEST(BatchEvaluator, AgreesWithTapeRoute) {
  const Network net = perturbed({2, 7, 5, 1}, 21);
  const std::vector<std::pair<double, double>> jets{{0.1, 0.2}, {0.9, 1.7}, {0.5, 0.5}};
  const std::vector<std::pair<double, double>> values{{0.3, 0.0}, {0.0, 1.0}};
  BatchEvaluator be;
  const auto& out = be.forward(net, jets, values, JetOrder::kFull);
  for (std::size_t i = 0; i < jets.size(); ++i) {
    Tape tape;
    const Jet2 ref = forward_jet(net, jets[i].first, jets[i].second, tape);
    for (int f = 0; f < kJetFields; ++f) {
      EXPECT_NEAR(out.jets[i][static_cast<Field>(f)], ref[static_cast<Field>(f)], 1e-12) << i << ' ' << f;
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    EXPECT_NEAR(out.values[i], net.evaluate(values[i].first, values[i].second), 1e-13);
  }
}

TEST(BatchEvaluator, BackwardMatchesTape) {
  const Network net = perturbed({2, 6, 6, 1}, 4);
  const std::vector<std::pair<double, double>> jets{{0.2, 0.4}, {0.7, 1.5}};
  const std::vector<std::pair<double, double>> values{{0.6, 0.1}};
  BatchEvaluator be;
  be.forward(net, jets, values, JetOrder::kFull);
  BatchEvaluator::Adjoints adj;
  adj.jets = {Jet2{0.3, -1.0, 0.5, 2.0, -0.7, 0.9}, Jet2{-0.4, 0.2, 1.1, -0.6, 0.8, 0.05}};
  adj.values = {1.3};
  const std::vector<double> g = be.backward(adj);

  Tape tape;
  TapeNetwork tn(net, tape);
  Var loss = tape.constant(0.0);
  for (std::size_t i = 0; i < jets.size(); ++i) {
    const Var u = tn.forward(jets[i].first, jets[i].second);
    for (int f = 0; f < kJetFields; ++f) {
      loss = loss + adj.jets[i][static_cast<Field>(f)] * tape.field(u, static_cast<Field>(f));
    }
  }
  loss = loss + adj.values[0] * tape.field(tn.forward(values[0].first, values[0].second), Field::kValue);
  const GradientVector ref = backward(tape, loss, net.parameter_count());
  ASSERT_EQ(g.size(), net.theta_count());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], ref[i], 1e-11 * std::max(1.0, std::abs(ref[i])));
}

TEST(BatchEvaluator, DropoutOnlyWhenTraining) {
  Network net = perturbed({2, 16, 1}, 8);
  net.set_dropout_rate(0.5);
  const std::vector<std::pair<double, double>> pts{{0.3, 0.3}, {0.6, 1.2}};
  BatchEvaluator be;
  const std::vector<double> off = be.forward(net, {}, pts, JetOrder::kValue, false).values;
  EXPECT_NEAR(off[0], net.evaluate(0.3, 0.3), 1e-13);
  const std::vector<double> a = be.forward(net, {}, pts, JetOrder::kValue, true, 1).values;
  const std::vector<double> b = be.forward(net, {}, pts, JetOrder::kValue, true, 1).values;
  const std::vector<double> c = be.forward(net, {}, pts, JetOrder::kValue, true, 2).values;
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(IdentityLayers, PreserveFunction) {
  Network net = perturbed({2, 6, 6, 1}, 12);
  const Network before = net;
  net.insert_identity_layers(2);
  EXPECT_EQ(net.layer_count(), before.layer_count() + 2);
  CounterRng rng(1);
  for (int i = 0; i < 20; ++i) {
    const double x = rng.uniform(), t = rng.uniform(0.0, 2.0);
    Tape ta, tb;
    const Jet2 a = forward_jet(before, x, t, ta), b = forward_jet(net, x, t, tb);
    EXPECT_DOUBLE_EQ(a.v, b.v);
    EXPECT_DOUBLE_EQ(a.hxx, b.hxx);
  }
}

TEST(Checkpoint, BitExactRoundTrip) {
  Network net = perturbed({2, 9, 4, 1}, 33);
  net.set_coeffs({1.25, 0.0999});
  const fs::path path = temp_file("rt.ckpt");
  save_checkpoint(net, {"burgers", 42, {0.5, 0.25}}, path);
  const LoadedCheckpoint back = load_checkpoint(path);
  fs::remove(path);
  const auto a = net.flatten(), b = back.net.flatten();
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
  EXPECT_EQ(back.net.layer_sizes(), net.layer_sizes());
  EXPECT_EQ(back.meta.problem_id, "burgers");
  EXPECT_EQ(back.meta.iteration, 42);
  EXPECT_EQ(back.meta.loss_history_tail, (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(back.net.scaling().x_scale, net.scaling().x_scale);
  EXPECT_EQ(back.net.scaling().t_shift, net.scaling().t_shift);
}

TEST(Checkpoint, DimensionMismatch) {
  const Network net = perturbed({2, 5, 1}, 1);
  const fs::path path = temp_file("dim.ckpt");
  save_checkpoint(net, {"nl1d", 0, {}}, path);
  try {
    load_checkpoint(path, std::vector<int>{2, 6, 1});
    FAIL() << "expected a dimension mismatch";
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kDimensionMismatch);
  }
  fs::remove(path);
}

TEST(Checkpoint, CorruptAndMissingFiles) {
  const fs::path path = temp_file("bad.ckpt");
  {
    std::ofstream out(path);
    out << "not a checkpoint";
  }
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(e.kind(), CheckpointError::Kind::kDimensionMismatch);
  }
  fs::remove(path);
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kIo);
  }
}
