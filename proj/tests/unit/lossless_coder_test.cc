// Copyright 2026 The MSIC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "msic/errors.h"
#include "msic/lossless_coder.h"
#include "msic/optim.h"

namespace msic {
namespace {

QuantizedFeatures random_features(Rng& rng, const std::vector<int>& channels, int h, int w,
                                  int levels) {
  QuantizedFeatures q;
  for (size_t i = 0; i < channels.size(); ++i) {
    BasicTensor<int> t(channels[i], h >> i, w >> i);
    for (auto& v : t.storage()) v = uniform_int(rng, levels);
    q.maps.push_back(std::move(t));
  }
  return q;
}

// Mostly-smooth features so that a trained coder has something to learn.
QuantizedFeatures smooth_features(Rng& rng, const std::vector<int>& channels, int h, int w,
                                  int levels) {
  QuantizedFeatures q;
  const double phase = uniform(rng, 0, 6.28);
  for (size_t i = 0; i < channels.size(); ++i) {
    BasicTensor<int> t(channels[i], h >> i, w >> i);
    for (int c = 0; c < t.channels(); ++c) {
      for (int y = 0; y < t.height(); ++y) {
        for (int x = 0; x < t.width(); ++x) {
          const double v = 0.5 + 0.45 * std::sin(phase + 0.3 * (x << i) + 0.2 * c) *
                                     std::cos(0.25 * (y << i));
          int level = static_cast<int>(std::lround(v * (levels - 1)));
          if (uniform01(rng) < 0.05) level = uniform_int(rng, levels);
          t.at(c, y, x) = level;
        }
      }
    }
    q.maps.push_back(std::move(t));
  }
  return q;
}

// Schedule groups by brute force: the stride-s0 lattice, then for every
// s = s0, s0/2, ..., 2 the diagonal centers followed by the axis midpoints.
std::vector<int> oracle_order(int h, int w, int k) {
  std::vector<int> order(static_cast<size_t>(h) * w, -1);
  const int s0 = 1 << (k / 2);
  int group = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (y % s0 == 0 && x % s0 == 0) order[y * w + x] = group;
  for (int s = s0; s >= 2; s /= 2) {
    ++group;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (order[y * w + x] < 0 && y % s == s / 2 && x % s == s / 2) order[y * w + x] = group;
    ++group;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (order[y * w + x] < 0 && y % (s / 2) == 0 && x % (s / 2) == 0) order[y * w + x] = group;
  }
  return order;
}

TEST(ScheduleTest, SmallExampleK2) {
  const GridSchedule g = build_schedule(4, 4, 2);
  EXPECT_EQ(g.base_stride, 2);
  EXPECT_EQ(g.seed, (std::vector<Position>{{0, 0}, {0, 2}, {2, 0}, {2, 2}}));
  ASSERT_EQ(g.blocks(), 2);
  EXPECT_EQ(g.steps[0].kind, StepKind::kDiagonalCenters);
  EXPECT_EQ(g.steps[0].targets, (std::vector<Position>{{1, 1}, {1, 3}, {3, 1}, {3, 3}}));
  EXPECT_EQ(g.steps[1].kind, StepKind::kAxisMidpoints);
  EXPECT_EQ(g.steps[1].targets.size(), 8u);
  EXPECT_EQ(g.steps[1].targets.front(), (Position{0, 1}));
  EXPECT_EQ(g.steps[1].targets[1], (Position{0, 3}));
  EXPECT_EQ(g.steps[1].targets[2], (Position{1, 0}));
}

TEST(ScheduleTest, KZeroIsAllSeed) {
  const GridSchedule g = build_schedule(3, 5, 0);
  EXPECT_EQ(g.blocks(), 0);
  EXPECT_EQ(g.seed.size(), 15u);
}

TEST(ScheduleTest, PartitionMatchesOracleAndIsDecodable) {
  for (int h = 4; h <= 64; h += 4) {
    for (int w = 4; w <= 64; w += 4) {
      for (int k : {0, 2, 4, 6, 8}) {
        const int s0 = 1 << (k / 2);
        if (h % s0 != 0 || w % s0 != 0) {
          EXPECT_THROW(build_schedule(h, w, k), ConfigError);
          continue;
        }
        const GridSchedule g = build_schedule(h, w, k);
        ASSERT_EQ(g.order, oracle_order(h, w, k)) << h << "x" << w << " K=" << k;
        // Every position appears in exactly one group.
        std::vector<int> seen(static_cast<size_t>(h) * w, 0);
        for (const auto& p : g.seed) ++seen[p.y * w + p.x];
        for (const auto& st : g.steps)
          for (const auto& p : st.targets) ++seen[p.y * w + p.x];
        ASSERT_TRUE(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
        // Conditioning neighbors strictly precede their target.
        for (int s = 0; s < g.blocks(); ++s) {
          for (const auto& t : g.steps[s].targets) {
            const auto cond = g.conditioning(s, t);
            ASSERT_FALSE(cond.empty());
            for (const auto& p : cond) ASSERT_LE(g.order_at(p), s);
          }
        }
      }
    }
  }
}

TEST(ScheduleTest, RejectsBadK) {
  EXPECT_THROW(build_schedule(8, 8, 3), ConfigError);
  EXPECT_THROW(build_schedule(8, 8, -2), ConfigError);
  EXPECT_THROW(build_schedule(6, 8, 4), ConfigError);
}

TEST(IntegrateTest, UnpoolsAndSeparates) {
  QuantizedFeatures q;
  q.maps.emplace_back(1, 4, 4);
  q.maps.emplace_back(1, 2, 2);
  for (int i = 0; i < 16; ++i) q.maps[0][i] = i % 3;
  q.maps[1].storage() = {0, 1, 2, 3};
  const auto m = integrate(q);
  EXPECT_EQ(m.channels(), 2);
  EXPECT_EQ(m.ownership_stride, (std::vector<int>{1, 2}));
  EXPECT_EQ(m.grid.at(1, 0, 1), 0);
  EXPECT_EQ(m.grid.at(1, 1, 1), 0);
  EXPECT_EQ(m.grid.at(1, 1, 2), 1);
  EXPECT_EQ(m.grid.at(1, 3, 3), 3);
  EXPECT_TRUE(m.owns(1, {2, 2}));
  EXPECT_FALSE(m.owns(1, {2, 3}));
  EXPECT_EQ(m.owner(1, {3, 3}), (Position{2, 2}));
  EXPECT_EQ(separate(m, {1, 1}), q);
}

TEST(IntegrateTest, OwnersCoverEachElementOnce) {
  Rng rng(1);
  const auto q = random_features(rng, {2, 1, 3, 1}, 16, 24, 5);
  const auto m = integrate(q);
  for (int c = 0; c < m.channels(); ++c) {
    int owned = 0;
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x) owned += m.owns(c, {y, x});
    const int s = m.ownership_stride[c];
    EXPECT_EQ(owned, (16 / s) * (24 / s));
  }
  EXPECT_EQ(separate(m, {2, 1, 3, 1}), q);
}

class ContextModelTest : public ::testing::Test {
 protected:
  static constexpr int kLevels = 5;
  const std::vector<int> channels_ = {2, 1, 1};
};

TEST_F(ContextModelTest, NoLeakageFromUndecodedPositions) {
  Rng rng(2);
  ContextModel<float> model(4, kLevels, 4, 8);
  model.init(3);
  const auto q = random_features(rng, channels_, 16, 16, kLevels);
  const auto m = integrate(q);
  const GridSchedule g = build_schedule(16, 16, 4);
  for (int step = 0; step < g.blocks(); ++step) {
    const auto base = step_probabilities(model, m, g, step);
    // Perturb every element whose owner is not yet decoded at this step.
    auto changed = m;
    for (int c = 0; c < m.channels(); ++c)
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
          if (g.order_at(m.owner(c, {y, x})) > step)
            changed.grid.at(c, y, x) = (m.grid.at(c, y, x) + 1 + uniform_int(rng, kLevels - 1)) % kLevels;
    EXPECT_EQ(step_probabilities(model, changed, g, step), base) << "step " << step;
  }
}

TEST_F(ContextModelTest, ReceptiveFieldIsBounded) {
  // Four 3x3 layers see at most 4 pixels in each direction.
  ContextModel<double> model(1, kLevels, 2, 4);
  model.init(4);
  BasicTensor<double> a(2, 20, 20), b(2, 20, 20);
  b.at(0, 10, 10) = 1.0;
  const auto la = model.forward(0, a), lb = model.forward(0, b);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) {
      bool differs = false;
      for (int c = 0; c < la.channels(); ++c) differs |= la.at(c, y, x) != lb.at(c, y, x);
      if (std::abs(y - 10) > 4 || std::abs(x - 10) > 4) EXPECT_FALSE(differs) << y << "," << x;
    }
  }
}

TEST_F(ContextModelTest, ZeroOutputLayerGivesUniformTables) {
  Rng rng(5);
  ContextModel<float> model(4, kLevels, 2, 8);
  model.init(6);
  model.zero_output_layers();
  const auto q = random_features(rng, channels_, 8, 8, kLevels);
  const auto g = build_schedule(8, 8, 2);
  for (int s = 0; s < 2; ++s) {
    for (const auto& t : step_probabilities(model, integrate(q), g, s)) {
      EXPECT_EQ(t, uniform_table(kLevels));
    }
  }
}

TEST_F(ContextModelTest, UniformCoderCostsLog2NPerSymbol) {
  Rng rng(7);
  ContextModel<float> model(4, kLevels, 4, 8);
  model.zero_output_layers();
  BaseHistogram hist(4, kLevels);  // no counts: uniform after smoothing
  const auto q = random_features(rng, channels_, 16, 16, kLevels);
  const auto g = build_schedule(16, 16, 4);
  CodingStats stats;
  encode_features(q, model, hist, g, &stats);
  const uint64_t expected = 2 * 256 + 64 + 16;
  EXPECT_EQ(stats.symbols, expected);
  // Fixed-point tables are within 2^-16 of uniform.
  EXPECT_NEAR(stats.logprob_bits, expected * std::log2(kLevels), expected * 1e-4);
}

TEST_F(ContextModelTest, JointDistributionIsNormalized) {
  // Brute force over every assignment of a 2x2 single-channel map, N = 3.
  const int levels = 3;
  ContextModel<float> model(1, levels, 2, 4);
  model.init(8);
  BaseHistogram hist(1, levels);
  const std::vector<double> counts = {5, 1, 2};
  hist.add_counts(0, counts);
  const auto g = build_schedule(2, 2, 2);
  double total = 0;
  for (int code = 0; code < 81; ++code) {
    QuantizedFeatures q;
    q.maps.emplace_back(1, 2, 2);
    int v = code;
    for (int i = 0; i < 4; ++i, v /= 3) q.maps[0][i] = v % 3;
    total += std::exp2(-factorized_logprob(q, model, hist, g));
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST_F(ContextModelTest, RoundTrip) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    ContextModel<float> model(4, kLevels, 4, 8);
    model.init(seed + 10);
    const auto train = random_features(rng, channels_, 16, 32, kLevels);
    const auto hist = fit_histogram({train}, kLevels);
    const auto q = random_features(rng, channels_, 16, 32, kLevels);
    const auto g = build_schedule(16, 32, 4);
    std::vector<ProbTable> enc_tables, dec_tables;
    CodingStats es, ds;
    es.tables = &enc_tables;
    ds.tables = &dec_tables;
    model.reset_evaluations();
    const auto bytes = encode_features(q, model, hist, g, &es);
    EXPECT_EQ(model.evaluations(), 4u);
    EXPECT_EQ(es.model_evaluations, 4u);
    model.reset_evaluations();
    const auto back = decode_features(bytes, model, hist, g, channels_, &ds);
    EXPECT_EQ(model.evaluations(), 4u);
    EXPECT_EQ(back, q);
    EXPECT_EQ(enc_tables, dec_tables);
    EXPECT_LE(8.0 * bytes.size(), es.logprob_bits + 32);
    EXPECT_NEAR(es.logprob_bits, factorized_logprob(q, model, hist, g), 1e-6);
  }
}

TEST_F(ContextModelTest, KZeroEqualsHistogramCoding) {
  Rng rng(11);
  const auto q = random_features(rng, channels_, 8, 8, kLevels);
  const auto hist = fit_histogram({random_features(rng, channels_, 8, 8, kLevels)}, kLevels);
  ContextModel<float> model(4, kLevels, 0, 8);
  const auto g = build_schedule(8, 8, 0);
  const auto bytes = encode_features(q, model, hist, g);
  // Same symbols under the histogram tables, coded directly.
  const auto m = integrate(q);
  std::vector<int> symbols;
  std::vector<ProbTable> tables;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < m.channels(); ++c)
        if (m.owns(c, {y, x})) {
          symbols.push_back(m.grid.at(c, y, x));
          tables.push_back(hist.table(c));
        }
  EXPECT_EQ(bytes, encode_symbols(symbols, tables));
  EXPECT_EQ(decode_features(bytes, model, hist, g, channels_), q);
}

TEST_F(ContextModelTest, TruncatedStreamFails) {
  Rng rng(12);
  ContextModel<float> model(4, kLevels, 2, 8);
  model.init(13);
  BaseHistogram hist(4, kLevels);
  const auto q = random_features(rng, channels_, 16, 16, kLevels);
  const auto g = build_schedule(16, 16, 2);
  auto bytes = encode_features(q, model, hist, g);
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(decode_features(bytes, model, hist, g, channels_), CorruptionError);
}

TEST_F(ContextModelTest, MismatchedScheduleIsConfigError) {
  Rng rng(14);
  ContextModel<float> model(4, kLevels, 2, 8);
  BaseHistogram hist(4, kLevels);
  const auto q = random_features(rng, channels_, 16, 16, kLevels);
  EXPECT_THROW(encode_features(q, model, hist, build_schedule(16, 16, 4)), ConfigError);
  EXPECT_THROW(encode_features(q, model, hist, build_schedule(8, 8, 2)), ConfigError);
}

TEST_F(ContextModelTest, DropBlocksRoundTrip) {
  Rng rng(15);
  ContextModel<float> model(4, kLevels, 4, 8);
  model.init(16);
  BaseHistogram hist(4, kLevels);
  const auto q = random_features(rng, channels_, 16, 16, kLevels);
  const auto g = build_schedule(16, 16, 4);
  for (int n : {0, 2, 4}) {
    const auto [g2, m2] = drop_last_blocks(g, model, n);
    EXPECT_EQ(g2.blocks(), 4 - n);
    EXPECT_EQ(m2.blocks(), 4 - n);
    EXPECT_EQ(g2.base_stride, 1 << ((4 - n) / 2));
    const auto bytes = encode_features(q, m2, hist, g2);
    EXPECT_EQ(decode_features(bytes, m2, hist, g2, channels_), q);
  }
  EXPECT_THROW(drop_last_blocks(g, model, 1), ConfigError);
  EXPECT_THROW(drop_last_blocks(g, model, 6), ConfigError);
  // The kept networks are the finest ones, unchanged.
  const auto [g2, m2] = drop_last_blocks(g, model, 2);
  const auto in = step_input<float>(integrate(q), g2, 0, kLevels);
  EXPECT_EQ(m2.forward(0, in), model.forward(2, in));
}

TEST_F(ContextModelTest, StepLossGradientMatchesFiniteDifferences) {
  Rng rng(17);
  ContextModel<double> model(4, kLevels, 2, 4);
  model.init(18);
  const auto m = integrate(random_features(rng, channels_, 8, 8, kLevels));
  const auto g = build_schedule(8, 8, 2);
  auto params = model.parameters();
  for (int step = 0; step < 2; ++step) {
    std::vector<GradCheckCoordinate> coords;
    for (size_t p = 0; p < params.size(); ++p) {
      for (int i = 0; i < 10; ++i) {
        coords.push_back({p, static_cast<size_t>(uniform_int(rng, static_cast<int>(params[p]->size())))});
      }
    }
    const double err = grad_check([&] { return model.step_loss(step, m, g, false); },
                                  [&] { model.step_loss(step, m, g, true); }, params, coords, 1e-5);
    EXPECT_LT(err, 1e-6) << "step " << step;
  }
}

TEST_F(ContextModelTest, StepLossMatchesCodingCost) {
  Rng rng(19);
  ContextModel<double> model(4, kLevels, 2, 8);
  model.init(20);
  const auto q = random_features(rng, channels_, 8, 8, kLevels);
  const auto m = integrate(q);
  const auto g = build_schedule(8, 8, 2);
  const auto fm = model.converted<float>();
  BaseHistogram hist(4, kLevels);
  double seed_bits = 0;
  for (const auto& p : g.seed)
    for (int c = 0; c < 4; ++c)
      if (m.owns(c, p)) seed_bits += hist.table(c).cost_bits(m.grid.at(c, p.y, p.x));
  const double loss = model.step_loss(0, m, g, false) + model.step_loss(1, m, g, false);
  // Quantized tables differ from the softmax by at most a few 2^-16 units.
  EXPECT_NEAR(seed_bits + loss, factorized_logprob(q, fm, hist, g), 0.05);
}

TEST_F(ContextModelTest, ConstantFeaturesTrainToNearZeroBits) {
  QuantizedFeatures q;
  for (int i = 0; i < 3; ++i) q.maps.emplace_back(channels_[i], 16 >> i, 16 >> i, 2);
  CoderTrainer trainer(4, kLevels, CoderConfig{2, 8});
  trainer.model.init(21);
  CoderTrainSchedule sched;
  sched.updates = 200;
  sched.batch_size = 1;
  sched.learning_rate = 1e-2;
  train_context_model(trainer, {q}, sched);
  const auto hist = fit_histogram({q}, kLevels);
  EXPECT_LT(cross_entropy_bits({q}, trainer.model, hist), 0.05);
}

TEST_F(ContextModelTest, TrainingBeatsHistogramOnSmoothData) {
  Rng rng(22);
  std::vector<QuantizedFeatures> train, test;
  for (int i = 0; i < 8; ++i) train.push_back(smooth_features(rng, channels_, 16, 16, kLevels));
  for (int i = 0; i < 3; ++i) test.push_back(smooth_features(rng, channels_, 16, 16, kLevels));
  const auto hist = fit_histogram(train, kLevels);
  CoderTrainer trainer(4, kLevels, CoderConfig{4, 8});
  trainer.model.init(23);
  std::vector<std::vector<double>> prior;
  for (int c = 0; c < 4; ++c) prior.push_back(hist.probabilities(c));
  trainer.model.init_output_prior(prior);
  const double before = cross_entropy_bits(test, trainer.model, hist);
  CoderTrainSchedule sched;
  sched.updates = 150;
  sched.batch_size = 2;
  sched.learning_rate = 3e-3;
  std::vector<double> losses;
  train_context_model(trainer, train, sched, [&](const CoderTrainLogRow& r) {
    losses.push_back(r.loss_bits);
  });
  ASSERT_EQ(losses.size(), 150u);
  EXPECT_LT(cross_entropy_bits(test, trainer.model, hist), before);
}

TEST_F(ContextModelTest, TrainingIsResumable) {
  Rng rng(24);
  std::vector<QuantizedFeatures> train;
  for (int i = 0; i < 3; ++i) train.push_back(random_features(rng, channels_, 8, 8, kLevels));
  CoderTrainSchedule sched;
  sched.updates = 10;
  sched.batch_size = 2;
  CoderTrainer full(4, kLevels, CoderConfig{2, 4});
  full.model.init(25);
  CoderTrainer split = full;
  train_context_model(full, train, sched);
  sched.stop_at = 4;
  train_context_model(split, train, sched);
  EXPECT_EQ(split.completed, 4);
  sched.stop_at = 0;
  train_context_model(split, train, sched);
  EXPECT_EQ(split.completed, 10);
  auto a = full.model.parameters(), b = split.model.parameters();
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value);
}

TEST(HistogramTest, SmoothedProbabilities) {
  BaseHistogram h(1, 3);
  const std::vector<double> counts = {1, 0, 3};
  h.add_counts(0, counts);
  const auto p = h.probabilities(0);
  EXPECT_NEAR(p[0], 2.0 / 7, 1e-12);
  EXPECT_NEAR(p[1], 1.0 / 7, 1e-12);
  EXPECT_NEAR(p[2], 4.0 / 7, 1e-12);
  EXPECT_THROW(h.set_counts({1, -1, 0}), FormatError);
}

TEST(CoderConfigTest, KeyValues) {
  KeyValues kv;
  CoderConfig{6, 12}.to_key_values(kv);
  const auto c = CoderConfig::from_key_values(kv);
  EXPECT_EQ(c.blocks, 6);
  EXPECT_EQ(c.width, 12);
  kv["K"] = "3";
  EXPECT_THROW(CoderConfig::from_key_values(kv), ConfigError);
}

}  // namespace
}  // namespace msic
