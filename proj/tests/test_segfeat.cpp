#include <gtest/gtest.h>

#include <cmath>

#include "featurizer_oracles.hpp"
#include "oracles.hpp"
#include "segtag/encoding.hpp"
#include "segtag/segfeat.hpp"

namespace segtag {
namespace {

using testing::DiffOracleDeviation;
using testing::GrConvOracleDeviation;
using testing::RandomTensor;
using testing::SrnnOracleDeviation;

struct Fixture {
  ParameterStore store;
  std::unique_ptr<SegmentFeaturizer> featurizer;
  Tensor states;
};

Fixture Make(FeaturizerKind kind, std::size_t length, std::uint64_t seed,
           Activation act = Activation::kTanh) {
  Fixture s;
  Rng rng(seed);
  SegFeatConfig config;
  config.kind = kind;
  config.input_dim = 6;
  config.dim = 5;
  config.srnn_hidden = 4;
  config.nonlinearity = act;
  ParamBinder binder(s.store, &rng, 0.5);
  s.featurizer = MakeFeaturizer(config, binder);
  s.states = RandomTensor({length, 6}, rng);
  return s;
}

TEST(GrConv, MatchesNaiveRecursion) {
  for (Activation act : {Activation::kTanh, Activation::kSigmoid, Activation::kRelu}) {
    for (std::size_t length : {1u, 2u, 7u}) {
      Fixture s = Make(FeaturizerKind::kGrConv, length, 40 + length, act);
      const auto& f = static_cast<const GrConvFeaturizer&>(*s.featurizer);
      EXPECT_LE(GrConvOracleDeviation(f, s.store, s.states, 4, act), 1e-10)
          << "length " << length;
    }
  }
}

TEST(GrConv, GatesAreConvexWeights) {
  Fixture s = Make(FeaturizerKind::kGrConv, 6, 3);
  auto& f = static_cast<GrConvFeaturizer&>(*s.featurizer);
  f.set_record_gates(true);
  Tape tape;
  f.Compute(tape, s.store, tape.Constant(s.states), 6);
  ASSERT_EQ(f.recorded_gates().size(), 5u);
  for (const auto& gates : f.recorded_gates()) {
    const Tensor& l = gates[0].value();
    for (std::size_t i = 0; i < l.size(); ++i) {
      const double m = gates[2].value()[i], r = gates[1].value()[i];
      EXPECT_GE(std::min({l[i], r, m}), 0.0);
      EXPECT_NEAR(l[i] + r + m, 1.0, 1e-15);
    }
  }
}

TEST(GrConv, FixedGatesCopyChildren) {
  Fixture s = Make(FeaturizerKind::kGrConv, 5, 8);
  auto& f = static_cast<GrConvFeaturizer&>(*s.featurizer);
  Tape tape;
  Var states = tape.Constant(s.states);
  f.set_fixed_gates(std::array<double, 3>{1.0, 0.0, 0.0});
  const SegmentFeatures left = f.Compute(tape, s.store, states, 5);
  f.set_fixed_gates(std::array<double, 3>{0.0, 1.0, 0.0});
  const SegmentFeatures right = f.Compute(tape, s.store, states, 5);
  const Tensor& base = left.by_length[0].value();
  for (std::size_t d = 1; d <= 5; ++d) {
    for (std::size_t a = 0; a + d <= 5; ++a) {
      for (std::size_t j = 0; j < 5; ++j) {
        // Left gates keep the first character, right gates the last.
        EXPECT_EQ(left.by_length[d - 1].value().at(a, j), base.at(a, j));
        EXPECT_EQ(right.by_length[d - 1].value().at(a, j), base.at(a + d - 1, j));
      }
    }
  }
}

TEST(Srnn, IncrementalEqualsPerSegmentRecompute) {
  for (std::size_t length : {1u, 3u, 8u}) {
    Fixture s = Make(FeaturizerKind::kSrnn, length, 60 + length);
    const auto& f = static_cast<const SrnnFeaturizer&>(*s.featurizer);
    EXPECT_EQ(SrnnOracleDeviation(f, s.store, s.states, 5), 0.0) << "length " << length;
  }
}

TEST(Diff, MatchesIndexOracle) {
  for (std::size_t length : {1u, 4u, 9u}) {
    Fixture s = Make(FeaturizerKind::kDiff, length, 80 + length);
    const auto& f = static_cast<const DiffFeaturizer&>(*s.featurizer);
    EXPECT_EQ(DiffOracleDeviation(f, s.store, s.states, 6), 0.0) << "length " << length;
  }
}

TEST(Featurizers, ShapesAndKinds) {
  for (FeaturizerKind kind : {FeaturizerKind::kGrConv, FeaturizerKind::kSrnn, FeaturizerKind::kDiff}) {
    Fixture s = Make(kind, 7, 1);
    EXPECT_EQ(s.featurizer->kind(), kind);
    EXPECT_EQ(ParseFeaturizerKind(FeaturizerName(kind)), kind);
    Tape tape;
    const SegmentFeatures out = s.featurizer->Compute(tape, s.store, tape.Constant(s.states), 3);
    ASSERT_EQ(out.max_length(), 3u);
    for (std::size_t d = 1; d <= 3; ++d) {
      EXPECT_EQ(out.by_length[d - 1].value().shape(), (Shape{8 - d, 5}));
    }
    EXPECT_THROW(s.featurizer->Compute(tape, s.store, tape.Constant(Tensor({3, 4})), 2),
                 DimensionError);
  }
  EXPECT_THROW(ParseFeaturizerKind("cnn"), std::invalid_argument);
}

// Naive LSTM on plain vectors.
std::vector<std::vector<double>> NaiveLstm(const ParameterStore& store, const LstmParams& p,
                                           const Tensor& x, bool reverse) {
  const Tensor& wx = store.value(p.input_weights);
  const Tensor& wh = store.value(p.recurrent_weights);
  const Tensor& b = store.value(p.bias);
  const std::size_t hidden = wh.rows(), n = x.rows();
  std::vector<double> h(hidden, 0.0), c(hidden, 0.0);
  std::vector<std::vector<double>> out(n);
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t t = reverse ? n - 1 - s : s;
    std::vector<double> pre(4 * hidden);
    for (std::size_t j = 0; j < 4 * hidden; ++j) {
      double v = b[j];
      for (std::size_t i = 0; i < x.cols(); ++i) v += x.at(t, i) * wx.at(i, j);
      for (std::size_t i = 0; i < hidden; ++i) v += h[i] * wh.at(i, j);
      pre[j] = v;
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      c[j] = sig(pre[hidden + j]) * c[j] + sig(pre[j]) * std::tanh(pre[2 * hidden + j]);
      h[j] = sig(pre[3 * hidden + j]) * std::tanh(c[j]);
    }
    out[t] = h;
  }
  return out;
}

TEST(Lstm, MatchesNaiveRecurrence) {
  Rng rng(21);
  ParameterStore store;
  ParamBinder binder(store, &rng, 0.5);
  const LstmParams p = MakeLstmParams(binder, "l", 3, 4);
  const Tensor x = RandomTensor({6, 3}, rng);
  for (bool reverse : {false, true}) {
    Tape tape;
    const Tensor got = RunLstm(tape, store, p, tape.Constant(x), reverse).value();
    const auto expect = NaiveLstm(store, p, x, reverse);
    for (std::size_t t = 0; t < 6; ++t) {
      for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(got.at(t, j), expect[t][j], 1e-12);
    }
  }
  const Tensor& bias = store.value(p.bias);
  for (std::size_t j = 4; j < 8; ++j) EXPECT_EQ(bias[j], 1.0);
}

CharSequence Seq(const std::string& text, const CharVocab& vocab) {
  return TextToCharSequence(text, vocab);
}

TEST(Encoder, ExtendedOneHotEmbedding) {
  Rng rng(2);
  ParameterStore store;
  ParamBinder binder(store, &rng, 0.5);
  CharVocab vocab;
  for (char32_t c : U"abc") {
    if (c) vocab.Add(c);
  }
  CharEncoder enc(EncoderConfig{vocab.size(), 4, 3, 1}, binder);
  Tape tape;
  const CharSequence seq = Seq("ab zc", vocab);  // b has space after, z is unknown
  const Tensor e = enc.Embed(tape, store, seq, 0.0, nullptr).value();
  const Tensor& table = store.value(enc.embedding());
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(e.at(0, j), table.at(0, j));
    EXPECT_EQ(e.at(1, j), table.at(1, j) + table.at(enc.space_after_row(), j));
    EXPECT_EQ(e.at(2, j), table.at(enc.space_before_row(), j));
    EXPECT_EQ(e.at(3, j), table.at(2, j));
  }
}

TEST(Encoder, InputDropoutZeroesWholeRowsWithoutRescaling) {
  Rng init(3);
  ParameterStore store;
  ParamBinder binder(store, &init, 0.5);
  CharVocab vocab;
  for (char32_t c : U"abcdefgh") {
    if (c) vocab.Add(c);
  }
  CharEncoder enc(EncoderConfig{vocab.size(), 4, 3, 1}, binder);
  const CharSequence seq = Seq("abcdefghabcdefgh", vocab);
  Tape tape;
  const Tensor clean = enc.Embed(tape, store, seq, 0.0, nullptr).value();
  Rng rng(9);
  const Tensor dropped = enc.Embed(tape, store, seq, 0.5, &rng).value();
  std::size_t zero_rows = 0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    bool zero = true, same = true;
    for (std::size_t j = 0; j < 4; ++j) {
      zero = zero && dropped.at(t, j) == 0.0;
      same = same && dropped.at(t, j) == clean.at(t, j);
    }
    EXPECT_TRUE(zero || same);
    zero_rows += zero;
  }
  EXPECT_GT(zero_rows, 0u);
  EXPECT_LT(zero_rows, seq.size());
}

TEST(Encoder, UnitDropoutScalesKeptUnits) {
  Rng rng(4);
  Tape tape;
  const Tensor x = RandomTensor({10, 10}, rng);
  const Tensor y = UnitDropout(tape.Constant(x), 0.25, rng).value();
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_TRUE(y[i] == 0.0 || y[i] == x[i] * (1.0 / 0.75));
  }
  EXPECT_EQ(UnitDropout(tape.Constant(x), 0.0, rng).value(), x);
}

TEST(Encoder, DirectionalSymmetry) {
  // Swapping the forward and backward weights and reversing the input
  // mirrors the output: rows reversed, halves exchanged.
  Rng rng(13);
  ParameterStore store;
  ParamBinder binder(store, &rng, 0.5);
  CharEncoder enc(EncoderConfig{5, 3, 4, 2}, binder);
  const Tensor x = RandomTensor({7, 3}, rng);
  Tensor reversed({7, 3});
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t j = 0; j < 3; ++j) reversed.at(t, j) = x.at(6 - t, j);
  }
  ParameterStore swapped = store;
  for (std::size_t l = 0; l < 2; ++l) {
    const LstmParams& f = enc.forward_layers()[l];
    const LstmParams& b = enc.backward_layers()[l];
    for (auto [pf, pb] : {std::pair{f.input_weights, b.input_weights},
                          std::pair{f.recurrent_weights, b.recurrent_weights},
                          std::pair{f.bias, b.bias}}) {
      std::swap(swapped.value(pf), swapped.value(pb));
    }
  }
  // Layer 2 reads [fwd | bwd]; after swapping directions its input halves
  // are exchanged too, so its input weight rows must be exchanged as well.
  for (const LstmParams* p : {&enc.forward_layers()[1], &enc.backward_layers()[1]}) {
    Tensor& w = swapped.value(p->input_weights);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < w.cols(); ++j) std::swap(w.at(i, j), w.at(4 + i, j));
    }
  }
  Tape tape;
  const Tensor a = enc.Encode(tape, store, tape.Constant(x), 0.0, nullptr).value();
  const Tensor b = enc.Encode(tape, swapped, tape.Constant(reversed), 0.0, nullptr).value();
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(a.at(t, j), b.at(6 - t, 4 + j), 1e-12);
      EXPECT_NEAR(a.at(t, 4 + j), b.at(6 - t, j), 1e-12);
    }
  }
}

}  // namespace
}  // namespace segtag
