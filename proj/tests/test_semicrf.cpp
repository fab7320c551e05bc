#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "segtag/ops.hpp"
#include "segtag/semicrf.hpp"

namespace segtag {
namespace {

using namespace segtag::testing;

struct Instance {
  ScoredLattice lattice;
  Tensor transitions;
};

Instance RandomInstance(Rng& rng, bool integer_scores) {
  const std::size_t t = 1 + rng.UniformInt(6), l = 1 + rng.UniformInt(3),
                    y = 1 + rng.UniformInt(3);
  Instance inst{RandomLattice(t, l, y, rng, 2.0), RandomTensor({y + 1, y}, rng, 2.0)};
  if (integer_scores) {
    // Small integers make exact ties common, which exercises the tie-break.
    for (auto& m : inst.lattice.by_length) {
      for (double& v : m.data()) v = std::round(v);
    }
    for (double& v : inst.transitions.data()) v = std::round(v);
  }
  return inst;
}

// Lattice entries and transitions as parameters, so the tape yields
// gradients with respect to every score.
struct TapeInstance {
  ParameterStore store;
  std::vector<ParamId> lengths;
  ParamId transitions;

  explicit TapeInstance(const Instance& inst) {
    for (std::size_t d = 0; d < inst.lattice.by_length.size(); ++d) {
      lengths.push_back(store.Add("F" + std::to_string(d + 1), inst.lattice.by_length[d]));
    }
    transitions = store.Add("A", inst.transitions);
  }

  LatticeVars Vars(Tape& tape, const Instance& inst) const {
    LatticeVars v;
    v.length = inst.lattice.length;
    v.num_labels = inst.lattice.num_labels;
    for (ParamId id : lengths) v.by_length.push_back(tape.Param(store, id));
    return v;
  }
};

TEST(SemiCrf, ZeroScoresCountSegmentations) {
  // T=3, L=2, |Y|=2: labeled segmentations are 1+1+1 (8), 1+2 (4), 2+1 (4).
  const ScoredLattice lat = ScoredLattice::Zeros(3, 2, 2);
  const Tensor a({3, 2});
  EXPECT_EQ(LogPartition(lat, a), std::log(16.0));
}

TEST(SemiCrf, SingleSegmentSingleLabel) {
  ScoredLattice lat = ScoredLattice::Zeros(1, 1, 1);
  lat.score(0, 1, 0) = 0.75;
  Tensor a({2, 1});
  a.at(1, 0) = 0.25;
  EXPECT_DOUBLE_EQ(LogPartition(lat, a), 1.0);
  const ViterbiResult v = Viterbi(lat, a);
  ASSERT_EQ(v.segmentation.size(), 1u);
  EXPECT_EQ(v.segmentation[0], (Segment{0, 1, 0}));
  EXPECT_DOUBLE_EQ(v.score, 1.0);
}

TEST(SemiCrf, MatchesEnumeration) {
  Rng rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = RandomInstance(rng, trial % 3 == 0);
    const auto all = EnumerateSegmentations(inst.lattice, inst.transitions);
    EXPECT_NEAR(LogPartition(inst.lattice, inst.transitions),
                static_cast<double>(EnumeratedLogZ(all)), 1e-9);

    const ViterbiResult v = Viterbi(inst.lattice, inst.transitions);
    const Enumerated& best = EnumeratedArgmax(all);
    EXPECT_EQ(v.segmentation, best.segmentation) << "trial " << trial;
    EXPECT_EQ(v.score, best.score);

    const ScoredLattice m = Marginals(inst.lattice, inst.transitions);
    const ScoredLattice expect = EnumeratedMarginals(all, inst.lattice);
    for (std::size_t d = 0; d < m.by_length.size(); ++d) {
      for (std::size_t i = 0; i < m.by_length[d].size(); ++i) {
        EXPECT_NEAR(m.by_length[d][i], expect.by_length[d][i], 1e-9);
      }
    }
  }
}

TEST(SemiCrf, ViterbiScoreEqualsGoldScoreExactly) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = RandomInstance(rng, false);
    const ViterbiResult v = Viterbi(inst.lattice, inst.transitions);
    EXPECT_EQ(v.score, GoldScore(v.segmentation, inst.lattice, inst.transitions));
  }
}

TEST(SemiCrf, ViterbiTieBreaks) {
  // All paths tie: the shortest final segments with label 0 win.
  const ScoredLattice lat = ScoredLattice::Zeros(3, 2, 2);
  const ViterbiResult v = Viterbi(lat, Tensor({3, 2}));
  const Segmentation expect = {{0, 1, 0}, {1, 1, 0}, {2, 1, 0}};
  EXPECT_EQ(v.segmentation, expect);
}

TEST(SemiCrf, MarginalsAtEachPositionSumToOne) {
  Rng rng(77);
  const ScoredLattice lat = RandomLattice(9, 4, 3, rng, 3.0);
  const Tensor a = RandomTensor({4, 3}, rng);
  const ScoredLattice m = Marginals(lat, a);
  for (std::size_t pos = 0; pos < 9; ++pos) {
    double covering = 0.0;
    for (std::size_t d = 1; d <= 4; ++d) {
      for (std::size_t start = pos + 1 >= d ? pos + 1 - d : 0; start <= pos; ++start) {
        if (start + d > 9) continue;
        for (std::size_t y = 0; y < 3; ++y) covering += m.score(start, d, y);
      }
    }
    EXPECT_NEAR(covering, 1.0, 1e-12);
  }
}

TEST(SemiCrf, NllGradientIsMarginalMinusGold) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = RandomInstance(rng, false);
    const auto all = EnumerateSegmentations(inst.lattice, inst.transitions);
    const Segmentation gold = all[rng.UniformInt(all.size())].segmentation;
    TapeInstance ti(inst);
    Tape tape;
    Var loss = Nll(gold, ti.Vars(tape, inst), tape.Param(ti.store, ti.transitions));
    const Gradients g = tape.Backward(loss, ti.store);

    ScoredLattice expect = Marginals(inst.lattice, inst.transitions);
    for (const Segment& s : gold) expect.score(s.start, s.length, s.label) -= 1.0;
    for (std::size_t d = 0; d < ti.lengths.size(); ++d) {
      const Tensor& got = g[ti.lengths[d]];
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_NEAR(got[i], expect.by_length[d][i], 1e-8);
      }
    }
  }
}

TEST(SemiCrf, TapeMatchesNumericAndFiniteDifferences) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = RandomInstance(rng, false);
    const auto all = EnumerateSegmentations(inst.lattice, inst.transitions);
    const Segmentation gold = all[rng.UniformInt(all.size())].segmentation;
    TapeInstance ti(inst);
    auto run = [&](Tape& tape) {
      return Nll(gold, ti.Vars(tape, inst), tape.Param(ti.store, ti.transitions));
    };
    Tape tape;
    Var loss = run(tape);
    EXPECT_DOUBLE_EQ(loss.value().item(), Nll(gold, inst.lattice, inst.transitions));
    const Gradients g = tape.Backward(loss, ti.store);
    const GradCheck check = CheckGradients(ti.store, g, [&] {
      Tape t;
      return run(t).value().item();
    });
    EXPECT_LT(check.max_relative_error, 1e-5) << check.worst_param;
  }
}

TEST(SemiCrf, NllIsNonNegative) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = RandomInstance(rng, false);
    const Segmentation s = Viterbi(inst.lattice, inst.transitions).segmentation;
    EXPECT_GE(Nll(s, inst.lattice, inst.transitions), -1e-12);
  }
}

TEST(SemiCrf, RejectsInvalidSegmentations) {
  const ScoredLattice lat = ScoredLattice::Zeros(4, 2, 2);
  const Tensor a({3, 2});
  EXPECT_THROW(GoldScore({{0, 2, 0}}, lat, a), ContractError);                 // short
  EXPECT_THROW(GoldScore({{0, 3, 0}, {3, 1, 0}}, lat, a), ContractError);      // too long
  EXPECT_THROW(GoldScore({{0, 2, 0}, {1, 3, 0}}, lat, a), ContractError);      // overlap
  EXPECT_THROW(GoldScore({{0, 2, 0}, {2, 2, 2}}, lat, a), ContractError);      // label
  EXPECT_THROW(LogPartition(lat, Tensor({2, 2})), DimensionError);
}

TEST(SemiCrf, LongSequenceStaysFinite) {
  Rng rng(1);
  const ScoredLattice lat = RandomLattice(400, 23, 5, rng, 30.0);
  const Tensor a = RandomTensor({6, 5}, rng, 30.0);
  const double z = LogPartition(lat, a);
  EXPECT_TRUE(std::isfinite(z));
  EXPECT_GE(z, Viterbi(lat, a).score);
}

}  // namespace
}  // namespace segtag
