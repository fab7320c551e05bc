#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "segtag/corruptor.hpp"
#include "segtag/utf8.hpp"
#include "synthetic.hpp"

namespace segtag {
namespace {

using testing::SyntheticCorpus;

std::string Serialize(const TagDoc& doc) {
  std::ostringstream out;
  WriteConllu(out, doc);
  return out.str();
}

Sentence Make(const std::vector<std::tuple<std::string, std::string, bool>>& tokens) {
  Sentence s;
  for (const auto& [form, upos, space] : tokens) {
    Token t;
    t.form = form;
    t.upos = upos;
    t.gold_set = {upos};
    t.space_after = space;
    s.tokens.push_back(t);
  }
  AlignSentence(s);
  return s;
}

TEST(Corruptor, PresetProbabilities) {
  const NoiseSpec low = PresetSpec(NoiseLevel::kLow, 3);
  const NoiseSpec mid = PresetSpec(NoiseLevel::kMid, 3);
  const NoiseSpec high = PresetSpec(NoiseLevel::kHigh, 3);
  EXPECT_EQ(low.p_delete, 0.1);
  EXPECT_EQ(low.p_insert, 0.05);
  EXPECT_EQ(mid.p_delete, 0.3);
  EXPECT_EQ(mid.p_insert, 0.11);
  EXPECT_EQ(high.p_delete, 0.6);
  EXPECT_EQ(high.p_insert, 0.33);
  EXPECT_EQ(high.seed, 3u);
  EXPECT_EQ(ParseNoiseLevel("mid"), NoiseLevel::kMid);
  EXPECT_FALSE(ParseNoiseLevel("extreme"));
}

TEST(Corruptor, RejectsInvalidProbabilities) {
  EXPECT_THROW(Corrupt({}, NoiseSpec{1.5, 0.0, 1}), ConfigError);
  EXPECT_THROW(Corrupt({}, NoiseSpec{0.0, -0.1, 1}), ConfigError);
}

TEST(Corruptor, ZeroNoiseIsIdentity) {
  const TagDoc doc = SyntheticCorpus(100, 8);
  const CorruptionResult r = Corrupt(doc, NoiseSpec{0.0, 0.0, 5});
  EXPECT_EQ(Serialize(r.doc), Serialize(doc));
  EXPECT_EQ(r.report, NoiseReport{});
}

TEST(Corruptor, SeedReplayIsByteIdentical) {
  const TagDoc doc = SyntheticCorpus(200, 9);
  const NoiseSpec spec = PresetSpec(NoiseLevel::kHigh, 77);
  const CorruptionResult a = Corrupt(doc, spec);
  const CorruptionResult b = Corrupt(doc, spec);
  EXPECT_EQ(Serialize(a.doc), Serialize(b.doc));
  EXPECT_EQ(a.report, b.report);
  EXPECT_NE(Serialize(Corrupt(doc, PresetSpec(NoiseLevel::kHigh, 78)).doc), Serialize(a.doc));
}

TEST(Corruptor, PreservesNonSpaceCharacters) {
  const TagDoc doc = SyntheticCorpus(300, 10);
  for (NoiseLevel level : {NoiseLevel::kLow, NoiseLevel::kMid, NoiseLevel::kHigh}) {
    const CorruptionResult r = Corrupt(doc, PresetSpec(level, 4));
    ASSERT_EQ(r.doc.sentences.size(), doc.sentences.size());
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      ASSERT_EQ(NonSpaceChars(r.doc.sentences[i]), NonSpaceChars(doc.sentences[i]));
    }
  }
}

TEST(Corruptor, ReportAgreesWithCountEdits) {
  const TagDoc doc = SyntheticCorpus(300, 12);
  const CorruptionResult r = Corrupt(doc, PresetSpec(NoiseLevel::kMid, 6));
  EXPECT_EQ(CountEdits(doc, r.doc), r.report);
  EXPECT_GT(r.report.deletions, 0u);
  EXPECT_GT(r.report.insertions, 0u);
}

TEST(Corruptor, LabelsFollowCharacters) {
  const TagDoc doc = SyntheticCorpus(300, 13);
  const CorruptionResult r = Corrupt(doc, PresetSpec(NoiseLevel::kHigh, 1));
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const Sentence& clean = doc.sentences[s];
    for (const Token& tok : r.doc.sentences[s].tokens) {
      // Union of the labels of every clean token the noisy token touches.
      std::vector<std::string> expected;
      for (const Token& c : clean.tokens) {
        if (c.span.begin < tok.span.end && tok.span.begin < c.span.end &&
            std::find(expected.begin(), expected.end(), c.upos) == expected.end()) {
          expected.push_back(c.upos);
        }
      }
      EXPECT_EQ(tok.gold_set, expected);
      EXPECT_NE(std::find(tok.gold_set.begin(), tok.gold_set.end(), tok.upos), tok.gold_set.end());
    }
  }
}

TEST(Corruptor, ChainedMerges) {
  TagDoc doc;
  doc.sentences.push_back(
      Make({{"the", "DET", true}, {"fox", "NOUN", true}, {"ran", "VERB", false}, {".", "PUNCT", true}}));
  const CorruptionResult r = Corrupt(doc, NoiseSpec{1.0, 0.0, 2});
  // "ran." has no space to delete, so that boundary survives.
  ASSERT_EQ(r.doc.sentences[0].tokens.size(), 2u);
  const Token& merged = r.doc.sentences[0].tokens[0];
  EXPECT_EQ(merged.form, "thefoxran");
  EXPECT_EQ(merged.gold_set, (std::vector<std::string>{"DET", "NOUN", "VERB"}));
  EXPECT_EQ(r.doc.sentences[0].text, "thefoxran.");
  EXPECT_EQ(r.report.deletions, 2u);
}

TEST(Corruptor, FullInsertionSplitsEveryLongToken) {
  TagDoc doc;
  doc.sentences.push_back(Make({{"chased", "VERB", true}, {"a", "DET", true}, {"fox", "NOUN", true}}));
  const CorruptionResult r = Corrupt(doc, NoiseSpec{0.0, 1.0, 3});
  EXPECT_EQ(r.report.insertions, 2u);
  const Sentence& s = r.doc.sentences[0];
  ASSERT_EQ(s.tokens.size(), 5u);
  for (const Token& t : s.tokens) EXPECT_EQ(t.gold_set.size(), 1u);
  EXPECT_EQ(s.tokens[0].upos, "VERB");
  EXPECT_EQ(s.tokens[1].upos, "VERB");
}

// Deletions: Binomial(tokens with a following space, p_d). Insertions: one
// Bernoulli per token of two or more characters, with success probability
// p_i, or p_i (1 - p_d) when a deletion could have fired first.
TEST(Corruptor, EditCountsWithinBinomialBands) {
  const TagDoc doc = SyntheticCorpus(2000, 14);
  for (NoiseLevel level : {NoiseLevel::kLow, NoiseLevel::kMid, NoiseLevel::kHigh}) {
    const NoiseSpec spec = PresetSpec(level, 21);
    double del_n = 0, ins_mean = 0, ins_var = 0;
    for (const Sentence& s : doc.sentences) {
      for (std::size_t t = 0; t < s.tokens.size(); ++t) {
        const bool deletable = s.tokens[t].space_after && t + 1 < s.tokens.size();
        del_n += deletable;
        if (s.tokens[t].span.size() >= 2) {
          const double q = deletable ? spec.p_insert * (1.0 - spec.p_delete) : spec.p_insert;
          ins_mean += q;
          ins_var += q * (1.0 - q);
        }
      }
    }
    const NoiseReport r = Corrupt(doc, spec).report;
    const double del_mean = del_n * spec.p_delete;
    const double del_sd = std::sqrt(del_n * spec.p_delete * (1.0 - spec.p_delete));
    EXPECT_LE(std::abs(r.deletions - del_mean), 3.0 * del_sd) << NoiseLevelName(level);
    EXPECT_LE(std::abs(r.insertions - ins_mean), 3.0 * std::sqrt(ins_var)) << NoiseLevelName(level);
  }
}

TEST(CountEdits, RejectsDifferentCharacters) {
  TagDoc a, b;
  a.sentences.push_back(Make({{"ab", "X", true}}));
  b.sentences.push_back(Make({{"ac", "X", true}}));
  EXPECT_THROW(CountEdits(a, b), AlignmentError);
}

}  // namespace
}  // namespace segtag
