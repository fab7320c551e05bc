#include "segtag/corruptor.hpp"

#include <algorithm>

#include "segtag/rng.hpp"
#include "segtag/utf8.hpp"

namespace segtag {

namespace {

// Character-level view of a sentence: every visible character with the
// space and token-boundary state of the gap after it.
struct CharGrid {
  std::vector<char32_t> chars;
  std::vector<bool> space_after;
  std::vector<bool> boundary_after;
  std::vector<std::size_t> token_of;
};

CharGrid BuildGrid(const Sentence& sentence) {
  CharGrid grid;
  for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
    const Token& tok = sentence.tokens[t];
    bool pending_space = false;
    for (const auto& dc : DecodeUtf8(tok.form)) {
      if (IsSpace(dc.code)) {
        pending_space = true;
        continue;
      }
      if (pending_space && !grid.chars.empty() && grid.token_of.back() == t) {
        grid.space_after.back() = true;
      }
      pending_space = false;
      grid.chars.push_back(dc.code);
      grid.space_after.push_back(false);
      grid.boundary_after.push_back(false);
      grid.token_of.push_back(t);
    }
    grid.boundary_after.back() = true;
    grid.space_after.back() = tok.space_after && t + 1 < sentence.tokens.size();
  }
  return grid;
}

std::vector<bool> SpaceFlags(const Sentence& sentence) { return BuildGrid(sentence).space_after; }

}  // namespace

void NoiseSpec::Validate() const {
  auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!ok(p_delete)) throw ConfigError("deletion probability must lie in [0, 1]");
  if (!ok(p_insert)) throw ConfigError("insertion probability must lie in [0, 1]");
}

std::optional<NoiseLevel> ParseNoiseLevel(std::string_view name) {
  if (name == "low") return NoiseLevel::kLow;
  if (name == "mid") return NoiseLevel::kMid;
  if (name == "high") return NoiseLevel::kHigh;
  return std::nullopt;
}

std::string_view NoiseLevelName(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::kLow: return "low";
    case NoiseLevel::kMid: return "mid";
    case NoiseLevel::kHigh: return "high";
  }
  return "?";
}

NoiseSpec PresetSpec(NoiseLevel level, std::uint64_t seed) {
  switch (level) {
    case NoiseLevel::kLow: return {0.1, 0.05, seed};
    case NoiseLevel::kMid: return {0.3, 0.11, seed};
    case NoiseLevel::kHigh: return {0.6, 0.33, seed};
  }
  return {0.0, 0.0, seed};
}

CorruptionResult Corrupt(const TagDoc& doc, const NoiseSpec& spec) {
  spec.Validate();
  CorruptionResult result;
  result.doc.sentences.reserve(doc.sentences.size());
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const Sentence& sentence = doc.sentences[s];
    Rng rng = Rng::Derive(spec.seed, s);
    CharGrid grid = BuildGrid(sentence);

    std::size_t first = 0;
    for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
      std::size_t last = first;
      while (!grid.boundary_after[last]) ++last;
      const double draw = rng.Uniform();
      if (grid.space_after[last] && draw < spec.p_delete) {
        grid.space_after[last] = false;
        grid.boundary_after[last] = false;
        ++result.report.deletions;
      } else if (last > first && rng.Uniform() < spec.p_insert) {
        std::vector<std::size_t> gaps;
        for (std::size_t g = first; g < last; ++g) {
          if (!grid.space_after[g]) gaps.push_back(g);
        }
        if (!gaps.empty()) {
          const std::size_t g = gaps[rng.UniformInt(gaps.size())];
          grid.space_after[g] = true;
          grid.boundary_after[g] = true;
          ++result.report.insertions;
        }
      }
      first = last + 1;
    }

    Sentence noisy;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < grid.chars.size(); ++i) {
      if (!grid.boundary_after[i]) continue;
      Token tok;
      for (std::size_t k = begin; k <= i; ++k) {
        AppendUtf8(tok.form, grid.chars[k]);
        if (k < i && grid.space_after[k]) tok.form.push_back(' ');
        const std::string& label = sentence.tokens[grid.token_of[k]].upos;
        if (std::find(tok.gold_set.begin(), tok.gold_set.end(), label) == tok.gold_set.end()) {
          tok.gold_set.push_back(label);
        }
      }
      tok.upos = tok.gold_set.size() == 1 ? tok.gold_set.front()
                                           : tok.gold_set[rng.UniformInt(tok.gold_set.size())];
      tok.space_after = grid.space_after[i];
      noisy.tokens.push_back(std::move(tok));
      begin = i + 1;
    }
    if (!noisy.tokens.empty()) noisy.tokens.back().space_after = sentence.tokens.back().space_after;
    AlignSentence(noisy);
    result.doc.sentences.push_back(std::move(noisy));
  }
  return result;
}

NoiseReport CountEdits(const TagDoc& clean, const TagDoc& noisy) {
  if (clean.sentences.size() != noisy.sentences.size()) {
    throw AlignmentError("documents differ in sentence count");
  }
  NoiseReport report;
  for (std::size_t s = 0; s < clean.sentences.size(); ++s) {
    if (NonSpaceChars(clean.sentences[s]) != NonSpaceChars(noisy.sentences[s])) {
      throw AlignmentError("characters of sentence " + std::to_string(s + 1) + " differ");
    }
    const auto before = SpaceFlags(clean.sentences[s]);
    const auto after = SpaceFlags(noisy.sentences[s]);
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (before[i] && !after[i]) ++report.deletions;
      if (!before[i] && after[i]) ++report.insertions;
    }
  }
  return report;
}

}  // namespace segtag
