#ifndef SEGTAG_CORRUPTOR_HPP_
#define SEGTAG_CORRUPTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "segtag/corpus.hpp"

namespace segtag {

struct NoiseSpec {
  double p_delete = 0.0;  // delete the space after a token
  double p_insert = 0.0;  // insert one space inside a token
  std::uint64_t seed = 1;

  // Throws ConfigError unless both probabilities lie in [0, 1].
  void Validate() const;
};

enum class NoiseLevel { kLow, kMid, kHigh };

std::optional<NoiseLevel> ParseNoiseLevel(std::string_view name);
std::string_view NoiseLevelName(NoiseLevel level);
// LOW 0.1 / 0.05, MID 0.3 / 0.11, HIGH 0.6 / 0.33 (deletion / insertion).
NoiseSpec PresetSpec(NoiseLevel level, std::uint64_t seed);

struct NoiseReport {
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  friend bool operator==(const NoiseReport&, const NoiseReport&) = default;
};

struct CorruptionResult {
  TagDoc doc;
  NoiseReport report;
};

// Corrupts the spacing of every sentence. Per original token, with
// probability p_delete the space after it is removed (only when one exists),
// otherwise with probability p_insert one space goes into a uniformly chosen
// gap between two of its characters. Tokens are then rebuilt from the
// surviving boundaries: pieces of a split token keep its label; a merged
// token accepts the union of its parts' labels and trains on one of them
// drawn uniformly. Sentence i draws from Rng::Derive(seed, i), so the output
// is a pure function of (doc, spec).
CorruptionResult Corrupt(const TagDoc& doc, const NoiseSpec& spec);

// Spaces removed and added between two versions of a corpus, counted over
// the shared non-space character positions. Throws AlignmentError when the
// documents do not hold the same characters.
NoiseReport CountEdits(const TagDoc& clean, const TagDoc& noisy);

}  // namespace segtag

#endif  // SEGTAG_CORRUPTOR_HPP_
