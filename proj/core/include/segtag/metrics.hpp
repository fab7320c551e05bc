#ifndef SEGTAG_METRICS_HPP_
#define SEGTAG_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "segtag/corpus.hpp"

namespace segtag {

// A span over non-space characters with the labels it carries. Predictions
// carry one label; noisy gold tokens may accept several; an empty list
// means unlabeled.
struct LabeledSpan {
  CharSpan span;
  std::vector<std::string> labels;
};

using SentenceSpans = std::vector<LabeledSpan>;
using SpanLabelSet = std::vector<SentenceSpans>;  // one entry per sentence

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

// Gold spans take Token::gold_set, predicted spans Token::upos.
SentenceSpans GoldSpans(const Sentence& sentence);
SentenceSpans PredictedSpans(const Sentence& sentence);
SpanLabelSet GoldSpans(const TagDoc& doc);
SpanLabelSet PredictedSpans(const TagDoc& doc);

// Exact boundary match, micro-averaged over all sentences. Throws
// ContractError when spans within one sentence overlap or the sentence
// counts differ.
Prf TokenF1(const SpanLabelSet& gold, const SpanLabelSet& pred);
// Boundary match plus a predicted label accepted by the gold span.
Prf JointF1(const SpanLabelSet& gold, const SpanLabelSet& pred);

// Fraction of gold tokens for which some overlapping predicted span carries
// an accepted label. Gold comes from the clean corpus; predictions may
// come from a run on corrupted text, since both share the non-space
// character coordinates.
double RelaxedAccuracy(const SpanLabelSet& gold, const SpanLabelSet& pred);
// Fraction of gold tokens predicted with the identical span and an accepted label.
double StrictAccuracy(const SpanLabelSet& gold, const SpanLabelSet& pred);

struct EvalReport {
  Prf token;
  Prf joint;
  std::optional<double> relaxed_accuracy;
  std::size_t sentences = 0;
  std::size_t gold_tokens = 0;

  // {token_f1: {p, r, f1}, joint_f1: {p, r, f1}, relaxed_acc, n_sentences, n_gold_tokens}
  std::string ToJson() const;
};

// Scores `pred` against `gold`; with `clean_gold`, also relaxed accuracy
// against it. Throws AlignmentError when sentence counts or non-space
// character streams disagree.
EvalReport Evaluate(const TagDoc& gold, const TagDoc& pred, const TagDoc* clean_gold = nullptr);

}  // namespace segtag

#endif  // SEGTAG_METRICS_HPP_
