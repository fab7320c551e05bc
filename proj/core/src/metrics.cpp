#include "segtag/metrics.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

#include "segtag/tensor.hpp"

namespace segtag {

namespace {

void CheckDisjoint(const SentenceSpans& spans, const char* which, std::size_t sentence) {
  std::vector<CharSpan> sorted;
  sorted.reserve(spans.size());
  for (const auto& s : spans) sorted.push_back(s.span);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].begin < sorted[i - 1].end) {
      throw ContractError(std::string(which) + " spans overlap in sentence " +
                          std::to_string(sentence));
    }
  }
}

void CheckPair(const SpanLabelSet& gold, const SpanLabelSet& pred) {
  if (gold.size() != pred.size()) {
    throw ContractError("gold has " + std::to_string(gold.size()) + " sentences, prediction " +
                        std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    CheckDisjoint(gold[i], "gold", i);
    CheckDisjoint(pred[i], "predicted", i);
  }
}

bool Accepts(const LabeledSpan& gold, const LabeledSpan& pred) {
  if (pred.labels.empty()) return false;
  return std::find(gold.labels.begin(), gold.labels.end(), pred.labels.front()) !=
         gold.labels.end();
}

Prf Score(const SpanLabelSet& gold, const SpanLabelSet& pred, bool labeled) {
  CheckPair(gold, pred);
  Prf out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    out.gold += gold[i].size();
    out.predicted += pred[i].size();
    std::map<CharSpan, const LabeledSpan*> by_span;
    for (const auto& g : gold[i]) by_span[g.span] = &g;
    for (const auto& p : pred[i]) {
      auto it = by_span.find(p.span);
      if (it == by_span.end()) continue;
      if (!labeled || Accepts(*it->second, p)) ++out.matched;
    }
  }
  out.precision = out.predicted ? static_cast<double>(out.matched) / out.predicted : 0.0;
  out.recall = out.gold ? static_cast<double>(out.matched) / out.gold : 0.0;
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

SentenceSpans Spans(const Sentence& sentence, bool gold) {
  SentenceSpans out;
  out.reserve(sentence.tokens.size());
  for (const Token& tok : sentence.tokens) {
    LabeledSpan span{tok.span, {}};
    if (gold && !tok.gold_set.empty()) {
      span.labels = tok.gold_set;
    } else {
      span.labels = {tok.upos};
    }
    out.push_back(std::move(span));
  }
  return out;
}

nlohmann::json PrfJson(const Prf& prf) {
  return {{"p", prf.precision}, {"r", prf.recall}, {"f1", prf.f1}};
}

}  // namespace

SentenceSpans GoldSpans(const Sentence& sentence) { return Spans(sentence, true); }
SentenceSpans PredictedSpans(const Sentence& sentence) { return Spans(sentence, false); }

SpanLabelSet GoldSpans(const TagDoc& doc) {
  SpanLabelSet out;
  for (const auto& s : doc.sentences) out.push_back(GoldSpans(s));
  return out;
}

SpanLabelSet PredictedSpans(const TagDoc& doc) {
  SpanLabelSet out;
  for (const auto& s : doc.sentences) out.push_back(PredictedSpans(s));
  return out;
}

Prf TokenF1(const SpanLabelSet& gold, const SpanLabelSet& pred) {
  return Score(gold, pred, false);
}

Prf JointF1(const SpanLabelSet& gold, const SpanLabelSet& pred) {
  return Score(gold, pred, true);
}

double RelaxedAccuracy(const SpanLabelSet& gold, const SpanLabelSet& pred) {
  CheckPair(gold, pred);
  std::size_t total = 0, correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    // Predictions sorted by start; a gold span overlaps a contiguous run.
    std::vector<const LabeledSpan*> sorted;
    for (const auto& p : pred[i]) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledSpan* a, const LabeledSpan* b) { return a->span < b->span; });
    for (const auto& g : gold[i]) {
      ++total;
      auto it = std::lower_bound(sorted.begin(), sorted.end(), g.span.begin,
                                 [](const LabeledSpan* p, std::size_t pos) {
                                   return p->span.end <= pos;
                                 });
      for (; it != sorted.end() && (*it)->span.begin < g.span.end; ++it) {
        if (Accepts(g, **it)) {
          ++correct;
          break;
        }
      }
    }
  }
  return total ? static_cast<double>(correct) / total : 0.0;
}

double StrictAccuracy(const SpanLabelSet& gold, const SpanLabelSet& pred) {
  CheckPair(gold, pred);
  std::size_t total = 0, correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::map<CharSpan, const LabeledSpan*> by_span;
    for (const auto& p : pred[i]) by_span[p.span] = &p;
    for (const auto& g : gold[i]) {
      ++total;
      auto it = by_span.find(g.span);
      if (it != by_span.end() && Accepts(g, *it->second)) ++correct;
    }
  }
  return total ? static_cast<double>(correct) / total : 0.0;
}

std::string EvalReport::ToJson() const {
  nlohmann::json j;
  j["token_f1"] = PrfJson(token);
  j["joint_f1"] = PrfJson(joint);
  j["relaxed_acc"] = relaxed_accuracy ? nlohmann::json(*relaxed_accuracy) : nlohmann::json();
  j["n_sentences"] = sentences;
  j["n_gold_tokens"] = gold_tokens;
  return j.dump(2);
}

EvalReport Evaluate(const TagDoc& gold, const TagDoc& pred, const TagDoc* clean_gold) {
  auto check_alignment = [](const TagDoc& a, const TagDoc& b, const char* what) {
    if (a.sentences.size() != b.sentences.size()) {
      throw AlignmentError(std::string(what) + ": " + std::to_string(a.sentences.size()) +
                           " vs " + std::to_string(b.sentences.size()) + " sentences");
    }
    for (std::size_t i = 0; i < a.sentences.size(); ++i) {
      if (NonSpaceChars(a.sentences[i]) != NonSpaceChars(b.sentences[i])) {
        throw AlignmentError(std::string(what) + ": characters of sentence " +
                             std::to_string(i + 1) + " differ");
      }
    }
  };
  check_alignment(gold, pred, "gold and prediction");
  const SpanLabelSet gold_spans = GoldSpans(gold);
  const SpanLabelSet pred_spans = PredictedSpans(pred);
  EvalReport report;
  report.token = TokenF1(gold_spans, pred_spans);
  report.joint = JointF1(gold_spans, pred_spans);
  report.sentences = gold.sentences.size();
  report.gold_tokens = report.token.gold;
  if (clean_gold) {
    check_alignment(*clean_gold, pred, "clean gold and prediction");
    report.relaxed_accuracy = RelaxedAccuracy(GoldSpans(*clean_gold), pred_spans);
  }
  return report;
}

}  // namespace segtag
