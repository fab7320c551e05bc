#include <benchmark/benchmark.h>

#include <string>

#include "segtag/model.hpp"
#include "segtag/trainer.hpp"

namespace {

using namespace segtag;

const char* kSentence = "The quick brown fox jumped over the lazy dog near the riverbank.";

Vocabularies BenchVocab() {
  Vocabularies v;
  for (char c : std::string(kSentence)) {
    if (c != ' ') v.chars.Add(static_cast<char32_t>(c));
  }
  for (const char* tag : {"DET", "ADJ", "NOUN", "VERB", "ADP", "PUNCT"}) v.tags.Add(tag);
  return v;
}

TrainConfig ConfigFor(int64_t featurizer, bool small) {
  TrainConfig c;
  c.featurizer = static_cast<FeaturizerKind>(featurizer);
  if (small) {
    c.embed_dim = 16;
    c.lstm_hidden = 24;
    c.lstm_layers = 1;
    c.segfeat_dim = 24;
    c.srnn_hidden = 16;
    c.max_segment_length = 12;
  }
  return c;
}

// Forward and backward of one sentence, the unit of work in training.
void BM_SentenceStep(benchmark::State& state) {
  Model model(ConfigFor(state.range(0), state.range(1) != 0), BenchVocab());
  const CharSequence seq = TextToCharSequence(kSentence, model.vocab().chars);
  Segmentation gold;
  for (std::size_t a = 0; a < seq.size(); a += 4) {
    gold.push_back({a, std::min<std::size_t>(4, seq.size() - a), a % 3});
  }
  Rng rng(3);
  const Dropout dropout{0.25, 0.25};
  for (auto _ : state) {
    Tape tape;
    Var loss = model.Loss(tape, seq, gold, dropout, &rng);
    benchmark::DoNotOptimize(tape.Backward(loss, model.params()));
  }
  state.SetLabel(std::string(FeaturizerName(model.config().featurizer)) +
                 (state.range(1) ? "/small" : "/default"));
}
BENCHMARK(BM_SentenceStep)
    ->ArgsProduct({{0, 1, 2}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State& state) {
  Model model(ConfigFor(0, state.range(0) != 0), BenchVocab());
  for (auto _ : state) benchmark::DoNotOptimize(TagText(model, kSentence));
}
BENCHMARK(BM_Decode)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
