#ifndef SEGTAG_TRAINER_HPP_
#define SEGTAG_TRAINER_HPP_

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "segtag/corpus.hpp"
#include "segtag/model.hpp"
#include "segtag/tape.hpp"

namespace segtag {

// Non-finite loss or gradient during training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamConfig AdamFrom(const TrainConfig& config);

struct AdamState {
  Gradients first;   // m
  Gradients second;  // v
  std::size_t step = 0;

  AdamState() = default;
  explicit AdamState(const ParameterStore& store) : first(store), second(store) {}
};

// One bias-corrected Adam update:
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
void AdamStep(ParameterStore& params, const Gradients& grads, AdamState& state,
              const AdamConfig& config);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_nll = 0.0;  // mean per sentence
  double dev_token_f1 = 0.0;
  double dev_joint_f1 = 0.0;
  double seconds = 0.0;

  // One line of the training log: {epoch, train_nll, dev_token_f1, dev_joint_f1, seconds}.
  std::string ToJson() const;
};

struct TrainResult {
  Checkpoint best;  // parameters of the epoch with the highest dev joint F1
  std::vector<EpochLog> epochs;
};

struct TrainStreams {
  std::ostream* log = nullptr;          // JSON lines, one per epoch
  std::ostream* diagnostics = nullptr;  // warnings
};

// Mini-batch training with early stopping on dev joint F1. Sentences are
// shuffled per epoch from Rng::Derive(seed, epoch); sentence i of an epoch
// draws its dropout masks from Rng::Derive(seed, epoch, i). Gradients of a
// batch are summed in batch order whatever the thread count, so results do
// not depend on `threads`. Training sentences with a token longer than the
// maximum segment length cannot be represented and are skipped with a
// warning. Training stops after max_epochs, or once at least min_epochs have
// run and either dev joint F1 has not improved for `patience` epochs or it
// has reached target_dev_f1 (when non-zero).
TrainResult Train(const TagDoc& train, const TagDoc& dev, const TrainConfig& config,
                  const TrainStreams& streams = {});

// Batch loss and gradients for the given sentences; exposed for tests.
struct BatchGradients {
  double loss = 0.0;  // mean NLL
  Gradients grads;    // of the mean
};
BatchGradients ComputeBatch(const Model& model,
                            const std::vector<std::pair<CharSequence, Segmentation>>& batch,
                            const Dropout& dropout, const std::vector<Rng*>& rngs,
                            std::size_t threads);

// Tags one line of raw text. Whitespace only separates characters; the
// model decides all token boundaries. Empty input gives an empty sentence.
Sentence TagText(const Model& model, std::string_view text);
// Tags the text of every sentence, ignoring its tokenization. Empty
// sentences produce empty output and a warning on `diagnostics`.
TagDoc TagDocument(const Model& model, const TagDoc& doc, std::ostream* diagnostics = nullptr);

// Builds tokens from a segmentation of `seq`: a segment's form is its
// characters, with a single space wherever the input had one inside it.
Sentence SegmentsToSentence(const CharSequence& seq, const Segmentation& segmentation,
                            const TagSet& tags);

}  // namespace segtag

#endif  // SEGTAG_TRAINER_HPP_
