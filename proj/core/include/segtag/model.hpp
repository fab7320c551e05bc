#ifndef SEGTAG_MODEL_HPP_
#define SEGTAG_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>

#include "segtag/corpus.hpp"
#include "segtag/encoding.hpp"
#include "segtag/segfeat.hpp"
#include "segtag/semicrf.hpp"
#include "segtag/tape.hpp"

namespace segtag {

struct TrainConfig {
  std::size_t batch_size = 20;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double dropout = 0.25;        // unit dropout on every biLSTM layer output
  double input_dropout = 0.25;  // whole-row zeroing of character embeddings
  std::size_t max_segment_length = 23;
  std::size_t min_epochs = 20;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double target_dev_f1 = 0.0;  // stop once dev joint F1 reaches this; 0 disables
  double grad_clip = 0.0;      // global gradient-norm cap; 0 disables
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  double init_scale = 0.1;

  std::size_t embed_dim = 60;
  std::size_t lstm_hidden = 100;
  std::size_t lstm_layers = 3;
  FeaturizerKind featurizer = FeaturizerKind::kGrConv;
  std::size_t segfeat_dim = 100;
  Activation segfeat_nonlinearity = Activation::kTanh;
  std::size_t srnn_hidden = 50;

  // Throws ConfigError naming the first invalid field.
  void Validate() const;
};

// Config files and checkpoint headers use these flat keys:
//   batch_size lr beta1 beta2 adam_eps dropout input_dropout
//   max_segment_length min_epochs max_epochs patience target_dev_f1
//   grad_clip seed threads init_scale embed_dim lstm_hidden lstm_layers
//   featurizer segfeat.dim segfeat.nonlinearity segfeat.srnn_hidden
// Keys absent from `json` keep their value from `base`; unknown keys raise
// ConfigError with the key name.
TrainConfig ConfigFromJson(const std::string& json, const TrainConfig& base = {});
std::string ConfigToJson(const TrainConfig& config);

class ModelIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  TrainConfig config;
  Vocabularies vocab;
  ParameterStore params;
  double best_dev_f1 = 0.0;
  std::size_t epoch = 0;
};

// Binary container: the 8 bytes "SEGTAGCK", a little-endian u32 format
// version, a u64 header length, a JSON header (config, vocabularies,
// tensor table, training summary), then every tensor as raw little-endian
// float64 in table order.
void SaveCheckpoint(const Checkpoint& checkpoint, std::ostream& out);
void SaveCheckpointFile(const Checkpoint& checkpoint, const std::string& path);
// Throws ModelIoError for unreadable or malformed files.
Checkpoint LoadCheckpoint(std::istream& in);
Checkpoint LoadCheckpointFile(const std::string& path);

// Dropout settings for one forward pass; all zero at decode time.
struct Dropout {
  double input = 0.0;
  double layer = 0.0;
};

// Character encoder, segment featurizer and semi-CRF output layer over one
// parameter store. The store is owned here; tapes read it by reference, so
// a Model must outlive every tape built from it.
class Model {
 public:
  // Fresh parameters drawn from config.seed.
  Model(const TrainConfig& config, Vocabularies vocab);
  // Parameters taken over from a checkpoint.
  explicit Model(Checkpoint checkpoint);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const TrainConfig& config() const { return config_; }
  const Vocabularies& vocab() const { return vocab_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const CharEncoder& encoder() const { return *encoder_; }
  const SegmentFeaturizer& featurizer() const { return *featurizer_; }
  const CrfParams& crf() const { return crf_; }

  LatticeVars Lattice(Tape& tape, const CharSequence& seq, const Dropout& dropout, Rng* rng) const;
  Var Transitions(Tape& tape) const { return tape.Param(params_, crf_.transitions); }
  Var Loss(Tape& tape, const CharSequence& seq, const Segmentation& gold, const Dropout& dropout,
           Rng* rng) const;

  // Viterbi segmentation without dropout.
  Segmentation Decode(const CharSequence& seq) const;

  Checkpoint ToCheckpoint(double best_dev_f1, std::size_t epoch) const;

 private:
  void Build(ParamBinder& binder);

  TrainConfig config_;
  Vocabularies vocab_;
  ParameterStore params_;
  std::unique_ptr<CharEncoder> encoder_;
  std::unique_ptr<SegmentFeaturizer> featurizer_;
  CrfParams crf_;
};

}  // namespace segtag

#endif  // SEGTAG_MODEL_HPP_
