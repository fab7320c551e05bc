#ifndef SEGTAG_ENCODING_HPP_
#define SEGTAG_ENCODING_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "segtag/corpus.hpp"
#include "segtag/ops.hpp"
#include "segtag/rng.hpp"
#include "segtag/tape.hpp"

namespace segtag {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 60;
  std::size_t hidden = 100;  // per direction
  std::size_t layers = 3;
};

// Weights of one LSTM direction; gate blocks ordered [input|forget|cell|output].
struct LstmParams {
  ParamId input_weights;      // in x 4H
  ParamId recurrent_weights;  // H x 4H
  ParamId bias;               // 4H
};

// Runs one LSTM direction over the rows of `input` from zero initial
// states. Row t of the result is the hidden state after reading row t; for
// `reverse` the sequence is read from the last row to the first.
Var RunLstm(Tape& tape, const ParameterStore& store, const LstmParams& params, Var input,
            bool reverse);

// Registers (or binds) one LSTM direction under `prefix`.
LstmParams MakeLstmParams(ParamBinder& binder, const std::string& prefix, std::size_t input_dim,
                          std::size_t hidden);

// Character input layer plus stacked biLSTM.
//
// The extended one-hot vector of a character has |V| + 2 dimensions: the
// character id, then "space before" and "space after". An out-of-vocabulary
// character sets no id dimension, so it contributes a zero vector; the space
// dimensions still apply. Multiplying this vector by the embedding matrix is
// a sum of at most three matrix rows.
class CharEncoder {
 public:
  CharEncoder(const EncoderConfig& config, ParamBinder& binder);

  const EncoderConfig& config() const { return config_; }
  std::size_t output_dim() const { return 2 * config_.hidden; }
  std::size_t space_before_row() const { return config_.vocab_size; }
  std::size_t space_after_row() const { return config_.vocab_size + 1; }

  // T x E embeddings. With dropout_p > 0 each row is independently zeroed
  // with probability dropout_p (no rescaling); `rng` is then required.
  Var Embed(Tape& tape, const ParameterStore& store, const CharSequence& seq, double dropout_p,
            Rng* rng) const;

  // T x 2H states, [forward | backward] per row. With dropout_p > 0 every
  // layer output gets inverted unit dropout (kept units scaled by 1/(1-p)).
  Var Encode(Tape& tape, const ParameterStore& store, Var embedded, double dropout_p,
             Rng* rng) const;

  const std::vector<LstmParams>& forward_layers() const { return forward_; }
  const std::vector<LstmParams>& backward_layers() const { return backward_; }
  ParamId embedding() const { return embed_; }

 private:
  EncoderConfig config_;
  ParamId embed_;
  std::vector<LstmParams> forward_;
  std::vector<LstmParams> backward_;
};

// Element-wise inverted dropout on a tape value; identity for p == 0.
Var UnitDropout(Var x, double p, Rng& rng);

}  // namespace segtag

#endif  // SEGTAG_ENCODING_HPP_
