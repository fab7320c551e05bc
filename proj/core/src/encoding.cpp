#include "segtag/encoding.hpp"

namespace segtag {

LstmParams MakeLstmParams(ParamBinder& binder, const std::string& prefix, std::size_t input_dim,
                          std::size_t hidden) {
  LstmParams p;
  p.input_weights = binder.Uniform(prefix + ".wx", Shape{input_dim, 4 * hidden});
  p.recurrent_weights = binder.Uniform(prefix + ".wh", Shape{hidden, 4 * hidden});
  p.bias = binder.UniformWithBand(prefix + ".b", Shape{4 * hidden}, hidden, 2 * hidden, 1.0);
  return p;
}

Var RunLstm(Tape& tape, const ParameterStore& store, const LstmParams& params, Var input,
            bool reverse) {
  const std::size_t steps = input.rows();
  Var wx = tape.Param(store, params.input_weights);
  Var wh = tape.Param(store, params.recurrent_weights);
  Var bias = tape.Param(store, params.bias);
  const std::size_t hidden = wh.rows();
  Var projected = AddRowwise(MatMul(input, wx), bias);

  std::vector<Var> outputs(steps);
  Var h, c;
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    Var pre = SliceRows(projected, t, t + 1);
    if (s > 0) pre = Add(pre, MatMul(h, wh));
    Var hc = LstmCell(pre, c);
    h = SliceCols(hc, 0, hidden);
    c = SliceCols(hc, hidden, 2 * hidden);
    outputs[t] = h;
  }
  return ConcatRows(outputs);
}

Var UnitDropout(Var x, double p, Rng& rng) {
  if (p <= 0.0) return x;
  Tensor mask(x.value().shape());
  const double keep_scale = p >= 1.0 ? 0.0 : 1.0 / (1.0 - p);
  for (double& m : mask.data()) m = rng.Bernoulli(p) ? 0.0 : keep_scale;
  return Mul(x, x.tape().Constant(std::move(mask)));
}

CharEncoder::CharEncoder(const EncoderConfig& config, ParamBinder& binder) : config_(config) {
  if (config.embed_dim == 0 || config.hidden == 0 || config.layers == 0) {
    throw ContractError("encoder dimensions must be positive");
  }
  embed_ = binder.Uniform("embed", Shape{config.vocab_size + 2, config.embed_dim});
  for (std::size_t layer = 0; layer < config.layers; ++layer) {
    const std::size_t in = layer == 0 ? config.embed_dim : 2 * config.hidden;
    const std::string prefix = "lstm" + std::to_string(layer);
    forward_.push_back(MakeLstmParams(binder, prefix + ".fwd", in, config.hidden));
    backward_.push_back(MakeLstmParams(binder, prefix + ".bwd", in, config.hidden));
  }
}

Var CharEncoder::Embed(Tape& tape, const ParameterStore& store, const CharSequence& seq,
                       double dropout_p, Rng* rng) const {
  if (seq.size() == 0) throw ContractError("cannot embed an empty sequence");
  if (dropout_p > 0.0 && !rng) throw ContractError("dropout requires a random generator");
  std::vector<std::vector<std::size_t>> rows(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (dropout_p > 0.0 && rng->Bernoulli(dropout_p)) continue;
    auto& r = rows[t];
    if (seq.ids[t] != CharVocab::kOov && seq.ids[t] < config_.vocab_size) r.push_back(seq.ids[t]);
    if (seq.space_before[t]) r.push_back(space_before_row());
    if (seq.space_after[t]) r.push_back(space_after_row());
  }
  return GatherRowSums(tape.Param(store, embed_), rows);
}

Var CharEncoder::Encode(Tape& tape, const ParameterStore& store, Var embedded, double dropout_p,
                        Rng* rng) const {
  if (embedded.rows() == 0) throw ContractError("cannot encode an empty sequence");
  if (dropout_p > 0.0 && !rng) throw ContractError("dropout requires a random generator");
  Var x = embedded;
  for (std::size_t layer = 0; layer < config_.layers; ++layer) {
    Var fwd = RunLstm(tape, store, forward_[layer], x, false);
    Var bwd = RunLstm(tape, store, backward_[layer], x, true);
    x = ConcatCols(std::vector<Var>{fwd, bwd});
    if (dropout_p > 0.0) x = UnitDropout(x, dropout_p, *rng);
  }
  return x;
}

}  // namespace segtag
