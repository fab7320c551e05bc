#include "segtag/segfeat.hpp"

#include <algorithm>
#include <string>

namespace segtag {

FeaturizerKind ParseFeaturizerKind(std::string_view name) {
  if (name == "grconv") return FeaturizerKind::kGrConv;
  if (name == "srnn") return FeaturizerKind::kSrnn;
  if (name == "diff") return FeaturizerKind::kDiff;
  throw std::invalid_argument("unknown featurizer: " + std::string(name));
}

std::string_view FeaturizerName(FeaturizerKind kind) {
  switch (kind) {
    case FeaturizerKind::kGrConv: return "grconv";
    case FeaturizerKind::kSrnn: return "srnn";
    case FeaturizerKind::kDiff: return "diff";
  }
  return "?";
}

std::unique_ptr<SegmentFeaturizer> MakeFeaturizer(const SegFeatConfig& config,
                                                  ParamBinder& binder) {
  switch (config.kind) {
    case FeaturizerKind::kGrConv: return std::make_unique<GrConvFeaturizer>(config, binder);
    case FeaturizerKind::kSrnn: return std::make_unique<SrnnFeaturizer>(config, binder);
    case FeaturizerKind::kDiff: return std::make_unique<DiffFeaturizer>(config, binder);
  }
  throw ContractError("unhandled featurizer kind");
}

namespace {

void CheckInput(Var states, std::size_t input_dim, std::size_t max_length) {
  if (states.cols() != input_dim) {
    throw DimensionError("segment featurizer expects state width " + std::to_string(input_dim) +
                         ", got " + ShapeString(states.value().shape()));
  }
  if (max_length == 0) throw ContractError("maximum segment length must be at least 1");
}

Var Project(Tape& tape, const ParameterStore& store, ParamId w, ParamId b, Var x) {
  return AddRowwise(MatMul(x, tape.Param(store, w)), tape.Param(store, b));
}

}  // namespace

GrConvFeaturizer::GrConvFeaturizer(const SegFeatConfig& config, ParamBinder& binder)
    : config_(config) {
  const std::size_t d = config.dim;
  proj_weights = binder.Uniform("grconv.proj_w", Shape{config.input_dim, d});
  proj_bias = binder.Uniform("grconv.proj_b", Shape{d});
  left_weights = binder.Uniform("grconv.w_left", Shape{d, d});
  right_weights = binder.Uniform("grconv.w_right", Shape{d, d});
  comp_bias = binder.Uniform("grconv.b", Shape{d});
  gate_weights = binder.Uniform("grconv.gate_w", Shape{2 * d, 3 * d});
  gate_bias = binder.Uniform("grconv.gate_b", Shape{3 * d});
}

SegmentFeatures GrConvFeaturizer::Compute(Tape& tape, const ParameterStore& store, Var states,
                                          std::size_t max_length) const {
  CheckInput(states, config_.input_dim, max_length);
  const std::size_t length = states.rows();
  const std::size_t d = config_.dim;
  const std::size_t levels = std::min(max_length, length);
  gates_.clear();

  SegmentFeatures out;
  out.length = length;
  out.dim = d;
  out.by_length.push_back(Project(tape, store, proj_weights, proj_bias, states));
  if (levels == 1) return out;

  Var wl = tape.Param(store, left_weights);
  Var wr = tape.Param(store, right_weights);
  Var bw = tape.Param(store, comp_bias);
  Var gw = tape.Param(store, gate_weights);
  Var gb = tape.Param(store, gate_bias);
  for (std::size_t level = 2; level <= levels; ++level) {
    const std::size_t nodes = length - level + 1;
    Var below = out.by_length.back();
    Var left = SliceRows(below, 0, nodes);
    Var right = SliceRows(below, 1, nodes + 1);
    Var composed =
        Apply(config_.nonlinearity, AddRowwise(Add(MatMul(left, wl), MatMul(right, wr)), bw));
    std::array<Var, 3> gate;
    if (fixed_gates_) {
      for (std::size_t k = 0; k < 3; ++k) {
        gate[k] = tape.Constant(Tensor(Shape{nodes, d}, (*fixed_gates_)[k]));
      }
    } else {
      Var logits = AddRowwise(MatMul(ConcatCols(std::vector<Var>{left, right}), gw), gb);
      Var soft = GroupSoftmax(logits, 3);
      for (std::size_t k = 0; k < 3; ++k) gate[k] = SliceCols(soft, k * d, (k + 1) * d);
    }
    if (record_gates_) gates_.push_back(gate);
    Var z = Add(Add(Mul(gate[0], left), Mul(gate[1], right)), Mul(gate[2], composed));
    out.by_length.push_back(z);
  }
  return out;
}

SrnnFeaturizer::SrnnFeaturizer(const SegFeatConfig& config, ParamBinder& binder)
    : config_(config) {
  forward = MakeLstmParams(binder, "srnn.fwd", config.input_dim, config.srnn_hidden);
  backward = MakeLstmParams(binder, "srnn.bwd", config.input_dim, config.srnn_hidden);
  proj_weights = binder.Uniform("srnn.proj_w", Shape{2 * config.srnn_hidden, config.dim});
  proj_bias = binder.Uniform("srnn.proj_b", Shape{config.dim});
}

SegmentFeatures SrnnFeaturizer::Compute(Tape& tape, const ParameterStore& store, Var states,
                                        std::size_t max_length) const {
  CheckInput(states, config_.input_dim, max_length);
  const std::size_t length = states.rows();
  const std::size_t hidden = config_.srnn_hidden;
  const std::size_t levels = std::min(max_length, length);

  Var fwd_in = AddRowwise(MatMul(states, tape.Param(store, forward.input_weights)),
                          tape.Param(store, forward.bias));
  Var bwd_in = AddRowwise(MatMul(states, tape.Param(store, backward.input_weights)),
                          tape.Param(store, backward.bias));
  Var fwd_wh = tape.Param(store, forward.recurrent_weights);
  Var bwd_wh = tape.Param(store, backward.recurrent_weights);

  SegmentFeatures out;
  out.length = length;
  out.dim = config_.dim;
  // Step k advances every run by one character. Forward runs are indexed
  // by segment start a and read character a + k; backward runs are indexed
  // by segment end e = a + k and read character a. In both cases row a of
  // step k belongs to segment (a, k + 1).
  Var fh, fc, bh, bc;
  for (std::size_t k = 0; k < levels; ++k) {
    const std::size_t rows = length - k;
    Var fpre = SliceRows(fwd_in, k, length);
    Var bpre = SliceRows(bwd_in, 0, rows);
    Var fc_prev, bc_prev;
    if (k > 0) {
      fpre = Add(fpre, MatMul(SliceRows(fh, 0, rows), fwd_wh));
      fc_prev = SliceRows(fc, 0, rows);
      bpre = Add(bpre, MatMul(SliceRows(bh, 1, rows + 1), bwd_wh));
      bc_prev = SliceRows(bc, 1, rows + 1);
    }
    Var fhc = LstmCell(fpre, fc_prev);
    Var bhc = LstmCell(bpre, bc_prev);
    fh = SliceCols(fhc, 0, hidden);
    fc = SliceCols(fhc, hidden, 2 * hidden);
    bh = SliceCols(bhc, 0, hidden);
    bc = SliceCols(bhc, hidden, 2 * hidden);
    out.by_length.push_back(
        Project(tape, store, proj_weights, proj_bias, ConcatCols(std::vector<Var>{fh, bh})));
  }
  return out;
}

Var SrnnFeaturizer::ComputeOne(Tape& tape, const ParameterStore& store, Var states,
                               std::size_t start, std::size_t length) const {
  Var segment = SliceRows(states, start, start + length);
  Var fwd = RunLstm(tape, store, forward, segment, false);
  Var bwd = RunLstm(tape, store, backward, segment, true);
  Var both = ConcatCols(std::vector<Var>{SliceRows(fwd, length - 1, length), SliceRows(bwd, 0, 1)});
  return Project(tape, store, proj_weights, proj_bias, both);
}

DiffFeaturizer::DiffFeaturizer(const SegFeatConfig& config, ParamBinder& binder)
    : config_(config) {
  if (config.input_dim % 2 != 0) {
    throw DimensionError("difference features need an even state width [forward | backward]");
  }
  proj_weights = binder.Uniform("diff.proj_w", Shape{config.input_dim, config.dim});
  proj_bias = binder.Uniform("diff.proj_b", Shape{config.dim});
}

SegmentFeatures DiffFeaturizer::Compute(Tape& tape, const ParameterStore& store, Var states,
                                        std::size_t max_length) const {
  CheckInput(states, config_.input_dim, max_length);
  const std::size_t length = states.rows();
  const std::size_t half = config_.input_dim / 2;
  const std::size_t levels = std::min(max_length, length);
  Var zero = tape.Constant(Tensor(Shape{1, half}));
  // padded_fwd row i holds h_fwd(i - 1); padded_bwd row i holds h_bwd(i).
  Var padded_fwd = ConcatRows(std::vector<Var>{zero, SliceCols(states, 0, half)});
  Var padded_bwd = ConcatRows(std::vector<Var>{SliceCols(states, half, 2 * half), zero});

  SegmentFeatures out;
  out.length = length;
  out.dim = config_.dim;
  for (std::size_t d = 1; d <= levels; ++d) {
    const std::size_t rows = length - d + 1;
    Var fwd = Sub(SliceRows(padded_fwd, d, length + 1), SliceRows(padded_fwd, 0, rows));
    Var bwd = Sub(SliceRows(padded_bwd, 0, rows), SliceRows(padded_bwd, d, length + 1));
    out.by_length.push_back(
        Project(tape, store, proj_weights, proj_bias, ConcatCols(std::vector<Var>{fwd, bwd})));
  }
  return out;
}

}  // namespace segtag
