#ifndef SEGTAG_SEGFEAT_HPP_
#define SEGTAG_SEGFEAT_HPP_

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "segtag/encoding.hpp"
#include "segtag/ops.hpp"
#include "segtag/tape.hpp"

namespace segtag {

// Representations of every candidate segment of one sequence.
// by_length[d - 1] is a (T - d + 1) x D matrix whose row a is the segment
// starting at a with length d; lengths run from 1 to min(L, T).
struct SegmentFeatures {
  std::vector<Var> by_length;
  std::size_t length = 0;  // T
  std::size_t dim = 0;     // D

  std::size_t max_length() const { return by_length.size(); }
};

enum class FeaturizerKind { kGrConv, kSrnn, kDiff };

FeaturizerKind ParseFeaturizerKind(std::string_view name);
std::string_view FeaturizerName(FeaturizerKind kind);

struct SegFeatConfig {
  FeaturizerKind kind = FeaturizerKind::kGrConv;
  std::size_t input_dim = 200;  // width of the character states (2H)
  std::size_t dim = 100;        // D
  Activation nonlinearity = Activation::kTanh;
  std::size_t srnn_hidden = 50;
};

class SegmentFeaturizer {
 public:
  virtual ~SegmentFeaturizer() = default;
  virtual FeaturizerKind kind() const = 0;
  virtual std::size_t dim() const = 0;
  // `states` is T x input_dim; max_length >= 1.
  virtual SegmentFeatures Compute(Tape& tape, const ParameterStore& store, Var states,
                                  std::size_t max_length) const = 0;
};

std::unique_ptr<SegmentFeaturizer> MakeFeaturizer(const SegFeatConfig& config,
                                                  ParamBinder& binder);

// Gated recursive convolution. Level 1 is a learned projection of the
// character states; node k of level d combines nodes k and k+1 of level d-1:
//
//   z = gate_l * left + gate_r * right + gate_m * g(W_L left + W_R right + b_w)
//
// The three gates come from a softmax over [left; right] * U + b_u, taken
// independently for each output coordinate, so they are non-negative and
// sum to one.
class GrConvFeaturizer : public SegmentFeaturizer {
 public:
  GrConvFeaturizer(const SegFeatConfig& config, ParamBinder& binder);

  FeaturizerKind kind() const override { return FeaturizerKind::kGrConv; }
  std::size_t dim() const override { return config_.dim; }
  SegmentFeatures Compute(Tape& tape, const ParameterStore& store, Var states,
                          std::size_t max_length) const override;

  // Diagnostic hook: replace the learned gates with constants
  // {left, right, middle}.
  void set_fixed_gates(std::optional<std::array<double, 3>> gates) { fixed_gates_ = gates; }

  // Gates of the most recent Compute, as (left, right, middle) matrices per
  // level >= 2. Only recorded when gate recording is enabled.
  void set_record_gates(bool record) { record_gates_ = record; }
  const std::vector<std::array<Var, 3>>& recorded_gates() const { return gates_; }

  ParamId proj_weights, proj_bias, left_weights, right_weights, comp_bias, gate_weights,
      gate_bias;

 private:
  SegFeatConfig config_;
  std::optional<std::array<double, 3>> fixed_gates_;
  bool record_gates_ = false;
  mutable std::vector<std::array<Var, 3>> gates_;
};

// Segmental RNN: each segment is read by its own biLSTM and represented by
// the final states of both directions, projected to D. Runs that share a
// start (forward) or an end (backward) share their prefix computation, so a
// sequence costs O(T * L) LSTM steps per direction.
class SrnnFeaturizer : public SegmentFeaturizer {
 public:
  SrnnFeaturizer(const SegFeatConfig& config, ParamBinder& binder);

  FeaturizerKind kind() const override { return FeaturizerKind::kSrnn; }
  std::size_t dim() const override { return config_.dim; }
  SegmentFeatures Compute(Tape& tape, const ParameterStore& store, Var states,
                          std::size_t max_length) const override;

  // Representation of a single segment computed from scratch, for checking
  // the shared computation.
  Var ComputeOne(Tape& tape, const ParameterStore& store, Var states, std::size_t start,
                 std::size_t length) const;

  LstmParams forward, backward;
  ParamId proj_weights, proj_bias;

 private:
  SegFeatConfig config_;
};

// Hidden-state differences: for segment [a, a+d) the forward half is
// h_fwd(a+d-1) - h_fwd(a-1) and the backward half h_bwd(a) - h_bwd(a+d),
// with zero vectors outside the sequence, projected to D.
class DiffFeaturizer : public SegmentFeaturizer {
 public:
  DiffFeaturizer(const SegFeatConfig& config, ParamBinder& binder);

  FeaturizerKind kind() const override { return FeaturizerKind::kDiff; }
  std::size_t dim() const override { return config_.dim; }
  SegmentFeatures Compute(Tape& tape, const ParameterStore& store, Var states,
                          std::size_t max_length) const override;

  ParamId proj_weights, proj_bias;

 private:
  SegFeatConfig config_;
};

}  // namespace segtag

#endif  // SEGTAG_SEGFEAT_HPP_
