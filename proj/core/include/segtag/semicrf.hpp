#ifndef SEGTAG_SEMICRF_HPP_
#define SEGTAG_SEMICRF_HPP_

#include <cstddef>
#include <vector>

#include "segtag/segfeat.hpp"
#include "segtag/segmentation.hpp"
#include "segtag/tape.hpp"

namespace segtag {

// Segment scores F(<a, d, y>) of one sequence. by_length[d - 1] is a
// (T - d + 1) x |Y| matrix, row a, column y.
struct ScoredLattice {
  std::size_t length = 0;      // T
  std::size_t num_labels = 0;  // |Y|
  std::vector<Tensor> by_length;

  std::size_t max_length() const { return by_length.size(); }
  double score(std::size_t start, std::size_t len, std::size_t label) const {
    return by_length[len - 1].at(start, label);
  }
  double& score(std::size_t start, std::size_t len, std::size_t label) {
    return by_length[len - 1].at(start, label);
  }
  // Zero scores for all (a, d <= min(L, T), y).
  static ScoredLattice Zeros(std::size_t length, std::size_t max_length,
                             std::size_t num_labels);
};

// Tape-backed lattice, same layout as ScoredLattice.
struct LatticeVars {
  std::size_t length = 0;
  std::size_t num_labels = 0;
  std::vector<Var> by_length;

  std::size_t max_length() const { return by_length.size(); }
  ScoredLattice Values() const;
};

// Wraps numeric scores as tape constants.
LatticeVars ConstantLattice(Tape& tape, const ScoredLattice& lattice);

// Transition matrices have |Y| + 1 rows; the last row is START.
inline std::size_t StartRow(std::size_t num_labels) { return num_labels; }

// F = features * W^T + b for every lattice entry. W is |Y| x D, b has |Y|.
LatticeVars ScoreLattice(const SegmentFeatures& features, Var weights, Var bias);

// log Z(x) by the semi-Markov forward recursion, computed in log space:
//   alpha(t, y) = logsumexp_{d <= min(L, t), y'} alpha(t - d, y') + F(t - d, d, y) + A(y', y)
// with alpha(0, .) = START. There is no end transition.
double LogPartition(const ScoredLattice& lattice, const Tensor& transitions);
// Differentiable version; gradients come from the reverse sweep of the same
// recursion.
Var LogPartition(const LatticeVars& lattice, Var transitions);

// Sum over segments of F + A(previous label, label), previous of the first
// segment being START. Throws ContractError for an invalid segmentation.
double GoldScore(const Segmentation& s, const ScoredLattice& lattice, const Tensor& transitions);
Var GoldScore(const Segmentation& s, const LatticeVars& lattice, Var transitions);

// -log p(s | x) = log Z(x) - score(s).
double Nll(const Segmentation& s, const ScoredLattice& lattice, const Tensor& transitions);
Var Nll(const Segmentation& s, const LatticeVars& lattice, Var transitions);

struct ViterbiResult {
  Segmentation segmentation;
  double score = 0.0;
};

// Highest-scoring segmentation. Ties go to the shorter last segment, then to
// the smaller previous label, then (for the final label) to the smaller
// label. The score is accumulated in the same order as GoldScore, so it
// equals GoldScore of the returned segmentation exactly.
ViterbiResult Viterbi(const ScoredLattice& lattice, const Tensor& transitions);

// Posterior P(<a, d, y> in s | x) by forward-backward, same layout as the
// lattice.
ScoredLattice Marginals(const ScoredLattice& lattice, const Tensor& transitions);

// Output layer parameters: W (|Y| x D), b (|Y|), A ((|Y| + 1) x |Y|).
struct CrfParams {
  ParamId weights;
  ParamId bias;
  ParamId transitions;
};

CrfParams MakeCrfParams(ParamBinder& binder, std::size_t num_labels, std::size_t dim);

}  // namespace segtag

#endif  // SEGTAG_SEMICRF_HPP_
