#include "segtag/semicrf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segtag/ops.hpp"

namespace segtag {

void CheckSegmentation(const Segmentation& s, std::size_t length, std::size_t max_length,
                       std::size_t num_labels) {
  std::size_t position = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const Segment& seg = s[j];
    const std::string where = "segment " + std::to_string(j);
    if (seg.start != position) {
      throw ContractError(where + " starts at " + std::to_string(seg.start) + ", expected " +
                          std::to_string(position));
    }
    if (seg.length == 0 || seg.length > max_length) {
      throw ContractError(where + " has length " + std::to_string(seg.length) +
                          " outside [1, " + std::to_string(max_length) + "]");
    }
    if (seg.label >= num_labels) {
      throw ContractError(where + " has label " + std::to_string(seg.label) + " of " +
                          std::to_string(num_labels));
    }
    position += seg.length;
  }
  if (position != length) {
    throw ContractError("segmentation covers " + std::to_string(position) + " of " +
                        std::to_string(length) + " characters");
  }
}

namespace {

// Read-only access to lattice scores regardless of where the tensors live.
struct LatticeView {
  std::size_t length = 0;
  std::size_t num_labels = 0;
  std::vector<const Tensor*> by_length;

  std::size_t max_length() const { return by_length.size(); }
  double score(std::size_t a, std::size_t d, std::size_t y) const {
    return by_length[d - 1]->at(a, y);
  }
};

LatticeView View(const ScoredLattice& lattice) {
  LatticeView v{lattice.length, lattice.num_labels, {}};
  for (const Tensor& t : lattice.by_length) v.by_length.push_back(&t);
  return v;
}

LatticeView View(const LatticeVars& lattice) {
  LatticeView v{lattice.length, lattice.num_labels, {}};
  for (const Var& var : lattice.by_length) v.by_length.push_back(&var.value());
  return v;
}

void CheckLattice(const LatticeView& lattice, const Tensor& transitions) {
  const std::size_t y = lattice.num_labels;
  if (lattice.length == 0) throw ContractError("lattice over an empty sequence");
  if (lattice.by_length.empty()) throw ContractError("lattice without segment lengths");
  if (lattice.max_length() > lattice.length) {
    throw DimensionError("lattice holds segments longer than the sequence");
  }
  for (std::size_t d = 1; d <= lattice.max_length(); ++d) {
    const Tensor& t = *lattice.by_length[d - 1];
    if (t.rows() != lattice.length - d + 1 || t.cols() != y) {
      throw DimensionError("lattice scores for length " + std::to_string(d) + " have shape " +
                           ShapeString(t.shape()) + ", expected [" +
                           std::to_string(lattice.length - d + 1) + "x" + std::to_string(y) +
                           "]");
    }
  }
  if (transitions.rows() != y + 1 || transitions.cols() != y || transitions.rank() != 2) {
    throw DimensionError("transition matrix " + ShapeString(transitions.shape()) +
                         " does not match " + std::to_string(y) + " labels plus START");
  }
}

// Forward table alpha[t][y], t = 1..T (row 0 unused). Returns log Z.
long double LogSumExpExtended(const std::vector<long double>& x) {
  long double m = -INFINITY;
  for (long double v : x) m = std::max(m, v);
  if (m == -INFINITY) return m;
  long double s = 0.0L;
  for (long double v : x) s += std::exp(static_cast<double>(v - m));
  return m + std::log(s);
}

// Forward recursion in factored form. F does not depend on the previous
// label, so
//   entry(s, y) = logsumexp_{y'} alpha(s, y') + A(y', y)    (A(START, y) at s = 0)
//   alpha(t, y) = logsumexp_{d} F(t - d, d, y) + entry(t - d, y)
// which costs O(T |Y|^2 + T L |Y|). Both tables are carried in extended
// precision and rounded once per entry on output.
struct ForwardTables {
  std::vector<double> alpha;  // (T + 1) x |Y|
  std::vector<double> entry;  // T x |Y|
  double log_z = 0.0;
};

ForwardTables Forward(const LatticeView& lattice, const Tensor& transitions) {
  const std::size_t n = lattice.length, labels = lattice.num_labels;
  const std::size_t start = StartRow(labels);
  std::vector<long double> alpha((n + 1) * labels, -INFINITY);
  std::vector<long double> entry(n * labels, -INFINITY);
  std::vector<long double> terms;
  for (std::size_t y = 0; y < labels; ++y) entry[y] = transitions.at(start, y);
  for (std::size_t t = 1; t <= n; ++t) {
    const std::size_t longest = std::min(lattice.max_length(), t);
    for (std::size_t y = 0; y < labels; ++y) {
      terms.clear();
      for (std::size_t d = 1; d <= longest; ++d) {
        terms.push_back(lattice.score(t - d, d, y) + entry[(t - d) * labels + y]);
      }
      alpha[t * labels + y] = LogSumExpExtended(terms);
    }
    if (t == n) break;
    for (std::size_t y = 0; y < labels; ++y) {
      terms.clear();
      for (std::size_t yp = 0; yp < labels; ++yp) {
        terms.push_back(alpha[t * labels + yp] + transitions.at(yp, y));
      }
      entry[t * labels + y] = LogSumExpExtended(terms);
    }
  }
  ForwardTables out;
  out.alpha.assign(alpha.begin(), alpha.end());
  out.entry.assign(entry.begin(), entry.end());
  terms.assign(alpha.begin() + static_cast<std::ptrdiff_t>(n * labels), alpha.end());
  out.log_z = static_cast<double>(LogSumExpExtended(terms));
  return out;
}

double GoldScoreValue(const Segmentation& s, const LatticeView& lattice,
                      const Tensor& transitions) {
  CheckSegmentation(s, lattice.length, lattice.max_length(), lattice.num_labels);
  double total = 0.0;
  std::size_t prev = StartRow(lattice.num_labels);
  for (const Segment& seg : s) {
    total = (total + lattice.score(seg.start, seg.length, seg.label)) +
            transitions.at(prev, seg.label);
    prev = seg.label;
  }
  return total;
}

}  // namespace

ScoredLattice ScoredLattice::Zeros(std::size_t length, std::size_t max_length,
                                   std::size_t num_labels) {
  ScoredLattice lattice;
  lattice.length = length;
  lattice.num_labels = num_labels;
  const std::size_t longest = std::min(max_length, length);
  for (std::size_t d = 1; d <= longest; ++d) {
    lattice.by_length.emplace_back(Shape{length - d + 1, num_labels});
  }
  return lattice;
}

ScoredLattice LatticeVars::Values() const {
  ScoredLattice out;
  out.length = length;
  out.num_labels = num_labels;
  for (const Var& v : by_length) out.by_length.push_back(v.value());
  return out;
}

LatticeVars ConstantLattice(Tape& tape, const ScoredLattice& lattice) {
  LatticeVars out;
  out.length = lattice.length;
  out.num_labels = lattice.num_labels;
  for (const Tensor& t : lattice.by_length) out.by_length.push_back(tape.Constant(t));
  return out;
}

LatticeVars ScoreLattice(const SegmentFeatures& features, Var weights, Var bias) {
  if (weights.cols() != features.dim || weights.value().rank() != 2) {
    throw DimensionError("score weights " + ShapeString(weights.value().shape()) +
                         " do not match feature width " + std::to_string(features.dim));
  }
  if (bias.value().size() != weights.rows()) {
    throw DimensionError("score bias " + ShapeString(bias.value().shape()) +
                         " does not match weights " + ShapeString(weights.value().shape()));
  }
  LatticeVars out;
  out.length = features.length;
  out.num_labels = weights.rows();
  for (const Var& z : features.by_length) {
    out.by_length.push_back(AddRowwise(MatMulBT(z, weights), bias));
  }
  return out;
}

double LogPartition(const ScoredLattice& lattice, const Tensor& transitions) {
  const LatticeView view = View(lattice);
  CheckLattice(view, transitions);
  return Forward(view, transitions).log_z;
}

Var LogPartition(const LatticeVars& lattice, Var transitions) {
  const LatticeView view = View(lattice);
  CheckLattice(view, transitions.value());
  ForwardTables fwd = Forward(view, transitions.value());
  const double log_z = fwd.log_z;

  std::vector<Var> inputs = lattice.by_length;
  inputs.push_back(transitions);
  Tape& tape = transitions.tape();
  return tape.Record(
      Tensor::Scalar(log_z), inputs,
      [lattice, transitions, fwd = std::move(fwd)](Tape& tape, const Tensor& g) {
        const LatticeView view = View(lattice);
        const Tensor& trans = transitions.value();
        const std::size_t n = view.length, labels = view.num_labels;
        const std::size_t start = StartRow(labels);
        std::vector<Tensor*> score_grads;
        for (const Var& v : lattice.by_length) score_grads.push_back(tape.GradOf(v));
        Tensor* trans_grad = tape.GradOf(transitions);

        // Adjoint of the forward recursion, latest position first. The
        // entry adjoints of position t are complete once every alpha(t', .)
        // with t' > t has been processed.
        std::vector<double> alpha_adj((n + 1) * labels, 0.0);
        std::vector<double> entry_adj(n * labels, 0.0);
        for (std::size_t y = 0; y < labels; ++y) {
          alpha_adj[n * labels + y] = g[0] * std::exp(fwd.alpha[n * labels + y] - fwd.log_z);
        }
        for (std::size_t t = n; t >= 1; --t) {
          if (t < n) {
            for (std::size_t y = 0; y < labels; ++y) {
              const double upstream = entry_adj[t * labels + y];
              if (upstream == 0.0) continue;
              const double total = fwd.entry[t * labels + y];
              for (std::size_t yp = 0; yp < labels; ++yp) {
                const double c = upstream * std::exp(fwd.alpha[t * labels + yp] +
                                                     trans.at(yp, y) - total);
                alpha_adj[t * labels + yp] += c;
                if (trans_grad) trans_grad->at(yp, y) += c;
              }
            }
          }
          const std::size_t longest = std::min(view.max_length(), t);
          for (std::size_t y = 0; y < labels; ++y) {
            const double upstream = alpha_adj[t * labels + y];
            if (upstream == 0.0) continue;
            const double total = fwd.alpha[t * labels + y];
            for (std::size_t d = 1; d <= longest; ++d) {
              const std::size_t a = t - d;
              const double c = upstream * std::exp(view.score(a, d, y) +
                                                   fwd.entry[a * labels + y] - total);
              entry_adj[a * labels + y] += c;
              if (score_grads[d - 1]) score_grads[d - 1]->at(a, y) += c;
            }
          }
        }
        if (trans_grad) {
          for (std::size_t y = 0; y < labels; ++y) trans_grad->at(start, y) += entry_adj[y];
        }
      });
}

double GoldScore(const Segmentation& s, const ScoredLattice& lattice, const Tensor& transitions) {
  const LatticeView view = View(lattice);
  CheckLattice(view, transitions);
  return GoldScoreValue(s, view, transitions);
}

Var GoldScore(const Segmentation& s, const LatticeVars& lattice, Var transitions) {
  const LatticeView view = View(lattice);
  CheckLattice(view, transitions.value());
  const double total = GoldScoreValue(s, view, transitions.value());
  std::vector<Var> inputs = lattice.by_length;
  inputs.push_back(transitions);
  return transitions.tape().Record(
      Tensor::Scalar(total), inputs, [s, lattice, transitions](Tape& tape, const Tensor& g) {
        Tensor* trans_grad = tape.GradOf(transitions);
        std::size_t prev = StartRow(lattice.num_labels);
        for (const Segment& seg : s) {
          if (Tensor* sg = tape.GradOf(lattice.by_length[seg.length - 1])) {
            sg->at(seg.start, seg.label) += g[0];
          }
          if (trans_grad) trans_grad->at(prev, seg.label) += g[0];
          prev = seg.label;
        }
      });
}

double Nll(const Segmentation& s, const ScoredLattice& lattice, const Tensor& transitions) {
  return LogPartition(lattice, transitions) - GoldScore(s, lattice, transitions);
}

Var Nll(const Segmentation& s, const LatticeVars& lattice, Var transitions) {
  Var gold = GoldScore(s, lattice, transitions);
  return Sub(LogPartition(lattice, transitions), gold);
}

ViterbiResult Viterbi(const ScoredLattice& lattice, const Tensor& transitions) {
  const LatticeView view = View(lattice);
  CheckLattice(view, transitions);
  const std::size_t n = view.length, labels = view.num_labels;
  const std::size_t start = StartRow(labels);
  struct Back {
    std::size_t length = 0;
    std::size_t prev = 0;
  };
  std::vector<double> best((n + 1) * labels, kNegInf);
  std::vector<Back> back((n + 1) * labels);
  for (std::size_t t = 1; t <= n; ++t) {
    const std::size_t longest = std::min(view.max_length(), t);
    for (std::size_t y = 0; y < labels; ++y) {
      double top = kNegInf;
      Back arg;
      bool found = false;
      for (std::size_t d = 1; d <= longest; ++d) {
        const std::size_t a = t - d;
        const double f = view.score(a, d, y);
        if (a == 0) {
          const double v = (0.0 + f) + transitions.at(start, y);
          if (!found || v > top) {
            top = v;
            arg = {d, start};
            found = true;
          }
        } else {
          for (std::size_t yp = 0; yp < labels; ++yp) {
            const double v = (best[a * labels + yp] + f) + transitions.at(yp, y);
            if (!found || v > top) {
              top = v;
              arg = {d, yp};
              found = true;
            }
          }
        }
      }
      best[t * labels + y] = top;
      back[t * labels + y] = arg;
    }
  }
  std::size_t label = 0;
  for (std::size_t y = 1; y < labels; ++y) {
    if (best[n * labels + y] > best[n * labels + label]) label = y;
  }
  ViterbiResult result;
  result.score = best[n * labels + label];
  std::size_t t = n;
  while (t > 0) {
    const Back& b = back[t * labels + label];
    result.segmentation.push_back(Segment{t - b.length, b.length, label});
    t -= b.length;
    label = b.prev;
  }
  std::reverse(result.segmentation.begin(), result.segmentation.end());
  return result;
}

ScoredLattice Marginals(const ScoredLattice& lattice, const Tensor& transitions) {
  const LatticeView view = View(lattice);
  CheckLattice(view, transitions);
  const std::size_t n = view.length, labels = view.num_labels;
  const ForwardTables fwd = Forward(view, transitions);

  // beta[t][y]: log-sum of all completions of positions t..T given that the
  // segment ending at t carries label y.
  std::vector<double> beta((n + 1) * labels, kNegInf);
  for (std::size_t y = 0; y < labels; ++y) beta[n * labels + y] = 0.0;
  std::vector<double> terms;
  for (std::size_t t = n; t-- > 1;) {
    const std::size_t longest = std::min(view.max_length(), n - t);
    for (std::size_t y = 0; y < labels; ++y) {
      terms.clear();
      for (std::size_t d = 1; d <= longest; ++d) {
        for (std::size_t yn = 0; yn < labels; ++yn) {
          terms.push_back(view.score(t, d, yn) + transitions.at(y, yn) +
                          beta[(t + d) * labels + yn]);
        }
      }
      beta[t * labels + y] = StableLogSumExp(terms);
    }
  }

  ScoredLattice out = ScoredLattice::Zeros(n, view.max_length(), labels);
  for (std::size_t d = 1; d <= view.max_length(); ++d) {
    for (std::size_t a = 0; a + d <= n; ++a) {
      for (std::size_t y = 0; y < labels; ++y) {
        out.score(a, d, y) = std::exp(fwd.entry[a * labels + y] + view.score(a, d, y) +
                                      beta[(a + d) * labels + y] - fwd.log_z);
      }
    }
  }
  return out;
}

CrfParams MakeCrfParams(ParamBinder& binder, std::size_t num_labels, std::size_t dim) {
  CrfParams p;
  p.weights = binder.Uniform("crf.w", Shape{num_labels, dim});
  p.bias = binder.Uniform("crf.b", Shape{num_labels});
  p.transitions = binder.Uniform("crf.transitions", Shape{num_labels + 1, num_labels});
  return p;
}

}  // namespace segtag
