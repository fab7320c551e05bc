#ifndef SEGTAG_TESTS_FEATURIZER_ORACLES_HPP_
#define SEGTAG_TESTS_FEATURIZER_ORACLES_HPP_

#include <cstddef>

#include "segtag/segfeat.hpp"

namespace segtag::testing {

// Each function computes the featurizer output for `states` up to
// `max_length` and returns the largest absolute difference from an
// independent reference.

// Reference: the pyramid built node by node with scalar loops.
double GrConvOracleDeviation(const GrConvFeaturizer& f, const ParameterStore& store,
                             const Tensor& states, std::size_t max_length, Activation act);

// Reference: every segment recomputed from scratch by ComputeOne.
double SrnnOracleDeviation(const SrnnFeaturizer& f, const ParameterStore& store,
                           const Tensor& states, std::size_t max_length);

// Reference: the hidden-state differences formed by explicit indexing,
// zero outside the sequence, then projected.
double DiffOracleDeviation(const DiffFeaturizer& f, const ParameterStore& store,
                           const Tensor& states, std::size_t max_length);

}  // namespace segtag::testing

#endif  // SEGTAG_TESTS_FEATURIZER_ORACLES_HPP_
