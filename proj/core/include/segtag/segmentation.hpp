#ifndef SEGTAG_SEGMENTATION_HPP_
#define SEGTAG_SEGMENTATION_HPP_

#include <cstddef>
#include <vector>

namespace segtag {

// Labeled segment <start, length, label> over non-space character positions.
struct Segment {
  std::size_t start = 0;
  std::size_t length = 1;
  std::size_t label = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

using Segmentation = std::vector<Segment>;

// Contiguous cover of [0, length) with every segment length in [1, max_length]
// and labels below num_labels. Throws ContractError naming the violation.
void CheckSegmentation(const Segmentation& s, std::size_t length,
                       std::size_t max_length, std::size_t num_labels);

}  // namespace segtag

#endif  // SEGTAG_SEGMENTATION_HPP_
