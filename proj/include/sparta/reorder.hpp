#pragma once

// Lexicographic mode reordering: relabels the indices of each mode so that
// nonzeros gather near the diagonal.

#include <vector>

#include "sparta/storage.hpp"

namespace sparta::reorder {

/// Cap on single-mode sorts. Random 300x300 matrices need up to ~10 before
/// a round leaves every mode unchanged; the early stop makes the cap cheap.
inline constexpr std::size_t kDefaultMaxIters = 64;

/// perm[old] = new
using Permutation = std::vector<index_t>;
using ModePermutations = std::vector<Permutation>;

ModePermutations identity(const std::vector<index_t>& shape);
bool is_identity(const Permutation& p);
bool is_identity(const ModePermutations& p);
bool is_bijection(const Permutation& p);
Permutation inverse(const Permutation& p);
ModePermutations inverse(const ModePermutations& p);

/// Iteration r sorts mode r % rank. Each slice of that mode is keyed by the
/// sorted row-major offsets of its nonzeros over the other modes; slices are
/// ordered so that keys with earlier offsets come first (on a shared prefix
/// the longer key first, empty slices last), ties keep their order. Stops
/// after a full round of modes leaves every mode unchanged.
ModePermutations lexi_order(const CooTensor& t, std::size_t max_iters = kDefaultMaxIters);

/// Maps every coordinate through its mode's permutation and re-sorts.
/// Throws RuntimeError on a length mismatch.
CooTensor apply_permutations(const CooTensor& t, const ModePermutations& p);

/// Mean over nonzeros of the mean over mode pairs of |i_a/n_a - i_b/n_b|.
/// Zero for an empty tensor; RuntimeError below rank 2.
double clustering_metric(const CooTensor& t);

}  // namespace sparta::reorder
