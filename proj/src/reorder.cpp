#include "sparta/reorder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparta/error.hpp"

namespace sparta::reorder {

ModePermutations identity(const std::vector<index_t>& shape) {
  ModePermutations p;
  for (index_t n : shape) {
    Permutation m(n);
    std::iota(m.begin(), m.end(), index_t{0});
    p.push_back(std::move(m));
  }
  return p;
}

bool is_identity(const Permutation& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != i) return false;
  }
  return true;
}

bool is_identity(const ModePermutations& p) {
  return std::all_of(p.begin(), p.end(), [](const Permutation& m) { return is_identity(m); });
}

bool is_bijection(const Permutation& p) {
  std::vector<bool> seen(p.size(), false);
  for (index_t v : p) {
    if (v >= p.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation inverse(const Permutation& p) {
  Permutation inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = i;
  return inv;
}

ModePermutations inverse(const ModePermutations& p) {
  ModePermutations inv;
  for (const auto& m : p) inv.push_back(inverse(m));
  return inv;
}

CooTensor apply_permutations(const CooTensor& t, const ModePermutations& p) {
  const std::size_t rank = t.rank();
  if (p.size() != rank) {
    throw RuntimeError("expected " + std::to_string(rank) + " permutations, got " +
                       std::to_string(p.size()));
  }
  for (std::size_t m = 0; m < rank; ++m) {
    if (p[m].size() != t.shape()[m]) {
      throw RuntimeError("permutation for mode " + std::to_string(m) + " has length " +
                         std::to_string(p[m].size()) + ", extent is " +
                         std::to_string(t.shape()[m]));
    }
  }
  std::vector<index_t> coords(t.coords());
  for (std::size_t n = 0; n < t.nnz(); ++n) {
    for (std::size_t m = 0; m < rank; ++m) coords[n * rank + m] = p[m][coords[n * rank + m]];
  }
  return CooTensor::from_entries(t.shape(), std::move(coords), t.vals());
}

namespace {

// a sorts before b when its first differing offset is smaller, or when b is
// a proper prefix of a.
bool key_before(const std::vector<index_t>& a, const std::vector<index_t>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return a.size() > b.size();
}

Permutation sort_mode(const CooTensor& t, std::size_t mode) {
  const std::size_t rank = t.rank();
  const auto& shape = t.shape();
  std::vector<std::vector<index_t>> keys(shape[mode]);
  for (std::size_t n = 0; n < t.nnz(); ++n) {
    const auto c = t.coord(n);
    index_t offset = 0;
    for (std::size_t m = 0; m < rank; ++m) {
      if (m != mode) offset = offset * shape[m] + c[m];
    }
    keys[c[mode]].push_back(offset);
  }
  for (auto& k : keys) std::sort(k.begin(), k.end());

  std::vector<index_t> order(shape[mode]);
  std::iota(order.begin(), order.end(), index_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](index_t a, index_t b) { return key_before(keys[a], keys[b]); });
  return inverse(order);  // order[new] = old
}

}  // namespace

ModePermutations lexi_order(const CooTensor& t, std::size_t max_iters) {
  const std::size_t rank = t.rank();
  ModePermutations total = identity(t.shape());
  if (rank == 0 || t.nnz() == 0) return total;

  CooTensor current = t;
  std::size_t unchanged = 0;
  for (std::size_t r = 0; r < max_iters && unchanged < rank; ++r) {
    const std::size_t mode = r % rank;
    Permutation step = sort_mode(current, mode);
    if (is_identity(step)) {
      ++unchanged;
      continue;
    }
    unchanged = 0;
    for (auto& v : total[mode]) v = step[v];
    ModePermutations single = identity(current.shape());
    single[mode] = std::move(step);
    current = apply_permutations(current, single);
  }
  return total;
}

double clustering_metric(const CooTensor& t) {
  const std::size_t rank = t.rank();
  if (rank < 2) throw RuntimeError("clustering metric needs a tensor of rank 2 or more");
  if (t.nnz() == 0) return 0.0;
  const auto& shape = t.shape();
  const double pairs = static_cast<double>(rank * (rank - 1) / 2);
  double total = 0.0;
  for (std::size_t n = 0; n < t.nnz(); ++n) {
    const auto c = t.coord(n);
    double spread = 0.0;
    for (std::size_t a = 0; a < rank; ++a) {
      for (std::size_t b = a + 1; b < rank; ++b) {
        const double xa = static_cast<double>(c[a]) / static_cast<double>(shape[a]);
        const double xb = static_cast<double>(c[b]) / static_cast<double>(shape[b]);
        spread += std::abs(xa - xb);
      }
    }
    total += spread / pairs;
  }
  return total / static_cast<double>(t.nnz());
}

}  // namespace sparta::reorder
