#include "sparta/storage.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "sparta/error.hpp"

namespace sparta {

std::string_view to_string(FormatAttr attr) {
  switch (attr) {
    case FormatAttr::D: return "D";
    case FormatAttr::CU: return "CU";
    case FormatAttr::CN: return "CN";
    case FormatAttr::S: return "S";
  }
  return "?";
}

FormatAttr parse_attr(std::string_view text) {
  if (text == "D") return FormatAttr::D;
  if (text == "CU") return FormatAttr::CU;
  if (text == "CN") return FormatAttr::CN;
  if (text == "S") return FormatAttr::S;
  throw SemanticError("unknown storage attribute '" + std::string(text) + "'");
}

std::string format_attrs(std::span<const FormatAttr> attrs) {
  std::string out = "{";
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) out += ',';
    out += to_string(attrs[i]);
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// CooTensor

CooTensor::CooTensor(std::vector<index_t> shape) : shape_(std::move(shape)) {}

CooTensor CooTensor::from_entries(std::vector<index_t> shape, std::vector<index_t> coords,
                                  std::vector<double> vals) {
  const std::size_t rank = shape.size();
  if (rank == 0) throw RuntimeError("coordinate tensor must have rank >= 1");
  if (coords.size() != vals.size() * rank) {
    throw RuntimeError("coordinate array length does not match nnz x rank");
  }
  const std::size_t nnz = vals.size();
  for (std::size_t n = 0; n < nnz; ++n) {
    for (std::size_t m = 0; m < rank; ++m) {
      if (coords[n * rank + m] >= shape[m]) {
        throw RuntimeError("coordinate " + std::to_string(coords[n * rank + m]) +
                           " out of range for mode " + std::to_string(m) + " (extent " +
                           std::to_string(shape[m]) + ")");
      }
    }
  }

  std::vector<std::size_t> order(nnz);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row = [&](std::size_t n) { return coords.begin() + static_cast<std::ptrdiff_t>(n * rank); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(rank), row(b),
                                        row(b) + static_cast<std::ptrdiff_t>(rank));
  });

  CooTensor out(std::move(shape));
  out.coords_.reserve(coords.size());
  out.vals_.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    const std::size_t n = order[k];
    const std::size_t kept = out.vals_.size();
    if (kept > 0 &&
        std::equal(row(n), row(n) + static_cast<std::ptrdiff_t>(rank),
                   out.coords_.begin() + static_cast<std::ptrdiff_t>((kept - 1) * rank))) {
      out.vals_.back() += vals[n];
      continue;
    }
    out.coords_.insert(out.coords_.end(), row(n), row(n) + static_cast<std::ptrdiff_t>(rank));
    out.vals_.push_back(vals[n]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SpTensor

SpTensor::SpTensor(std::vector<index_t> shape, std::vector<DimStorage> dims,
                   std::vector<double> vals)
    : shape_(std::move(shape)), dims_(std::move(dims)), vals_(std::move(vals)) {}

SpTensor SpTensor::dense(std::vector<index_t> shape, std::vector<double> vals) {
  std::vector<DimStorage> dims;
  dims.reserve(shape.size());
  for (index_t extent : shape) dims.push_back({FormatAttr::D, {extent}, {}});
  return SpTensor(std::move(shape), std::move(dims), std::move(vals));
}

std::vector<FormatAttr> SpTensor::attrs() const {
  std::vector<FormatAttr> out;
  out.reserve(dims_.size());
  for (const auto& d : dims_) out.push_back(d.attr);
  return out;
}

bool SpTensor::is_dense() const {
  return std::all_of(dims_.begin(), dims_.end(),
                     [](const DimStorage& d) { return d.attr == FormatAttr::D; });
}

// ---------------------------------------------------------------------------
// Presets and chains

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

bool is_preset_name(std::string_view format_name) {
  const std::string n = lower(format_name);
  return n == "dense" || n == "coo" || n == "csr" || n == "dcsr" || n == "csf" ||
         n == "modegeneric";
}

std::vector<FormatAttr> preset_attrs(std::string_view format_name, std::size_t rank) {
  using enum FormatAttr;
  const std::string n = lower(format_name);
  if (!is_preset_name(n)) {
    throw SemanticError("unknown format '" + std::string(format_name) + "'");
  }
  if (rank == 0) throw SemanticError("format '" + std::string(format_name) + "' needs rank >= 1");
  auto rank_error = [&](const char* need) {
    return SemanticError("format '" + std::string(format_name) + "' requires " + need +
                         ", got rank " + std::to_string(rank));
  };

  if (n == "dense") return std::vector<FormatAttr>(rank, D);
  if (n == "coo") {
    std::vector<FormatAttr> a(rank, S);
    a[0] = CN;
    return a;
  }
  if (n == "csr") {
    if (rank != 2) throw rank_error("rank 2");
    return {D, CU};
  }
  if (n == "dcsr") {
    if (rank != 2) throw rank_error("rank 2");
    return {CU, CU};
  }
  if (n == "csf") return std::vector<FormatAttr>(rank, CU);
  // modegeneric: COO block coordinates plus one trailing dense mode
  if (rank < 2) throw rank_error("rank >= 2");
  std::vector<FormatAttr> a(rank, S);
  a.front() = CN;
  a.back() = D;
  return a;
}

void check_attr_chain(std::span<const FormatAttr> attrs, std::size_t rank) {
  if (attrs.size() != rank) {
    throw SemanticError("attribute list " + format_attrs(attrs) + " has " +
                        std::to_string(attrs.size()) + " entries for a rank-" +
                        std::to_string(rank) + " tensor");
  }
  for (std::size_t l = 0; l < attrs.size(); ++l) {
    const FormatAttr a = attrs[l];
    if (a == FormatAttr::S && (l == 0 || attrs[l - 1] == FormatAttr::D)) {
      throw SemanticError("illegal attribute chain " + format_attrs(attrs) + ": S at level " +
                          std::to_string(l) + " must follow a CN, CU or S level");
    }
    if (a == FormatAttr::CN && l != 0) {
      throw SemanticError("illegal attribute chain " + format_attrs(attrs) +
                          ": CN is only supported as the first level");
    }
  }
}

// ---------------------------------------------------------------------------
// compress

namespace {

struct Range {
  std::size_t lo;
  std::size_t hi;
};

// End (exclusive) of the singleton run that follows level `l`.
std::size_t singleton_run_end(std::span<const FormatAttr> attrs, std::size_t l) {
  std::size_t end = l + 1;
  while (end < attrs.size() && attrs[end] == FormatAttr::S) ++end;
  return end;
}

}  // namespace

SpTensor compress(const CooTensor& coo, std::span<const FormatAttr> attrs) {
  const std::size_t rank = coo.rank();
  check_attr_chain(attrs, rank);
  const auto& shape = coo.shape();

  std::vector<DimStorage> dims;
  dims.reserve(rank);
  std::vector<Range> cur{{0, coo.nnz()}};

  for (std::size_t l = 0; l < rank; ++l) {
    DimStorage ds{attrs[l], {}, {}};
    std::vector<Range> next;
    switch (attrs[l]) {
      case FormatAttr::D: {
        const index_t n = shape[l];
        ds.pos = {n};
        next.reserve(cur.size() * n);
        for (const Range& r : cur) {
          std::size_t q = r.lo;
          for (index_t c = 0; c < n; ++c) {
            std::size_t e = q;
            while (e < r.hi && coo.coord(e)[l] == c) ++e;
            next.push_back({q, e});
            q = e;
          }
        }
        break;
      }
      case FormatAttr::CU:
      case FormatAttr::CN: {
        // Entries are grouped by their coordinates over this level and the
        // singleton levels stored directly beneath it.
        const std::size_t run_end = singleton_run_end(attrs, l);
        auto same_group = [&](std::size_t a, std::size_t b) {
          const auto ca = coo.coord(a);
          const auto cb = coo.coord(b);
          return std::equal(ca.begin() + static_cast<std::ptrdiff_t>(l),
                            ca.begin() + static_cast<std::ptrdiff_t>(run_end),
                            cb.begin() + static_cast<std::ptrdiff_t>(l));
        };
        ds.pos.push_back(0);
        for (const Range& r : cur) {
          const std::size_t segment_begin = ds.crd.size();
          std::size_t q = r.lo;
          while (q < r.hi) {
            std::size_t e = q + 1;
            while (e < r.hi && same_group(e, q)) ++e;
            const index_t c = coo.coord(q)[l];
            if (attrs[l] == FormatAttr::CU && ds.crd.size() > segment_begin && ds.crd.back() == c) {
              throw RuntimeError("level " + std::to_string(l) +
                                 " is CU but coordinate " + std::to_string(c) +
                                 " has several singleton children; use CN");
            }
            ds.crd.push_back(c);
            next.push_back({q, e});
            q = e;
          }
          if (attrs[l] == FormatAttr::CU) ds.pos.push_back(ds.crd.size());
        }
        if (attrs[l] == FormatAttr::CN) ds.pos.push_back(ds.crd.size());
        break;
      }
      case FormatAttr::S: {
        next.reserve(cur.size());
        for (const Range& r : cur) {
          ds.crd.push_back(coo.coord(r.lo)[l]);
          next.push_back(r);
        }
        break;
      }
    }
    dims.push_back(std::move(ds));
    cur = std::move(next);
  }

  std::vector<double> vals;
  vals.reserve(cur.size());
  for (const Range& r : cur) vals.push_back(r.hi > r.lo ? coo.vals()[r.lo] : 0.0);
  return SpTensor(shape, std::move(dims), std::move(vals));
}

// ---------------------------------------------------------------------------
// validate

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Rank: return "rank";
    case ViolationKind::Chain: return "chain";
    case ViolationKind::DensePos: return "dense-pos";
    case ViolationKind::PosStart: return "pos-start";
    case ViolationKind::PosLength: return "pos-length";
    case ViolationKind::NonDecreasing: return "non-decreasing";
    case ViolationKind::CrdLength: return "crd-length";
    case ViolationKind::Uniqueness: return "uniqueness";
    case ViolationKind::CrdRange: return "crd-range";
    case ViolationKind::RunOrder: return "run-order";
    case ViolationKind::SingletonPos: return "singleton-pos";
    case ViolationKind::ValsLength: return "vals-length";
  }
  return "?";
}

std::vector<Violation> validate(const SpTensor& sp) {
  std::vector<Violation> out;
  auto report = [&](std::size_t level, ViolationKind kind, std::size_t index, std::string msg) {
    out.push_back({level, kind, index,
                   "level " + std::to_string(level) + ": " + std::string(to_string(kind)) +
                       " violation at index " + std::to_string(index) + ": " + std::move(msg)});
  };

  const std::size_t rank = sp.rank();
  if (rank == 0 || sp.dims().size() != rank) {
    report(0, ViolationKind::Rank, 0, "dims length must equal rank >= 1");
    return out;
  }
  const auto attrs = sp.attrs();
  for (std::size_t l = 0; l < rank; ++l) {
    const FormatAttr a = attrs[l];
    if (a == FormatAttr::S && (l == 0 || attrs[l - 1] == FormatAttr::D)) {
      report(l, ViolationKind::Chain, l, "S must follow a CN, CU or S level");
    } else if (a == FormatAttr::CN && l != 0) {
      report(l, ViolationKind::Chain, l, "CN is only supported as the first level");
    }
  }
  if (!out.empty()) return out;

  std::size_t count = 1;  // positions at the parent level
  for (std::size_t l = 0; l < rank; ++l) {
    const DimStorage& ds = sp.dims()[l];
    const index_t extent = sp.shape()[l];
    auto check_range = [&] {
      for (std::size_t k = 0; k < ds.crd.size(); ++k) {
        if (ds.crd[k] >= extent) {
          report(l, ViolationKind::CrdRange, k,
                 "crd " + std::to_string(ds.crd[k]) + " >= extent " + std::to_string(extent));
        }
      }
    };

    switch (ds.attr) {
      case FormatAttr::D:
        if (ds.pos.size() != 1) {
          report(l, ViolationKind::DensePos, 0, "dense level needs exactly one pos entry");
          return out;
        }
        if (ds.pos[0] != extent) {
          report(l, ViolationKind::DensePos, 0,
                 "pos[0]=" + std::to_string(ds.pos[0]) + " differs from extent " +
                     std::to_string(extent));
          return out;
        }
        if (!ds.crd.empty()) report(l, ViolationKind::CrdLength, 0, "dense level has crd entries");
        count *= extent;
        break;

      case FormatAttr::CU: {
        if (ds.pos.size() != count + 1) {
          report(l, ViolationKind::PosLength, ds.pos.size(),
                 "expected " + std::to_string(count + 1) + " pos entries");
          return out;
        }
        if (ds.pos[0] != 0) report(l, ViolationKind::PosStart, 0, "pos[0] must be 0");
        bool monotone = true;
        for (std::size_t m = 1; m < ds.pos.size(); ++m) {
          if (ds.pos[m] < ds.pos[m - 1]) {
            report(l, ViolationKind::NonDecreasing, m, "pos decreases");
            monotone = false;
          }
        }
        if (!monotone || ds.pos[0] != 0) return out;
        if (ds.crd.size() != ds.pos.back()) {
          report(l, ViolationKind::CrdLength, ds.crd.size(),
                 "crd length differs from pos[last]=" + std::to_string(ds.pos.back()));
          return out;
        }
        check_range();
        for (std::size_t m = 0; m + 1 < ds.pos.size(); ++m) {
          for (index_t k = ds.pos[m] + 1; k < ds.pos[m + 1]; ++k) {
            if (ds.crd[k] <= ds.crd[k - 1]) {
              report(l, ViolationKind::Uniqueness, k, "crd not strictly increasing in segment");
            }
          }
        }
        count = ds.pos.back();
        break;
      }

      case FormatAttr::CN: {
        if (ds.pos.size() != 2) {
          report(l, ViolationKind::PosLength, ds.pos.size(), "CN level needs pos=[0,L]");
          return out;
        }
        if (ds.pos[0] != 0) {
          report(l, ViolationKind::PosStart, 0, "pos[0] must be 0");
          return out;
        }
        if (ds.crd.size() != ds.pos[1]) {
          report(l, ViolationKind::CrdLength, ds.crd.size(),
                 "crd length differs from pos[1]=" + std::to_string(ds.pos[1]));
          return out;
        }
        check_range();
        for (std::size_t k = 1; k < ds.crd.size(); ++k) {
          if (ds.crd[k] < ds.crd[k - 1]) report(l, ViolationKind::NonDecreasing, k, "crd decreases");
        }
        count = ds.pos[1];
        break;
      }

      case FormatAttr::S:
        if (!ds.pos.empty()) report(l, ViolationKind::SingletonPos, 0, "singleton level has pos");
        if (ds.crd.size() != count) {
          report(l, ViolationKind::CrdLength, ds.crd.size(),
                 "expected " + std::to_string(count) + " crd entries");
          return out;
        }
        check_range();
        break;
    }
  }
  if (!out.empty()) return out;

  // Coordinate tuples of a compressed level and its singleton run must be
  // strictly increasing, otherwise entries repeat or come out of order.
  for (std::size_t l = 0; l < rank; ++l) {
    if (attrs[l] != FormatAttr::CN && attrs[l] != FormatAttr::CU) continue;
    const std::size_t run_end = singleton_run_end(attrs, l);
    if (attrs[l] == FormatAttr::CU && run_end == l + 1) continue;  // covered by uniqueness
    const auto& ds = sp.dims()[l];
    std::vector<std::size_t> segment_start;
    if (attrs[l] == FormatAttr::CU) {
      segment_start.assign(ds.pos.begin(), ds.pos.end());
    } else {
      segment_start = {0, ds.crd.size()};
    }
    for (std::size_t m = 0; m + 1 < segment_start.size(); ++m) {
      for (std::size_t p = segment_start[m] + 1; p < segment_start[m + 1]; ++p) {
        bool increasing = false;
        bool decided = false;
        for (std::size_t k = l; k < run_end && !decided; ++k) {
          const index_t a = sp.dims()[k].crd[p - 1];
          const index_t b = sp.dims()[k].crd[p];
          if (a != b) {
            increasing = a < b;
            decided = true;
          }
        }
        if (!increasing) {
          report(l, ViolationKind::RunOrder, p, "coordinate tuples repeat or decrease");
        }
      }
    }
  }

  if (sp.vals().size() != count) {
    report(rank - 1, ViolationKind::ValsLength, sp.vals().size(),
           "expected " + std::to_string(count) + " values");
  }
  return out;
}

std::vector<std::size_t> level_position_counts(const SpTensor& sp) {
  std::vector<std::size_t> counts{1};
  for (std::size_t l = 0; l < sp.rank(); ++l) {
    const auto& ds = sp.dims()[l];
    switch (ds.attr) {
      case FormatAttr::D: counts.push_back(counts.back() * ds.pos.at(0)); break;
      case FormatAttr::CU:
      case FormatAttr::CN: counts.push_back(ds.pos.empty() ? 0 : ds.pos.back()); break;
      case FormatAttr::S: counts.push_back(counts.back()); break;
    }
  }
  return counts;
}

// ---------------------------------------------------------------------------
// decompress

namespace {

struct Walker {
  const SpTensor& sp;
  bool drop_zeros;
  std::vector<index_t> coord;
  std::vector<index_t> coords;
  std::vector<double> vals;

  void walk(std::size_t l, index_t parent) {
    if (l == sp.rank()) {
      const double v = sp.vals()[parent];
      if (drop_zeros && v == 0.0) return;
      coords.insert(coords.end(), coord.begin(), coord.end());
      vals.push_back(v);
      return;
    }
    const DimStorage& ds = sp.dims()[l];
    switch (ds.attr) {
      case FormatAttr::D: {
        const index_t n = ds.pos[0];
        for (index_t c = 0; c < n; ++c) {
          coord[l] = c;
          walk(l + 1, parent * n + c);
        }
        break;
      }
      case FormatAttr::CU:
      case FormatAttr::CN:
        for (index_t p = ds.pos[parent]; p < ds.pos[parent + 1]; ++p) {
          coord[l] = ds.crd[p];
          walk(l + 1, p);
        }
        break;
      case FormatAttr::S:
        coord[l] = ds.crd[parent];
        walk(l + 1, parent);
        break;
    }
  }
};

}  // namespace

CooTensor decompress(const SpTensor& sp) {
  const auto violations = validate(sp);
  if (!violations.empty()) throw RuntimeError("malformed tensor: " + violations.front().message);

  Walker w{sp, sp.dims().back().attr == FormatAttr::D, std::vector<index_t>(sp.rank()), {}, {}};
  w.walk(0, 0);
  return CooTensor::from_entries(sp.shape(), std::move(w.coords), std::move(w.vals));
}

}  // namespace sparta
