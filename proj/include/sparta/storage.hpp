#pragma once

// Per-dimension sparse storage: the four level attributes, pos/crd arrays,
// composite-format presets, and conversion to and from coordinate lists.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sparta {

using index_t = std::uint64_t;

enum class FormatAttr : std::uint8_t {
  D,   // dense: pos = [extent], no crd
  CU,  // compressed, unique coordinates per segment
  CN,  // compressed, non-unique: pos = [0, L], one crd per stored entry
  S,   // singleton: one crd per parent position, no pos
};

std::string_view to_string(FormatAttr attr);
/// Accepts "D", "CU", "CN", "S"; throws SemanticError otherwise.
FormatAttr parse_attr(std::string_view text);
std::string format_attrs(std::span<const FormatAttr> attrs);  // "{D,CU}"

inline bool is_sparse(FormatAttr a) { return a != FormatAttr::D; }

struct DimStorage {
  FormatAttr attr = FormatAttr::D;
  std::vector<index_t> pos;
  std::vector<index_t> crd;

  bool operator==(const DimStorage&) const = default;
};

/// Canonical coordinate list: rows sorted lexicographically, no duplicates,
/// every coordinate below its extent.
class CooTensor {
 public:
  CooTensor() = default;
  /// Empty tensor of the given shape.
  explicit CooTensor(std::vector<index_t> shape);

  /// Canonicalizes arbitrary entries: bounds check (RuntimeError), sort,
  /// and sum of duplicate coordinates. `coords` is row-major, nnz x rank.
  static CooTensor from_entries(std::vector<index_t> shape, std::vector<index_t> coords,
                                std::vector<double> vals);

  std::size_t rank() const { return shape_.size(); }
  std::size_t nnz() const { return vals_.size(); }
  const std::vector<index_t>& shape() const { return shape_; }
  const std::vector<index_t>& coords() const { return coords_; }
  const std::vector<double>& vals() const { return vals_; }
  std::span<const index_t> coord(std::size_t n) const {
    return {coords_.data() + n * rank(), rank()};
  }

  bool operator==(const CooTensor&) const = default;

 private:
  std::vector<index_t> shape_;
  std::vector<index_t> coords_;
  std::vector<double> vals_;
};

/// Level-structured tensor: dims ordered outermost to innermost plus values.
/// Construction does not validate; use validate() or decompress().
class SpTensor {
 public:
  SpTensor() = default;
  SpTensor(std::vector<index_t> shape, std::vector<DimStorage> dims, std::vector<double> vals);

  /// All-D tensor over row-major values.
  static SpTensor dense(std::vector<index_t> shape, std::vector<double> vals);

  std::size_t rank() const { return shape_.size(); }
  const std::vector<index_t>& shape() const { return shape_; }
  const std::vector<DimStorage>& dims() const { return dims_; }
  const DimStorage& dim(std::size_t level) const { return dims_.at(level); }
  const std::vector<double>& vals() const { return vals_; }
  std::vector<FormatAttr> attrs() const;
  bool is_dense() const;

  bool operator==(const SpTensor&) const = default;

 private:
  std::vector<index_t> shape_;
  std::vector<DimStorage> dims_;
  std::vector<double> vals_;
};

/// Named composite formats: Dense, COO, CSR, DCSR, CSF, ModeGeneric
/// (case-insensitive).
std::vector<FormatAttr> preset_attrs(std::string_view format_name, std::size_t rank);
bool is_preset_name(std::string_view format_name);

/// Throws SemanticError when `attrs` is not a legal level chain for `rank`.
void check_attr_chain(std::span<const FormatAttr> attrs, std::size_t rank);

SpTensor compress(const CooTensor& coo, std::span<const FormatAttr> attrs);
CooTensor decompress(const SpTensor& sp);

enum class ViolationKind {
  Rank,
  Chain,
  DensePos,
  PosStart,
  PosLength,
  NonDecreasing,
  CrdLength,
  Uniqueness,
  CrdRange,
  RunOrder,
  SingletonPos,
  ValsLength,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  std::size_t level = 0;
  ViolationKind kind = ViolationKind::Rank;
  std::size_t index = 0;
  std::string message;
};

/// Empty iff every level and tensor invariant holds.
std::vector<Violation> validate(const SpTensor& sp);

/// Number of logical positions at each level (entry 0 is the root, 1).
/// Assumes a structurally valid tensor.
std::vector<std::size_t> level_position_counts(const SpTensor& sp);

}  // namespace sparta
