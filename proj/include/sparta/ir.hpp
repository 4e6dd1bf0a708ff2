#pragma once

// In-memory tensor-algebra IR: resolved index labels, tensor symbols with
// per-dimension attributes, and an ordered list of read/fill/product ops.

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sparta/dsl.hpp"
#include "sparta/storage.hpp"

namespace sparta::ir {

/// Operand slots of a TensorOp: two inputs, then the output.
inline constexpr std::size_t kIn0 = 0;
inline constexpr std::size_t kIn1 = 1;
inline constexpr std::size_t kOut = 2;
inline constexpr std::size_t kNumOperands = 3;

/// Iteration space of a label is [0, extent) with step 1.
struct IndexLabel {
  std::string name;
  std::optional<index_t> extent;  // nullopt until resolved from input data
};

struct TensorSymbol {
  std::string name;
  std::vector<std::string> labels;
  std::vector<FormatAttr> attrs;
  std::string format_name;  // preset name, or empty for an explicit list
};

struct IndexingMaps {
  std::vector<std::string> indices;                       // global index names
  std::vector<std::optional<index_t>> static_extents;     // per global index
  std::array<std::vector<std::size_t>, kNumOperands> dims;  // operand dim -> global index

  bool operator==(const IndexingMaps&) const = default;
};

struct TensorOp {
  dsl::ExprKind kind = dsl::ExprKind::Contraction;
  std::array<std::string, kNumOperands> operands;  // symbol names
  std::array<std::vector<FormatAttr>, kNumOperands> attrs;
  IndexingMaps maps;
};

struct ReadOp {
  std::string tensor;
  std::string path;
};

struct FillOp {
  std::string tensor;
  double value = 0.0;
};

using Op = std::variant<ReadOp, FillOp, TensorOp>;

struct TaModule {
  std::vector<IndexLabel> labels;
  std::vector<TensorSymbol> tensors;
  std::vector<Op> ops;

  const TensorSymbol& tensor(std::string_view name) const;
  const IndexLabel& label(std::string_view name) const;
};

/// Outputs of products must be dense; violations raise SemanticError.
TaModule lower_ast(const dsl::ProgramAst& ast);

/// Builds a TensorOp directly from label lists (used by kernels and tests).
TensorOp make_tensor_op(const std::array<std::string, kNumOperands>& names,
                        const std::array<std::vector<std::string>, kNumOperands>& labels,
                        const std::array<std::vector<FormatAttr>, kNumOperands>& attrs,
                        const std::vector<IndexLabel>& label_table);

/// Where the loop for an index gets its iteration space.
struct IndexSource {
  std::size_t operand = 0;
  std::size_t dim = 0;
};

struct IndexSchedule {
  std::vector<std::size_t> order;             // global indices in loop order
  std::vector<FormatAttr> attrs;              // per loop position
  std::vector<IndexSource> sources;           // per loop position
  std::optional<std::size_t> sparse_operand;  // at most one

  bool operator==(const IndexSchedule&) const = default;
};

/// Loop order is a precedence-preserving merge of every operand's dimension
/// order (output order breaks ties). An index takes D unless the sparse
/// operand holds it, in which case it takes that dimension's attribute.
IndexSchedule build_schedule(const TensorOp& op);

/// One op per line, attributes in braces.
std::string dump(const TaModule& module);

}  // namespace sparta::ir
