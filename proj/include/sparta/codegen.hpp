#pragma once

// Loop-nest synthesis: one loop level per scheduled index, with per-operand
// value-index updates, and a single accumulate statement at the bottom.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparta/ir.hpp"

namespace sparta::codegen {

using ir::kNumOperands;

enum class LevelKind {
  Dense,       // for c in 0..extent
  Compressed,  // for p in pos[m]..pos[m+1], c = crd[p]
  Singleton,   // c = crd[m]
};

/// How a level changes an operand's running value index.
enum class UpdateKind {
  Keep,      // operand does not hold the index, or holds it as S
  ScaleAdd,  // v = v * extent + coord
  SetPos,    // v = p
};

/// Upper bound of a dense loop: a literal, or pos[0] of a dense operand level.
struct ExtentSource {
  std::optional<index_t> literal;
  std::size_t operand = 0;
  std::size_t dim = 0;

  bool operator==(const ExtentSource&) const = default;
};

struct LoopLevel {
  LevelKind kind = LevelKind::Dense;
  std::size_t index = 0;  // global index id
  std::string var;        // coordinate variable
  std::string pos_var;    // position variable (Compressed only)
  ExtentSource extent;    // Dense only
  std::size_t operand = 0;  // sparse operand level read by Compressed/Singleton
  std::size_t dim = 0;
  std::array<UpdateKind, kNumOperands> updates{UpdateKind::Keep, UpdateKind::Keep, UpdateKind::Keep};

  bool operator==(const LoopLevel&) const = default;
};

/// Symbolic value index: 0, a position variable, or base * extent + coord.
struct VIdxExpr {
  enum class Kind { Zero, Pos, ScaleAdd };
  Kind kind = Kind::Zero;
  std::string var;
  std::string extent;
  std::shared_ptr<const VIdxExpr> base;

  static VIdxExpr zero() { return {}; }
  static VIdxExpr pos(std::string var);
  static VIdxExpr scale_add(VIdxExpr base, std::string extent, std::string coord);
};

std::string to_string(const VIdxExpr& e);

struct Compute {
  std::array<VIdxExpr, kNumOperands> vidx;
};

struct LoopNest {
  std::array<std::string, kNumOperands> operands;
  std::array<std::vector<FormatAttr>, kNumOperands> attrs;
  ir::IndexingMaps maps;
  std::vector<LoopLevel> levels;
  Compute compute;
};

LoopNest generate(const ir::IndexSchedule& schedule, const ir::TensorOp& op);

/// Pseudocode, two-space indentation per loop:
///   for i in 0..A.dim0.pos[0]
///     for p_j in A.dim1.pos[i]..A.dim1.pos[i+1]
///       bind j = A.dim1.crd[p_j]
///       ...
std::string render(const LoopNest& nest);

}  // namespace sparta::codegen
