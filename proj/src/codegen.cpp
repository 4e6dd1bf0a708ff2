#include "sparta/codegen.hpp"

#include <algorithm>
#include <sstream>

#include "sparta/error.hpp"

namespace sparta::codegen {

VIdxExpr VIdxExpr::pos(std::string var) {
  VIdxExpr e;
  e.kind = Kind::Pos;
  e.var = std::move(var);
  return e;
}

VIdxExpr VIdxExpr::scale_add(VIdxExpr base, std::string extent, std::string coord) {
  VIdxExpr e;
  e.kind = Kind::ScaleAdd;
  e.var = std::move(coord);
  e.extent = std::move(extent);
  e.base = std::make_shared<const VIdxExpr>(std::move(base));
  return e;
}

std::string to_string(const VIdxExpr& e) {
  switch (e.kind) {
    case VIdxExpr::Kind::Zero:
      return "0";
    case VIdxExpr::Kind::Pos:
      return e.var;
    case VIdxExpr::Kind::ScaleAdd:
      break;
  }
  const VIdxExpr& base = *e.base;
  if (base.kind == VIdxExpr::Kind::Zero) return e.var;
  std::string b = to_string(base);
  if (base.kind == VIdxExpr::Kind::ScaleAdd && base.base->kind != VIdxExpr::Kind::Zero) {
    b = "(" + b + ")";
  }
  return b + "*" + e.extent + "+" + e.var;
}

namespace {

std::optional<std::size_t> dim_of(const ir::IndexingMaps& maps, std::size_t operand, std::size_t g) {
  const auto& dims = maps.dims[operand];
  const auto it = std::find(dims.begin(), dims.end(), g);
  if (it == dims.end()) return std::nullopt;
  return static_cast<std::size_t>(it - dims.begin());
}

std::string level_name(const LoopNest& nest, std::size_t operand, std::size_t dim) {
  return nest.operands[operand] + ".dim" + std::to_string(dim);
}

std::string extent_text(const LoopNest& nest, std::size_t operand, std::size_t dim) {
  const std::size_t g = nest.maps.dims[operand][dim];
  if (const auto& lit = nest.maps.static_extents[g]) return std::to_string(*lit);
  return level_name(nest, operand, dim) + ".pos[0]";
}

/// Walks the levels, calling visit(level, exprs-before-level) for each, and
/// returns the expressions after the last level.
template <typename Visit>
std::array<VIdxExpr, kNumOperands> walk(const LoopNest& nest, Visit&& visit) {
  std::array<VIdxExpr, kNumOperands> exprs;
  for (const auto& level : nest.levels) {
    visit(level, exprs);
    for (std::size_t o = 0; o < kNumOperands; ++o) {
      switch (level.updates[o]) {
        case UpdateKind::Keep:
          break;
        case UpdateKind::SetPos:
          exprs[o] = VIdxExpr::pos(level.pos_var);
          break;
        case UpdateKind::ScaleAdd: {
          const std::size_t d = *dim_of(nest.maps, o, level.index);
          exprs[o] = VIdxExpr::scale_add(exprs[o], extent_text(nest, o, d), level.var);
          break;
        }
      }
    }
  }
  return exprs;
}

std::string plus_one(const VIdxExpr& e) {
  if (e.kind == VIdxExpr::Kind::Zero) return "1";
  const std::string s = to_string(e);
  if (s.find_first_of("*+") == std::string::npos) return s + "+1";
  return "(" + s + ")+1";
}

}  // namespace

LoopNest generate(const ir::IndexSchedule& schedule, const ir::TensorOp& op) {
  const auto& maps = op.maps;
  const std::size_t n = maps.indices.size();
  if (schedule.order.size() != n || schedule.attrs.size() != n || schedule.sources.size() != n) {
    throw SemanticError("schedule does not cover every index of the operation");
  }
  if (schedule.sparse_operand) {
    const auto& attrs = op.attrs[*schedule.sparse_operand];
    check_attr_chain(attrs, attrs.size());
  }

  LoopNest nest;
  nest.operands = op.operands;
  nest.attrs = op.attrs;
  nest.maps = maps;

  std::array<std::size_t, kNumOperands> visited{};  // dims of each operand already looped
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t g = schedule.order[t];
    const FormatAttr attr = schedule.attrs[t];
    const ir::IndexSource src = schedule.sources[t];

    LoopLevel level;
    level.index = g;
    level.var = maps.indices[g];
    level.operand = src.operand;
    level.dim = src.dim;
    switch (attr) {
      case FormatAttr::D:
        level.kind = LevelKind::Dense;
        if (maps.static_extents[g]) {
          level.extent.literal = maps.static_extents[g];
        } else {
          level.extent.operand = src.operand;
          level.extent.dim = src.dim;
        }
        break;
      case FormatAttr::CU:
      case FormatAttr::CN:
        level.kind = LevelKind::Compressed;
        level.pos_var = "p_" + level.var;
        break;
      case FormatAttr::S:
        level.kind = LevelKind::Singleton;
        break;
    }
    if (attr != FormatAttr::D) {
      if (!schedule.sparse_operand || src.operand != *schedule.sparse_operand ||
          op.attrs[src.operand].at(src.dim) != attr) {
        throw SemanticError("index '" + level.var + "' has attribute " +
                            std::string(to_string(attr)) + " but no matching sparse level");
      }
      if (visited[src.operand] != src.dim) {
        throw SemanticError("level " + std::to_string(src.dim) + " of '" +
                            op.operands[src.operand] + "' has no enclosing parent loop");
      }
    }

    for (std::size_t o = 0; o < kNumOperands; ++o) {
      const auto d = dim_of(maps, o, g);
      if (!d) continue;
      if (*d != visited[o]) {
        throw SemanticError("loop order visits '" + op.operands[o] + "' out of storage order");
      }
      ++visited[o];
      switch (op.attrs[o][*d]) {
        case FormatAttr::D:
          level.updates[o] = UpdateKind::ScaleAdd;
          break;
        case FormatAttr::CU:
        case FormatAttr::CN:
          level.updates[o] = UpdateKind::SetPos;
          break;
        case FormatAttr::S:
          level.updates[o] = UpdateKind::Keep;
          break;
      }
    }
    nest.levels.push_back(std::move(level));
  }

  nest.compute.vidx = walk(nest, [](const LoopLevel&, const auto&) {});
  return nest;
}

std::string render(const LoopNest& nest) {
  std::ostringstream out;
  std::size_t depth = 0;
  auto line = [&](const std::string& text) { out << std::string(2 * depth, ' ') << text << '\n'; };
  const auto exprs = walk(nest, [&](const LoopLevel& level, const std::array<VIdxExpr, kNumOperands>& before) {
    const std::string lvl = level_name(nest, level.operand, level.dim);
    switch (level.kind) {
      case LevelKind::Dense: {
        const std::string hi = level.extent.literal
                                   ? std::to_string(*level.extent.literal)
                                   : level_name(nest, level.extent.operand, level.extent.dim) + ".pos[0]";
        line("for " + level.var + " in 0.." + hi);
        ++depth;
        break;
      }
      case LevelKind::Compressed: {
        const VIdxExpr& parent = before[level.operand];
        line("for " + level.pos_var + " in " + lvl + ".pos[" + to_string(parent) + "].." + lvl +
             ".pos[" + plus_one(parent) + "]");
        ++depth;
        line("bind " + level.var + " = " + lvl + ".crd[" + level.pos_var + "]");
        break;
      }
      case LevelKind::Singleton:
        line("bind " + level.var + " = " + lvl + ".crd[" + to_string(before[level.operand]) + "]");
        break;
    }
  });
  line(nest.operands[ir::kOut] + "[" + to_string(exprs[ir::kOut]) + "] += " + nest.operands[ir::kIn0] +
       "[" + to_string(exprs[ir::kIn0]) + "] * " + nest.operands[ir::kIn1] + "[" +
       to_string(exprs[ir::kIn1]) + "]");
  return out.str();
}

}  // namespace sparta::codegen
