#include "sparta/ir.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "sparta/ingest.hpp"

namespace sparta::ir {

const TensorSymbol& TaModule::tensor(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw SemanticError("unknown tensor '" + std::string(name) + "'");
}

const IndexLabel& TaModule::label(std::string_view name) const {
  for (const auto& l : labels) {
    if (l.name == name) return l;
  }
  throw SemanticError("unknown index label '" + std::string(name) + "'");
}

TensorOp make_tensor_op(const std::array<std::string, kNumOperands>& names,
                        const std::array<std::vector<std::string>, kNumOperands>& labels,
                        const std::array<std::vector<FormatAttr>, kNumOperands>& attrs,
                        const std::vector<IndexLabel>& label_table) {
  TensorOp op;
  op.kind = dsl::classify_expr(labels[kOut], labels[kIn0], labels[kIn1]);
  op.operands = names;
  op.attrs = attrs;
  for (std::size_t o = 0; o < kNumOperands; ++o) {
    if (attrs[o].size() != labels[o].size()) {
      throw SemanticError("operand '" + names[o] + "' has " + std::to_string(labels[o].size()) +
                          " labels but " + std::to_string(attrs[o].size()) + " attributes");
    }
    for (const auto& l : labels[o]) {
      auto it = std::find(op.maps.indices.begin(), op.maps.indices.end(), l);
      if (it == op.maps.indices.end()) {
        op.maps.indices.push_back(l);
        std::optional<index_t> extent;
        for (const auto& decl : label_table) {
          if (decl.name == l) extent = decl.extent;
        }
        op.maps.static_extents.push_back(extent);
        it = op.maps.indices.end() - 1;
      }
      op.maps.dims[o].push_back(static_cast<std::size_t>(it - op.maps.indices.begin()));
    }
  }
  return op;
}

TaModule lower_ast(const dsl::ProgramAst& ast) {
  TaModule m;
  for (const auto& l : ast.labels) m.labels.push_back({l.name, l.extent});
  for (const auto& t : ast.tensors) {
    const auto* preset = std::get_if<std::string>(&t.format);
    m.tensors.push_back({t.name, t.labels, dsl::resolve_format(t), preset ? *preset : ""});
  }
  for (const auto& s : ast.stmts) {
    if (const auto* r = std::get_if<dsl::ReadFill>(&s)) {
      m.ops.emplace_back(ReadOp{r->target.tensor, r->filename});
    } else if (const auto* f = std::get_if<dsl::ConstFill>(&s)) {
      m.ops.emplace_back(FillOp{f->target.tensor, f->value});
    } else {
      const auto& a = std::get<dsl::Assign>(s);
      const auto& out = m.tensor(a.lhs.tensor);
      if (!std::all_of(out.attrs.begin(), out.attrs.end(),
                       [](FormatAttr x) { return x == FormatAttr::D; })) {
        throw SemanticError("output tensor '" + out.name +
                            "' must be dense; sparse outputs are not supported");
      }
      m.ops.emplace_back(make_tensor_op(
          {a.rhs0.tensor, a.rhs1.tensor, a.lhs.tensor}, {a.rhs0.labels, a.rhs1.labels, a.lhs.labels},
          {m.tensor(a.rhs0.tensor).attrs, m.tensor(a.rhs1.tensor).attrs, out.attrs}, m.labels));
    }
  }
  return m;
}

IndexSchedule build_schedule(const TensorOp& op) {
  const auto& maps = op.maps;
  const std::size_t n = maps.indices.size();
  IndexSchedule sched;

  for (std::size_t o : {kIn0, kIn1}) {
    if (std::any_of(op.attrs[o].begin(), op.attrs[o].end(), is_sparse)) {
      if (sched.sparse_operand) {
        throw SemanticError("operands '" + op.operands[kIn0] + "' and '" + op.operands[kIn1] +
                            "' are both sparse; sparse x sparse products are not supported");
      }
      sched.sparse_operand = o;
    }
  }
  if (std::any_of(op.attrs[kOut].begin(), op.attrs[kOut].end(), is_sparse)) {
    throw SemanticError("output '" + op.operands[kOut] + "' must be dense");
  }
  if (sched.sparse_operand) check_attr_chain(op.attrs[*sched.sparse_operand], op.attrs[*sched.sparse_operand].size());

  // Precedence graph: each operand's dimensions in declaration order.
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t o = 0; o < kNumOperands; ++o) {
    const auto& dims = maps.dims[o];
    for (std::size_t d = 0; d + 1 < dims.size(); ++d) {
      const std::size_t a = dims[d], b = dims[d + 1];
      if (std::find(succ[a].begin(), succ[a].end(), b) == succ[a].end()) {
        succ[a].push_back(b);
        ++indegree[b];
      }
    }
  }
  auto priority = [&](std::size_t g) {
    const auto& out = maps.dims[kOut];
    const auto it = std::find(out.begin(), out.end(), g);
    const std::size_t out_pos = it == out.end() ? std::numeric_limits<std::size_t>::max()
                                                : static_cast<std::size_t>(it - out.begin());
    return std::pair{out_pos, g};
  };
  std::vector<std::size_t> ready;
  for (std::size_t g = 0; g < n; ++g) {
    if (indegree[g] == 0) ready.push_back(g);
  }
  while (!ready.empty()) {
    auto best = std::min_element(ready.begin(), ready.end(),
                                 [&](std::size_t a, std::size_t b) { return priority(a) < priority(b); });
    const std::size_t g = *best;
    ready.erase(best);
    sched.order.push_back(g);
    for (std::size_t s : succ[g]) {
      if (--indegree[s] == 0) ready.push_back(s);
    }
  }
  if (sched.order.size() != n) {
    throw SemanticError("operand index orders conflict (a transposed access); no loop order "
                        "visits every operand's dimensions in storage order");
  }

  for (std::size_t g : sched.order) {
    auto find_dim = [&](std::size_t o) -> std::optional<std::size_t> {
      const auto& dims = maps.dims[o];
      const auto it = std::find(dims.begin(), dims.end(), g);
      if (it == dims.end()) return std::nullopt;
      return static_cast<std::size_t>(it - dims.begin());
    };
    if (sched.sparse_operand) {
      if (auto d = find_dim(*sched.sparse_operand)) {
        sched.attrs.push_back(op.attrs[*sched.sparse_operand][*d]);
        sched.sources.push_back({*sched.sparse_operand, *d});
        continue;
      }
    }
    sched.attrs.push_back(FormatAttr::D);
    for (std::size_t o : {kIn0, kIn1, kOut}) {
      if (auto d = find_dim(o)) {
        sched.sources.push_back({o, *d});
        break;
      }
    }
  }
  return sched;
}

// ---------------------------------------------------------------------------

namespace {

std::string label_list(const std::vector<std::string>& labels, const char* prefix) {
  std::string out = "[";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += prefix + labels[i];
  }
  return out + "]";
}

}  // namespace

std::string dump(const TaModule& module) {
  std::ostringstream out;
  for (const auto& l : module.labels) {
    if (l.extent) {
      out << "ta.index_label_static %" << l.name << " (0, " << *l.extent << ", 1)\n";
    } else {
      out << "ta.index_label_dynamic %" << l.name << " (0, ?, 1)\n";
    }
  }
  for (const auto& t : module.tensors) {
    out << "ta.tensor_decl %" << t.name << ' ' << label_list(t.labels, "%") << ' '
        << format_attrs(t.attrs);
    if (!t.format_name.empty()) out << " (" << t.format_name << ')';
    out << '\n';
  }
  for (const auto& op : module.ops) {
    if (const auto* r = std::get_if<ReadOp>(&op)) {
      out << "ta.generic_call @space_read(%" << r->tensor << ", \"" << r->path << "\")\n";
    } else if (const auto* f = std::get_if<FillOp>(&op)) {
      out << "ta.fill %" << f->tensor << ' ' << ingest::format_value(f->value) << '\n';
    } else {
      const auto& tc = std::get<TensorOp>(op);
      const auto& m = tc.maps;
      auto access = [&](std::size_t o) {
        std::vector<std::string> names;
        for (std::size_t g : m.dims[o]) names.push_back(m.indices[g]);
        std::string s = "%" + tc.operands[o] + "[";
        for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
        return s + "]";
      };
      auto map = [&](std::size_t o) {
        std::string s = "(";
        for (std::size_t i = 0; i < m.dims[o].size(); ++i) {
          s += (i ? "," : "") + std::string("d") + std::to_string(m.dims[o][i]);
        }
        return s + ")";
      };
      out << "ta.tc " << dsl::to_string(tc.kind) << ' ' << access(kOut) << " = " << access(kIn0)
          << " * " << access(kIn1) << " formats [" << format_attrs(tc.attrs[kIn0]) << ", "
          << format_attrs(tc.attrs[kIn1]) << ", " << format_attrs(tc.attrs[kOut])
          << "] indexing_maps [" << map(kIn0) << ", " << map(kIn1) << ", " << map(kOut) << "]\n";
    }
  }
  return out.str();
}

}  // namespace sparta::ir
