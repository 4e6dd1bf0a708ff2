#include "sparta/exec.hpp"

#include <algorithm>
#include <optional>

#include "sparta/error.hpp"
#include "sparta/ingest.hpp"
#include "sparta/reorder.hpp"
#include "sparta/task_pool.hpp"

namespace sparta::exec {

using codegen::LevelKind;
using codegen::LoopNest;
using codegen::UpdateKind;
using ir::kIn0;
using ir::kIn1;
using ir::kNumOperands;
using ir::kOut;

std::size_t default_grain(std::size_t outer, std::size_t workers) {
  return std::max<std::size_t>(1, outer / (8 * std::max<std::size_t>(1, workers)));
}

void Binding::bind(const std::string& name, std::shared_ptr<const SpTensor> tensor) {
  if (!tensor) throw RuntimeError("cannot bind '" + name + "' to a null tensor");
  const auto violations = validate(*tensor);
  if (!violations.empty()) {
    throw RuntimeError("tensor bound to '" + name + "' is malformed: " + violations.front().message);
  }
  tensors_[name] = std::move(tensor);
}

void Binding::bind(const std::string& name, SpTensor tensor) {
  bind(name, std::make_shared<const SpTensor>(std::move(tensor)));
}

const SpTensor* Binding::find(std::string_view name) const {
  const auto it = tensors_.find(name);
  return it == tensors_.end() ? nullptr : it->second.get();
}

std::vector<index_t> Binding::resolve_extents(const LoopNest& nest) const {
  const auto& maps = nest.maps;
  std::vector<std::optional<index_t>> extents(maps.static_extents);
  for (std::size_t o = 0; o < kNumOperands; ++o) {
    const SpTensor* t = find(nest.operands[o]);
    if (!t) {
      if (o == kOut) continue;
      throw RuntimeError("operand '" + nest.operands[o] + "' is not bound");
    }
    if (t->rank() != maps.dims[o].size()) {
      throw RuntimeError("operand '" + nest.operands[o] + "' has rank " + std::to_string(t->rank()) +
                         ", expected " + std::to_string(maps.dims[o].size()));
    }
    if (t->attrs() != nest.attrs[o]) {
      throw RuntimeError("operand '" + nest.operands[o] + "' is stored as " +
                         format_attrs(t->attrs()) + " but the loop nest expects " +
                         format_attrs(nest.attrs[o]));
    }
    for (std::size_t d = 0; d < maps.dims[o].size(); ++d) {
      const std::size_t g = maps.dims[o][d];
      const index_t e = t->shape()[d];
      if (extents[g] && *extents[g] != e) {
        throw RuntimeError("extent mismatch for index '" + maps.indices[g] + "': " +
                           std::to_string(*extents[g]) + " vs " + std::to_string(e) + " in '" +
                           nest.operands[o] + "'");
      }
      extents[g] = e;
    }
  }
  std::vector<index_t> out;
  for (std::size_t g = 0; g < extents.size(); ++g) {
    if (!extents[g]) throw RuntimeError("extent of index '" + maps.indices[g] + "' is unresolved");
    out.push_back(*extents[g]);
  }
  return out;
}

bool parallel_eligible(const LoopNest& nest) {
  if (nest.levels.empty()) return false;
  const auto& out = nest.maps.dims[kOut];
  return std::find(out.begin(), out.end(), nest.levels.front().index) != out.end();
}

namespace {

class Interpreter {
 public:
  struct Level {
    LevelKind kind;
    index_t extent;  // extent of the level's index
    const std::vector<index_t>* pos = nullptr;
    const std::vector<index_t>* crd = nullptr;
    std::size_t operand = 0;
    std::array<UpdateKind, kNumOperands> updates;
  };

  Interpreter(const LoopNest& nest, const SpTensor& in0, const SpTensor& in1,
              const std::vector<index_t>& extents, std::vector<double>& out)
      : in_{in0.vals().data(), in1.vals().data()},
        size_{in0.vals().size(), in1.vals().size(), out.size()},
        out_(out.data()) {
    const SpTensor* inputs[2] = {&in0, &in1};
    for (const auto& l : nest.levels) {
      Level level{l.kind, extents[l.index], nullptr, nullptr, l.operand, l.updates};
      if (l.kind != LevelKind::Dense) {
        const auto& dim = inputs[l.operand]->dim(l.dim);
        level.pos = &dim.pos;
        level.crd = &dim.crd;
      }
      levels_.push_back(level);
    }
  }

  /// Iteration range of the outermost level.
  std::pair<index_t, index_t> outer_range() const {
    const Level& l = levels_.front();
    if (l.kind == LevelKind::Compressed) return {(*l.pos)[0], (*l.pos)[1]};
    return {0, l.extent};
  }

  const Level& outer() const { return levels_.front(); }

  void run_all() {
    const index_t zero[kNumOperands] = {0, 0, 0};
    if (levels_.empty()) {
      compute(zero);
      return;
    }
    const auto [lo, hi] = outer_range();
    iterate(0, zero, lo, hi);
  }

  void run_outer(index_t lo, index_t hi) {
    const index_t zero[kNumOperands] = {0, 0, 0};
    iterate(0, zero, lo, hi);
  }

 private:
  void compute(const index_t* v) {
    for (std::size_t o = 0; o < kNumOperands; ++o) {
      if (v[o] >= size_[o]) {
        throw RuntimeError("value index " + std::to_string(v[o]) + " out of bounds for operand " +
                           std::to_string(o) + " of size " + std::to_string(size_[o]));
      }
    }
    out_[v[kOut]] += in_[kIn0][v[kIn0]] * in_[kIn1][v[kIn1]];
  }

  static void update(const Level& l, const index_t* in, index_t coord, index_t position, index_t* out) {
    for (std::size_t o = 0; o < kNumOperands; ++o) {
      switch (l.updates[o]) {
        case UpdateKind::Keep:
          out[o] = in[o];
          break;
        case UpdateKind::ScaleAdd:
          out[o] = in[o] * l.extent + coord;
          break;
        case UpdateKind::SetPos:
          out[o] = position;
          break;
      }
    }
  }

  void descend(std::size_t depth, const index_t* v) {
    if (depth == levels_.size()) {
      compute(v);
      return;
    }
    const Level& l = levels_[depth];
    switch (l.kind) {
      case LevelKind::Dense:
        iterate(depth, v, 0, l.extent);
        break;
      case LevelKind::Compressed: {
        const index_t m = v[l.operand];
        iterate(depth, v, (*l.pos)[m], (*l.pos)[m + 1]);
        break;
      }
      case LevelKind::Singleton:
        iterate(depth, v, 0, 0);
        break;
    }
  }

  void iterate(std::size_t depth, const index_t* v, index_t lo, index_t hi) {
    const Level& l = levels_[depth];
    index_t next[kNumOperands];
    switch (l.kind) {
      case LevelKind::Dense:
        for (index_t c = lo; c < hi; ++c) {
          update(l, v, c, c, next);
          descend(depth + 1, next);
        }
        break;
      case LevelKind::Compressed:
        for (index_t p = lo; p < hi; ++p) {
          update(l, v, (*l.crd)[p], p, next);
          descend(depth + 1, next);
        }
        break;
      case LevelKind::Singleton: {
        const index_t m = v[l.operand];
        update(l, v, (*l.crd)[m], m, next);
        descend(depth + 1, next);
        break;
      }
    }
  }

  std::vector<Level> levels_;
  const double* in_[2];
  std::size_t size_[kNumOperands];
  double* out_;
};

}  // namespace

DenseArray run(const LoopNest& nest, const Binding& binding, const ExecConfig& cfg) {
  const std::vector<index_t> extents = binding.resolve_extents(nest);
  DenseArray result;
  std::size_t total = 1;
  for (std::size_t g : nest.maps.dims[kOut]) {
    result.shape.push_back(extents[g]);
    total *= extents[g];
  }
  if (const SpTensor* init = binding.find(nest.operands[kOut])) {
    if (!init->is_dense()) {
      throw RuntimeError("output '" + nest.operands[kOut] + "' must be stored densely");
    }
    result.values = init->vals();
  } else {
    result.values.assign(total, 0.0);
  }

  Interpreter interp(nest, *binding.find(nest.operands[kIn0]), *binding.find(nest.operands[kIn1]),
                     extents, result.values);

  if (cfg.mode == Mode::Sequential || !parallel_eligible(nest)) {
    interp.run_all();
    return result;
  }

  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  const auto [lo, hi] = interp.outer_range();
  const std::size_t grain = cfg.grain ? cfg.grain : default_grain(hi - lo, workers);
  // Chunks of the outer loop; a non-unique outer level keeps runs of equal
  // coordinates in one chunk so no two tasks touch the same output row.
  const auto& outer = interp.outer();
  const bool align = outer.kind == LevelKind::Compressed && nest.attrs[outer.operand].front() == FormatAttr::CN;
  std::vector<std::pair<index_t, index_t>> chunks;
  for (index_t start = lo; start < hi;) {
    index_t end = std::min<index_t>(hi, start + grain);
    if (align) {
      const auto& crd = *outer.crd;
      while (end < hi && crd[end] == crd[end - 1]) ++end;
    }
    chunks.emplace_back(start, end);
    start = end;
  }
  TaskPool::shared(workers).parallel_for(chunks.size(), [&](std::size_t i) {
    interp.run_outer(chunks[i].first, chunks[i].second);
  });
  return result;
}

std::vector<LoopNest> compile_module(const ir::TaModule& module) {
  std::vector<LoopNest> nests;
  for (const auto& op : module.ops) {
    if (const auto* tc = std::get_if<ir::TensorOp>(&op)) {
      nests.push_back(codegen::generate(ir::build_schedule(*tc), *tc));
    }
  }
  return nests;
}

// ---------------------------------------------------------------------------

namespace {

class ProgramRunner {
 public:
  ProgramRunner(const ir::TaModule& module, const ProgramOptions& options)
      : module_(module), options_(options) {
    for (const auto& l : module.labels) extents_[l.name] = l.extent;
  }

  std::map<std::string, SpTensor> run() {
    for (const auto& op : module_.ops) {
      if (const auto* r = std::get_if<ir::ReadOp>(&op)) {
        read(*r);
      } else if (const auto* f = std::get_if<ir::FillOp>(&op)) {
        fill(*f);
      } else {
        product(std::get<ir::TensorOp>(op));
      }
    }
    std::map<std::string, SpTensor> results;
    for (const auto& [name, t] : tensors_) results.emplace(name, restore(name, *t));
    return results;
  }

 private:
  std::string resolve_path(const std::string& path) const {
    if (path.rfind("synth:", 0) == 0 || options_.base_dir.empty()) return path;
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (options_.base_dir / p).string();
  }

  void set_extent(const std::string& label, index_t extent, const std::string& tensor) {
    auto& known = extents_.at(label);
    if (known && *known != extent) {
      throw RuntimeError("extent conflict for index label '" + label + "': declared or inferred " +
                         std::to_string(*known) + ", but '" + tensor + "' has " +
                         std::to_string(extent));
    }
    known = extent;
  }

  void read(const ir::ReadOp& r) {
    const auto& sym = module_.tensor(r.tensor);
    CooTensor coo = ingest::read_any(resolve_path(r.path));
    if (coo.rank() != sym.labels.size()) {
      throw RuntimeError("'" + r.path + "' holds a rank-" + std::to_string(coo.rank()) +
                         " tensor but '" + sym.name + "' has rank " +
                         std::to_string(sym.labels.size()));
    }
    for (std::size_t d = 0; d < coo.rank(); ++d) set_extent(sym.labels[d], coo.shape()[d], sym.name);

    if (options_.reorder) {
      const bool missing = std::any_of(sym.labels.begin(), sym.labels.end(),
                                       [&](const std::string& l) { return !perms_.count(l); });
      if (missing) {
        auto computed = reorder::lexi_order(coo, options_.reorder_iters);
        for (std::size_t d = 0; d < coo.rank(); ++d) perms_.try_emplace(sym.labels[d], computed[d]);
      }
      reorder::ModePermutations p;
      for (const auto& l : sym.labels) p.push_back(perms_.at(l));
      coo = reorder::apply_permutations(coo, p);
    }
    tensors_[sym.name] = std::make_shared<const SpTensor>(compress(coo, sym.attrs));
  }

  void fill(const ir::FillOp& f) {
    const auto& sym = module_.tensor(f.tensor);
    std::vector<index_t> shape;
    for (const auto& l : sym.labels) {
      const auto& e = extents_.at(l);
      if (!e) {
        throw RuntimeError("extent of index label '" + l + "' is unknown when filling '" + sym.name +
                           "'; read a tensor that uses it first or give it a static extent");
      }
      shape.push_back(*e);
    }
    std::size_t total = 1;
    for (index_t e : shape) total *= e;
    if (std::all_of(sym.attrs.begin(), sym.attrs.end(), [](FormatAttr a) { return a == FormatAttr::D; })) {
      tensors_[sym.name] =
          std::make_shared<const SpTensor>(SpTensor::dense(shape, std::vector<double>(total, f.value)));
      return;
    }
    std::vector<index_t> coords;
    std::vector<double> vals;
    if (f.value != 0.0) {
      std::vector<index_t> c(shape.size(), 0);
      for (std::size_t n = 0; n < total; ++n) {
        coords.insert(coords.end(), c.begin(), c.end());
        vals.push_back(f.value);
        for (std::size_t d = shape.size(); d-- > 0;) {
          if (++c[d] < shape[d]) break;
          c[d] = 0;
        }
      }
    }
    tensors_[sym.name] = std::make_shared<const SpTensor>(
        compress(CooTensor::from_entries(shape, std::move(coords), std::move(vals)), sym.attrs));
  }

  void product(const ir::TensorOp& op) {
    const LoopNest nest = codegen::generate(ir::build_schedule(op), op);
    Binding binding;
    for (std::size_t o = 0; o < kNumOperands; ++o) {
      const auto it = tensors_.find(op.operands[o]);
      if (it != tensors_.end()) {
        binding.bind(op.operands[o], it->second);
      } else if (o != kOut) {
        throw RuntimeError("operand '" + op.operands[o] + "' has no value");
      }
    }
    DenseArray out = exec::run(nest, binding, options_.exec);
    const auto& sym = module_.tensor(op.operands[kOut]);
    for (std::size_t d = 0; d < out.shape.size(); ++d) set_extent(sym.labels[d], out.shape[d], sym.name);
    tensors_[sym.name] = std::make_shared<const SpTensor>(SpTensor::dense(out.shape, std::move(out.values)));
  }

  SpTensor restore(const std::string& name, const SpTensor& t) const {
    const auto& sym = module_.tensor(name);
    reorder::ModePermutations inv;
    bool any = false;
    for (std::size_t d = 0; d < sym.labels.size(); ++d) {
      const auto it = perms_.find(sym.labels[d]);
      if (it != perms_.end()) {
        inv.push_back(reorder::inverse(it->second));
        any = true;
      } else {
        inv.push_back(reorder::identity({t.shape()[d]}).front());
      }
    }
    if (!any) return t;
    return compress(reorder::apply_permutations(decompress(t), inv), sym.attrs);
  }

  const ir::TaModule& module_;
  const ProgramOptions& options_;
  std::map<std::string, std::optional<index_t>> extents_;
  std::map<std::string, reorder::Permutation> perms_;
  std::map<std::string, std::shared_ptr<const SpTensor>> tensors_;
};

}  // namespace

std::map<std::string, SpTensor> run_program(const ir::TaModule& module, const ProgramOptions& options) {
  return ProgramRunner(module, options).run();
}

}  // namespace sparta::exec
