#pragma once

// Interpreter for generated loop nests, plus whole-program execution.

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sparta/codegen.hpp"
#include "sparta/ir.hpp"
#include "sparta/reorder.hpp"
#include "sparta/storage.hpp"

namespace sparta::exec {

enum class Mode { Sequential, Parallel };

struct ExecConfig {
  Mode mode = Mode::Sequential;
  std::size_t workers = 1;
  std::size_t grain = 0;  // outer iterations per task; 0 picks the default
};

/// max(1, outer / (8 * workers))
std::size_t default_grain(std::size_t outer, std::size_t workers);

/// Row-major dense array.
struct DenseArray {
  std::vector<index_t> shape;
  std::vector<double> values;

  bool operator==(const DenseArray&) const = default;
};

/// Operand symbol -> tensor. Inputs are validated when bound. Binding the
/// output symbol (all-D) supplies the values the product accumulates into.
class Binding {
 public:
  void bind(const std::string& name, std::shared_ptr<const SpTensor> tensor);
  void bind(const std::string& name, SpTensor tensor);
  const SpTensor* find(std::string_view name) const;

  /// Extent of every global index of the nest. Throws RuntimeError when
  /// operands disagree with each other or with a static label.
  std::vector<index_t> resolve_extents(const codegen::LoopNest& nest) const;

 private:
  std::map<std::string, std::shared_ptr<const SpTensor>, std::less<>> tensors_;
};

/// True when the outermost loop's index is an output index, so outer
/// iterations write disjoint parts of the output.
bool parallel_eligible(const codegen::LoopNest& nest);

/// Executes the nest and returns the dense output. Parallel mode splits the
/// outermost loop into chunks on the shared task pool; results are bitwise
/// identical to sequential mode. Out-of-range value indices raise
/// RuntimeError.
DenseArray run(const codegen::LoopNest& nest, const Binding& binding, const ExecConfig& cfg);

/// Loop nests for every product of a module, in program order.
std::vector<codegen::LoopNest> compile_module(const ir::TaModule& module);

struct ProgramOptions {
  ExecConfig exec;
  bool reorder = false;
  std::size_t reorder_iters = reorder::kDefaultMaxIters;
  std::filesystem::path base_dir;  // relative read paths resolve against this
};

/// Final value of every tensor that was read, filled or computed. With
/// reordering on, inputs are permuted per index label on read and every
/// result is mapped back to the original coordinates at the end.
std::map<std::string, SpTensor> run_program(const ir::TaModule& module, const ProgramOptions& options);

}  // namespace sparta::exec
