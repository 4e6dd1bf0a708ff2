#pragma once

// The four benchmark kernels as TensorOps over one sparse operand A and one
// dense operand:
//   spmv  y[i]     = A[i,j] * x[j]
//   spmm  C[i,k]   = A[i,j] * B[j,k]
//   ttv   C[..]    = A[i,j,k] * v[m]       (m: the contracted mode)
//   ttm   C[..,r]  = A[i,j,k] * U[m,r]

#include <optional>
#include <string_view>
#include <vector>

#include "sparta/codegen.hpp"
#include "sparta/exec.hpp"

namespace sparta::kernels {

enum class Kernel { SpMV, SpMM, TTV, TTM };

inline constexpr Kernel kAllKernels[] = {Kernel::SpMV, Kernel::SpMM, Kernel::TTV, Kernel::TTM};

std::string_view to_string(Kernel k);
std::optional<Kernel> parse_kernel(std::string_view name);
std::size_t sparse_rank(Kernel k);

/// `mode` is the contracted mode of A for ttv/ttm (ignored otherwise).
ir::TensorOp make_op(Kernel k, const std::vector<FormatAttr>& sparse_attrs, std::size_t mode = 2);

/// Shape of the dense operand; `inner` is the extra extent of spmm/ttm.
std::vector<index_t> dense_operand_shape(Kernel k, const std::vector<index_t>& sparse_shape,
                                         index_t inner, std::size_t mode = 2);

/// A loop nest bound to its operands, ready to run repeatedly.
struct Prepared {
  codegen::LoopNest nest;
  exec::Binding binding;

  exec::DenseArray run(const exec::ExecConfig& cfg) const { return exec::run(nest, binding, cfg); }
};

/// Throws SemanticError when A's rank does not fit the kernel.
Prepared prepare(Kernel k, SpTensor a, SpTensor dense, std::size_t mode = 2);

exec::DenseArray run_kernel(Kernel k, const SpTensor& a, const SpTensor& dense,
                            const exec::ExecConfig& cfg, std::size_t mode = 2);

/// Straightforward nested loops over every coordinate of A.
exec::DenseArray dense_oracle(Kernel k, const exec::DenseArray& a, const exec::DenseArray& b,
                              std::size_t mode = 2);

}  // namespace sparta::kernels
