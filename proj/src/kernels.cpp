#include "sparta/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "sparta/error.hpp"

namespace sparta::kernels {

std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::SpMV: return "spmv";
    case Kernel::SpMM: return "spmm";
    case Kernel::TTV: return "ttv";
    case Kernel::TTM: return "ttm";
  }
  return "?";
}

std::optional<Kernel> parse_kernel(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Kernel k : kAllKernels) {
    if (to_string(k) == lower) return k;
  }
  return std::nullopt;
}

std::size_t sparse_rank(Kernel k) {
  return (k == Kernel::SpMV || k == Kernel::SpMM) ? 2 : 3;
}

namespace {

void check_mode(Kernel k, std::size_t mode) {
  if ((k == Kernel::TTV || k == Kernel::TTM) && mode >= 3) {
    throw SemanticError(std::string(to_string(k)) + " mode must be 0, 1 or 2, got " +
                        std::to_string(mode));
  }
}

}  // namespace

ir::TensorOp make_op(Kernel k, const std::vector<FormatAttr>& sparse_attrs, std::size_t mode) {
  check_mode(k, mode);
  const std::size_t rank = sparse_rank(k);
  if (sparse_attrs.size() != rank) {
    throw SemanticError(std::string(to_string(k)) + " needs a rank-" + std::to_string(rank) +
                        " sparse operand, got format " + format_attrs(sparse_attrs));
  }
  check_attr_chain(sparse_attrs, rank);

  const std::vector<std::string> a_labels =
      rank == 2 ? std::vector<std::string>{"i", "j"} : std::vector<std::string>{"i", "j", "k"};
  std::vector<std::string> others;
  for (std::size_t d = 0; d < rank; ++d) {
    if (d != mode) others.push_back(a_labels[d]);
  }
  std::array<std::string, 3> names;
  std::array<std::vector<std::string>, 3> labels;
  switch (k) {
    case Kernel::SpMV:
      names = {"A", "x", "y"};
      labels = {a_labels, {"j"}, {"i"}};
      break;
    case Kernel::SpMM:
      names = {"A", "B", "C"};
      labels = {a_labels, {"j", "k"}, {"i", "k"}};
      break;
    case Kernel::TTV:
      names = {"A", "v", "C"};
      labels = {a_labels, {a_labels[mode]}, others};
      break;
    case Kernel::TTM:
      names = {"A", "U", "C"};
      others.push_back("r");
      labels = {a_labels, {a_labels[mode], "r"}, others};
      break;
  }
  std::array<std::vector<FormatAttr>, 3> attrs{
      sparse_attrs, std::vector<FormatAttr>(labels[1].size(), FormatAttr::D),
      std::vector<FormatAttr>(labels[2].size(), FormatAttr::D)};
  return ir::make_tensor_op(names, labels, attrs, {});
}

std::vector<index_t> dense_operand_shape(Kernel k, const std::vector<index_t>& sparse_shape,
                                         index_t inner, std::size_t mode) {
  check_mode(k, mode);
  if (sparse_shape.size() != sparse_rank(k)) {
    throw SemanticError(std::string(to_string(k)) + " needs a rank-" +
                        std::to_string(sparse_rank(k)) + " input, got rank " +
                        std::to_string(sparse_shape.size()));
  }
  switch (k) {
    case Kernel::SpMV: return {sparse_shape[1]};
    case Kernel::SpMM: return {sparse_shape[1], inner};
    case Kernel::TTV: return {sparse_shape[mode]};
    case Kernel::TTM: return {sparse_shape[mode], inner};
  }
  return {};
}

Prepared prepare(Kernel k, SpTensor a, SpTensor dense, std::size_t mode) {
  const ir::TensorOp op = make_op(k, a.attrs(), mode);
  Prepared p{codegen::generate(ir::build_schedule(op), op), {}};
  p.binding.bind(op.operands[ir::kIn0], std::move(a));
  p.binding.bind(op.operands[ir::kIn1], std::move(dense));
  return p;
}

exec::DenseArray run_kernel(Kernel k, const SpTensor& a, const SpTensor& dense,
                            const exec::ExecConfig& cfg, std::size_t mode) {
  return prepare(k, a, dense, mode).run(cfg);
}

exec::DenseArray dense_oracle(Kernel k, const exec::DenseArray& a, const exec::DenseArray& b,
                              std::size_t mode) {
  check_mode(k, mode);
  const auto& s = a.shape;
  auto mismatch = [&] {
    return RuntimeError("operand shapes do not match the " + std::string(to_string(k)) + " kernel");
  };
  if (s.size() != sparse_rank(k)) throw mismatch();
  exec::DenseArray out;
  switch (k) {
    case Kernel::SpMV: {
      if (b.shape != std::vector<index_t>{s[1]}) throw mismatch();
      out.shape = {s[0]};
      out.values.assign(s[0], 0.0);
      for (index_t i = 0; i < s[0]; ++i)
        for (index_t j = 0; j < s[1]; ++j) out.values[i] += a.values[i * s[1] + j] * b.values[j];
      break;
    }
    case Kernel::SpMM: {
      if (b.shape.size() != 2 || b.shape[0] != s[1]) throw mismatch();
      const index_t n = b.shape[1];
      out.shape = {s[0], n};
      out.values.assign(s[0] * n, 0.0);
      for (index_t i = 0; i < s[0]; ++i)
        for (index_t j = 0; j < s[1]; ++j)
          for (index_t c = 0; c < n; ++c)
            out.values[i * n + c] += a.values[i * s[1] + j] * b.values[j * n + c];
      break;
    }
    case Kernel::TTV:
    case Kernel::TTM: {
      const bool matrix = k == Kernel::TTM;
      if (b.shape.size() != (matrix ? 2u : 1u) || b.shape[0] != s[mode]) throw mismatch();
      const index_t n = matrix ? b.shape[1] : 1;
      for (std::size_t d = 0; d < 3; ++d) {
        if (d != mode) out.shape.push_back(s[d]);
      }
      if (matrix) out.shape.push_back(n);
      out.values.assign(out.shape[0] * out.shape[1] * n, 0.0);
      for (index_t i = 0; i < s[0]; ++i)
        for (index_t j = 0; j < s[1]; ++j)
          for (index_t l = 0; l < s[2]; ++l) {
            const index_t c[3] = {i, j, l};
            const index_t f0 = c[mode == 0 ? 1 : 0];
            const index_t f1 = c[mode == 2 ? 1 : 2];
            const double av = a.values[(i * s[1] + j) * s[2] + l];
            for (index_t r = 0; r < n; ++r)
              out.values[(f0 * out.shape[1] + f1) * n + r] += av * b.values[c[mode] * n + r];
          }
      break;
    }
  }
  return out;
}

}  // namespace sparta::kernels
