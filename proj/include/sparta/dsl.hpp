#pragma once

// Front end for the tensor-algebra language:
//
//   def main() {
//     IndexLabel [a] = [?];
//     IndexLabel [c] = [32];
//     Tensor<double> A([a,b], CSR);
//     Tensor<double> B([b,c], {D,D});
//     A[a,b] = space_read("m.mtx");
//     B[b,c] = 1.0;
//     C[a,c] = A[a,b] * B[b,c];
//   }
//
// `#` starts a comment that runs to the end of the line.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sparta/error.hpp"
#include "sparta/storage.hpp"

namespace sparta::dsl {

enum class TokenKind { Keyword, Ident, Number, String, Punct };

struct Token {
  TokenKind kind;
  std::string text;  // string literals hold the unquoted contents
  SourcePos pos;

  bool operator==(const Token&) const = default;
};

std::vector<Token> tokenize(std::string_view source);

struct LabelDecl {
  std::string name;
  std::optional<index_t> extent;  // nullopt: dynamic (`?`)

  bool operator==(const LabelDecl&) const = default;
};

/// Either a preset name (CSR, Dense, ...) or an explicit attribute list.
using FormatSpec = std::variant<std::string, std::vector<FormatAttr>>;

struct TensorDecl {
  std::string name;
  std::vector<std::string> labels;
  FormatSpec format;

  bool operator==(const TensorDecl&) const = default;
};

struct Access {
  std::string tensor;
  std::vector<std::string> labels;

  bool operator==(const Access&) const = default;
};

struct ReadFill {
  Access target;
  std::string filename;

  bool operator==(const ReadFill&) const = default;
};

struct ConstFill {
  Access target;
  double value = 0.0;

  bool operator==(const ConstFill&) const = default;
};

struct Assign {
  Access lhs;
  Access rhs0;
  Access rhs1;

  bool operator==(const Assign&) const = default;
};

using Stmt = std::variant<ReadFill, ConstFill, Assign>;

struct ProgramAst {
  std::vector<LabelDecl> labels;
  std::vector<TensorDecl> tensors;
  std::vector<Stmt> stmts;

  bool operator==(const ProgramAst&) const = default;

  const LabelDecl* find_label(std::string_view name) const;
  const TensorDecl* find_tensor(std::string_view name) const;
};

/// Parses and checks a whole program. Syntax problems raise ParseError,
/// name/rank/format problems SemanticError; both carry a source position.
ProgramAst parse(std::string_view source);

enum class ExprKind { Contraction, Elementwise };

std::string_view to_string(ExprKind kind);

/// Elementwise when both operand label lists equal the output list;
/// contraction when every label missing from the output is shared by both
/// operands (and summed). Anything else is a SemanticError.
ExprKind classify_expr(const std::vector<std::string>& lhs, const std::vector<std::string>& rhs0,
                       const std::vector<std::string>& rhs1);

/// Canonical source text; parse(pretty_print(ast)) == ast.
std::string pretty_print(const ProgramAst& ast);

/// Attribute list a declaration resolves to.
std::vector<FormatAttr> resolve_format(const TensorDecl& decl);

}  // namespace sparta::dsl
