#include "sparta/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "sparta/ingest.hpp"

namespace sparta::dsl {

namespace {

const std::set<std::string, std::less<>> kKeywords = {"def", "main", "IndexLabel", "Tensor",
                                                      "double"};
constexpr std::string_view kPunct = "[]{}(),=;*?<>";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };

  while (i < src.size()) {
    const char c = src[i];
    const SourcePos pos{line, col};
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string text(src.substr(i, j - i));
      const auto kind = kKeywords.contains(text) ? TokenKind::Keyword : TokenKind::Ident;
      out.push_back({kind, std::move(text), pos});
      advance(j - i);
    } else if (digit(c) || ((c == '-' || c == '.') && i + 1 < src.size() &&
                            (digit(src[i + 1]) || src[i + 1] == '.'))) {
      std::size_t j = i;
      if (src[j] == '-') ++j;
      while (j < src.size() && digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && digit(src[k])) {
          j = k;
          while (j < src.size() && digit(src[j])) ++j;
        }
      }
      out.push_back({TokenKind::Number, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
    } else if (c == '"') {
      std::string text;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size() && src[j] != '\n') {
        if (src[j] == '\\' && j + 1 < src.size()) {
          text += src[j + 1];
          j += 2;
        } else if (src[j] == '"') {
          closed = true;
          ++j;
          break;
        } else {
          text += src[j++];
        }
      }
      if (!closed) throw ParseError("unterminated string literal", pos);
      out.push_back({TokenKind::String, std::move(text), pos});
      advance(j - i);
    } else if (kPunct.find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c), pos});
      advance(1);
    } else {
      throw ParseError(std::string("illegal character '") + c + "'", pos);
    }
  }
  return out;
}

const LabelDecl* ProgramAst::find_label(std::string_view name) const {
  auto it = std::find_if(labels.begin(), labels.end(), [&](auto& l) { return l.name == name; });
  return it == labels.end() ? nullptr : &*it;
}

const TensorDecl* ProgramAst::find_tensor(std::string_view name) const {
  auto it = std::find_if(tensors.begin(), tensors.end(), [&](auto& t) { return t.name == name; });
  return it == tensors.end() ? nullptr : &*it;
}

std::string_view to_string(ExprKind kind) {
  return kind == ExprKind::Contraction ? "contraction" : "elementwise";
}

std::vector<FormatAttr> resolve_format(const TensorDecl& decl) {
  if (const auto* name = std::get_if<std::string>(&decl.format)) {
    return preset_attrs(*name, decl.labels.size());
  }
  return std::get<std::vector<FormatAttr>>(decl.format);
}

ExprKind classify_expr(const std::vector<std::string>& lhs, const std::vector<std::string>& rhs0,
                       const std::vector<std::string>& rhs1) {
  auto has = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  for (const auto* list : {&lhs, &rhs0, &rhs1}) {
    std::set<std::string> seen;
    for (const auto& l : *list) {
      if (!seen.insert(l).second) {
        throw SemanticError("label '" + l + "' repeated within one tensor access");
      }
    }
  }
  if (rhs0 == lhs && rhs1 == lhs) return ExprKind::Elementwise;

  for (const auto& l : lhs) {
    if (!has(rhs0, l) && !has(rhs1, l)) {
      throw SemanticError("output label '" + l + "' does not appear on the right-hand side");
    }
  }
  for (const auto* list : {&rhs0, &rhs1}) {
    for (const auto& l : *list) {
      if (has(lhs, l)) continue;
      if (!(has(rhs0, l) && has(rhs1, l))) {
        throw SemanticError("free label '" + l + "' is neither summed nor bound on the output");
      }
    }
  }
  for (const auto& l : rhs0) {
    if (has(rhs1, l) && has(lhs, l)) {
      throw SemanticError("label '" + l +
                          "' is shared by both operands and the output: expression is neither a "
                          "contraction nor elementwise");
    }
  }
  return ExprKind::Contraction;
}

// ---------------------------------------------------------------------------
// parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {
    end_pos_ = toks_.empty() ? SourcePos{1, 1} : toks_.back().pos;
    if (!toks_.empty()) end_pos_.column += toks_.back().text.size();
  }

  ProgramAst program() {
    expect_kw("def");
    expect_kw("main");
    expect_punct("(");
    expect_punct(")");
    expect_punct("{");
    while (peek_kw("IndexLabel") || peek_kw("Tensor")) {
      if (peek_kw("IndexLabel")) {
        label_decl();
      } else {
        tensor_decl();
      }
    }
    while (!peek_punct("}")) stmt();
    expect_punct("}");
    if (i_ < toks_.size()) fail("end of input");
    return std::move(ast_);
  }

 private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  SourcePos end_pos_;
  ProgramAst ast_;
  std::set<std::string> initialized_;

  const Token* peek() const { return i_ < toks_.size() ? &toks_[i_] : nullptr; }
  SourcePos here() const { return peek() ? peek()->pos : end_pos_; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token* t = peek();
    const std::string found = t ? "'" + t->text + "'" : "end of input";
    throw ParseError("expected " + expected + ", found " + found, here());
  }

  bool peek_kw(std::string_view kw) const {
    return peek() && peek()->kind == TokenKind::Keyword && peek()->text == kw;
  }
  bool peek_punct(std::string_view p) const {
    return peek() && peek()->kind == TokenKind::Punct && peek()->text == p;
  }
  void expect_kw(std::string_view kw) {
    if (!peek_kw(kw)) fail("'" + std::string(kw) + "'");
    ++i_;
  }
  void expect_punct(std::string_view p) {
    if (!peek_punct(p)) fail("'" + std::string(p) + "'");
    ++i_;
  }
  const Token& expect(TokenKind kind, const char* what) {
    if (!peek() || peek()->kind != kind) fail(what);
    return toks_[i_++];
  }

  // ident ("," ident)*  between the given brackets
  std::vector<const Token*> ident_list(std::string_view open, std::string_view close) {
    expect_punct(open);
    std::vector<const Token*> out;
    out.push_back(&expect(TokenKind::Ident, "identifier"));
    while (peek_punct(",")) {
      ++i_;
      out.push_back(&expect(TokenKind::Ident, "identifier"));
    }
    expect_punct(close);
    return out;
  }

  void label_decl() {
    expect_kw("IndexLabel");
    expect_punct("[");
    const Token& name = expect(TokenKind::Ident, "label name");
    expect_punct("]");
    expect_punct("=");
    expect_punct("[");
    LabelDecl decl{name.text, std::nullopt};
    if (peek_punct("?")) {
      ++i_;
    } else {
      const Token& num = expect(TokenKind::Number, "extent or '?'");
      index_t extent = 0;
      const auto* b = num.text.data();
      const auto* e = b + num.text.size();
      auto [p, ec] = std::from_chars(b, e, extent);
      if (ec != std::errc() || p != e) {
        throw SemanticError("label extent must be a non-negative integer", num.pos);
      }
      decl.extent = extent;
    }
    expect_punct("]");
    expect_punct(";");
    if (ast_.find_label(decl.name)) {
      throw SemanticError("label '" + decl.name + "' declared twice", name.pos);
    }
    ast_.labels.push_back(std::move(decl));
  }

  void tensor_decl() {
    expect_kw("Tensor");
    expect_punct("<");
    expect_kw("double");
    expect_punct(">");
    const Token& name = expect(TokenKind::Ident, "tensor name");
    expect_punct("(");
    const auto labels = ident_list("[", "]");
    expect_punct(",");
    TensorDecl decl{name.text, {}, {}};
    for (const Token* l : labels) {
      if (!ast_.find_label(l->text)) {
        throw SemanticError("undeclared index label '" + l->text + "'", l->pos);
      }
      decl.labels.push_back(l->text);
    }
    const SourcePos format_pos = here();
    if (peek_punct("{")) {
      std::vector<FormatAttr> attrs;
      for (const Token* a : ident_list("{", "}")) {
        try {
          attrs.push_back(parse_attr(a->text));
        } catch (const SemanticError& e) {
          throw SemanticError(e.what(), a->pos);
        }
      }
      decl.format = std::move(attrs);
    } else {
      const Token& fmt = expect(TokenKind::Ident, "format name or attribute list");
      if (!is_preset_name(fmt.text)) {
        throw SemanticError("unknown format '" + fmt.text + "'", fmt.pos);
      }
      decl.format = fmt.text;
    }
    expect_punct(")");
    expect_punct(";");
    try {
      check_attr_chain(resolve_format(decl), decl.labels.size());
    } catch (const SemanticError& e) {
      throw SemanticError(e.what(), format_pos);
    }
    if (ast_.find_tensor(decl.name)) {
      throw SemanticError("tensor '" + decl.name + "' declared twice", name.pos);
    }
    ast_.tensors.push_back(std::move(decl));
  }

  // Parses and checks `T[l, ...]`; returns the access and its position.
  Access access(SourcePos* pos_out = nullptr) {
    const Token& name = expect(TokenKind::Ident, "tensor name");
    if (pos_out) *pos_out = name.pos;
    const auto labels = ident_list("[", "]");
    const TensorDecl* decl = ast_.find_tensor(name.text);
    if (!decl) throw SemanticError("undeclared tensor '" + name.text + "'", name.pos);
    Access a{name.text, {}};
    for (const Token* l : labels) {
      if (!ast_.find_label(l->text)) {
        throw SemanticError("undeclared index label '" + l->text + "'", l->pos);
      }
      a.labels.push_back(l->text);
    }
    if (a.labels.size() != decl->labels.size()) {
      throw SemanticError("tensor '" + a.tensor + "' has rank " +
                              std::to_string(decl->labels.size()) + " but is accessed with " +
                              std::to_string(a.labels.size()) + " labels",
                          name.pos);
    }
    return a;
  }

  void stmt() {
    SourcePos lhs_pos;
    Access lhs = access(&lhs_pos);
    expect_punct("=");

    if (peek() && peek()->kind == TokenKind::Ident && peek()->text == "space_read" &&
        i_ + 1 < toks_.size() && toks_[i_ + 1].text == "(") {
      i_ += 2;
      const Token& file = expect(TokenKind::String, "quoted file name");
      expect_punct(")");
      expect_punct(";");
      initialized_.insert(lhs.tensor);
      ast_.stmts.emplace_back(ReadFill{std::move(lhs), file.text});
      return;
    }
    if (peek() && peek()->kind == TokenKind::Number) {
      const Token& num = toks_[i_++];
      double value = 0;
      std::string text = num.text;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || p != text.data() + text.size()) {
        throw ParseError("malformed number '" + text + "'", num.pos);
      }
      expect_punct(";");
      initialized_.insert(lhs.tensor);
      ast_.stmts.emplace_back(ConstFill{std::move(lhs), value});
      return;
    }
    if (!peek() || peek()->kind != TokenKind::Ident) {
      fail("space_read(...), a number, or a tensor product");
    }

    SourcePos p0, p1;
    Access rhs0 = access(&p0);
    expect_punct("*");
    Access rhs1 = access(&p1);
    expect_punct(";");
    for (auto [a, p] : {std::pair{&rhs0, p0}, std::pair{&rhs1, p1}}) {
      if (!initialized_.contains(a->tensor)) {
        throw SemanticError("tensor '" + a->tensor + "' is used before it is read or filled", p);
      }
      if (a->tensor == lhs.tensor) {
        throw SemanticError("output tensor '" + lhs.tensor + "' cannot also be an operand", p);
      }
    }
    try {
      classify_expr(lhs.labels, rhs0.labels, rhs1.labels);
    } catch (const SemanticError& e) {
      throw SemanticError(e.what(), lhs_pos);
    }
    initialized_.insert(lhs.tensor);
    ast_.stmts.emplace_back(Assign{std::move(lhs), std::move(rhs0), std::move(rhs1)});
  }
};

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += v[i];
  }
  return out;
}

std::string print_access(const Access& a) { return a.tensor + "[" + join(a.labels) + "]"; }

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ProgramAst parse(std::string_view source) { return Parser(source).program(); }

std::string pretty_print(const ProgramAst& ast) {
  std::ostringstream out;
  out << "def main() {\n";
  for (const auto& l : ast.labels) {
    out << "  IndexLabel [" << l.name << "] = [";
    if (l.extent) {
      out << *l.extent;
    } else {
      out << '?';
    }
    out << "];\n";
  }
  for (const auto& t : ast.tensors) {
    out << "  Tensor<double> " << t.name << "([" << join(t.labels) << "], ";
    if (const auto* name = std::get_if<std::string>(&t.format)) {
      out << *name;
    } else {
      const auto& attrs = std::get<std::vector<FormatAttr>>(t.format);
      out << '{';
      for (std::size_t i = 0; i < attrs.size(); ++i) out << (i ? ", " : "") << to_string(attrs[i]);
      out << '}';
    }
    out << ");\n";
  }
  for (const auto& s : ast.stmts) {
    out << "  ";
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, ReadFill>) {
            out << print_access(st.target) << " = space_read(" << quote(st.filename) << ");";
          } else if constexpr (std::is_same_v<T, ConstFill>) {
            out << print_access(st.target) << " = " << ingest::format_value(st.value) << ';';
          } else {
            out << print_access(st.lhs) << " = " << print_access(st.rhs0) << " * "
                << print_access(st.rhs1) << ';';
          }
        },
        s);
    out << '\n';
  }
  out << "}\n";
  return out.str();
}

}  // namespace sparta::dsl
