#pragma once

// SMT-LIB2 reader for the QF_LIA / QF_IDL / QF_NIA subset. Produces a
// let-free assertion tree plus the declared signature.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lsia/ast.hpp"
#include "lsia/integer.hpp"

namespace lsia {

enum class ParseErrorKind : std::uint8_t {
  MalformedSexp,
  UnsupportedConstruct,
  SortMismatch,
  UndeclaredSymbol,
  DuplicateSymbol,
  NumericOverflow,
};

inline const char* to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::MalformedSexp: return "malformed-sexp";
    case ParseErrorKind::UnsupportedConstruct: return "unsupported-construct";
    case ParseErrorKind::SortMismatch: return "sort-mismatch";
    case ParseErrorKind::UndeclaredSymbol: return "undeclared-symbol";
    case ParseErrorKind::DuplicateSymbol: return "duplicate-symbol";
    case ParseErrorKind::NumericOverflow: return "numeric-overflow";
  }
  return "?";
}

struct SourcePos {
  std::uint32_t line = 1;
  std::uint32_t column = 1;
};

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, SourcePos pos, std::string token, const std::string& message)
      : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
              to_string(kind) + ": " + message + (token.empty() ? "" : " '" + token + "'")),
        kind_(kind),
        pos_(pos),
        token_(std::move(token)) {}

  ParseErrorKind kind() const { return kind_; }
  SourcePos position() const { return pos_; }
  std::uint32_t line() const { return pos_.line; }
  std::uint32_t column() const { return pos_.column; }
  const std::string& token() const { return token_; }

 private:
  ParseErrorKind kind_;
  SourcePos pos_;
  std::string token_;
};

struct SExpr {
  enum class Kind : std::uint8_t { Symbol, Numeral, Decimal, String, Keyword, List };
  Kind kind = Kind::List;
  std::string text;
  SourcePos pos;
  std::vector<SExpr> items;

  bool is_list() const { return kind == Kind::List; }
  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
};

namespace detail {

class SExprReader {
 public:
  explicit SExprReader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    for (;;) {
      skip_ws();
      if (at_end()) break;
      out.push_back(read());
    }
    return out;
  }

 private:
  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }

  void advance() {
    if (text_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  void skip_ws() {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  static bool is_symbol_char(char c) {
    if (std::isalnum(static_cast<unsigned char>(c))) return true;
    return std::string_view("~!@$%^&*_-+=<>.?/").find(c) != std::string_view::npos;
  }

  SExpr read() {
    SourcePos start = pos_;
    char c = peek();
    if (c == '(') {
      advance();
      SExpr list;
      list.kind = SExpr::Kind::List;
      list.pos = start;
      for (;;) {
        skip_ws();
        if (at_end())
          throw ParseError(ParseErrorKind::MalformedSexp, start, "(", "unbalanced parenthesis");
        if (peek() == ')') {
          advance();
          return list;
        }
        list.items.push_back(read());
      }
    }
    if (c == ')')
      throw ParseError(ParseErrorKind::MalformedSexp, start, ")", "unexpected closing parenthesis");
    SExpr atom;
    atom.pos = start;
    if (c == '"') {
      advance();
      std::string s;
      for (;;) {
        if (at_end())
          throw ParseError(ParseErrorKind::MalformedSexp, start, "\"", "unterminated string");
        if (peek() == '"') {
          advance();
          if (!at_end() && peek() == '"') {
            s.push_back('"');
            advance();
            continue;
          }
          break;
        }
        s.push_back(peek());
        advance();
      }
      atom.kind = SExpr::Kind::String;
      atom.text = std::move(s);
      return atom;
    }
    if (c == '|') {
      advance();
      std::string s;
      while (!at_end() && peek() != '|') {
        s.push_back(peek());
        advance();
      }
      if (at_end())
        throw ParseError(ParseErrorKind::MalformedSexp, start, "|", "unterminated quoted symbol");
      advance();
      atom.kind = SExpr::Kind::Symbol;
      atom.text = std::move(s);
      return atom;
    }
    std::string s;
    bool keyword = false;
    if (c == ':') {
      keyword = true;
      s.push_back(c);
      advance();
    }
    while (!at_end() && is_symbol_char(peek())) {
      s.push_back(peek());
      advance();
    }
    if (s.empty() || (keyword && s.size() == 1)) {
      throw ParseError(ParseErrorKind::MalformedSexp, start, std::string(1, c),
                       "unexpected character");
    }
    atom.text = s;
    if (keyword) {
      atom.kind = SExpr::Kind::Keyword;
    } else if (std::isdigit(static_cast<unsigned char>(s[0]))) {
      auto dot = s.find('.');
      bool ok = std::all_of(s.begin(), s.end(), [](char ch) {
        return std::isdigit(static_cast<unsigned char>(ch)) || ch == '.';
      });
      if (!ok || (dot != std::string::npos && s.find('.', dot + 1) != std::string::npos) ||
          s.back() == '.')
        throw ParseError(ParseErrorKind::MalformedSexp, start, s, "malformed numeral");
      atom.kind = dot == std::string::npos ? SExpr::Kind::Numeral : SExpr::Kind::Decimal;
    } else {
      atom.kind = SExpr::Kind::Symbol;
    }
    return atom;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

}  // namespace detail

inline std::vector<SExpr> read_sexprs(std::string_view text) {
  return detail::SExprReader(text).read_all();
}

/// Result of parsing a script.
struct Script {
  AstPtr assertion;  // conjunction of all asserts
  std::vector<std::string> bool_names;
  std::vector<std::string> int_names;
  std::string logic;
  std::vector<std::string> warnings;
};

namespace detail {

struct Typed {
  AstPtr node;
  Sort sort;
};

class Elaborator {
 public:
  Script run(const std::vector<SExpr>& commands) {
    std::vector<AstPtr> asserts;
    for (const auto& cmd : commands) {
      if (!cmd.is_list() || cmd.items.empty() || cmd.items[0].kind != SExpr::Kind::Symbol)
        throw ParseError(ParseErrorKind::MalformedSexp, cmd.pos, cmd.text, "expected a command");
      const auto& name = cmd.items[0].text;
      if (name == "set-logic") {
        expect_arity(cmd, 2);
        script_.logic = cmd.items[1].text;
        if (script_.logic != "QF_LIA" && script_.logic != "QF_IDL" && script_.logic != "QF_NIA") {
          script_.warnings.push_back("logic " + script_.logic +
                                     " is outside QF_LIA/QF_IDL/QF_NIA; continuing");
        }
      } else if (name == "set-info" || name == "set-option" || name == "check-sat" ||
                 name == "get-model" || name == "exit") {
        // no effect on the formula
      } else if (name == "declare-const") {
        expect_arity(cmd, 3);
        declare(cmd.items[1], parse_sort(cmd.items[2]));
      } else if (name == "declare-fun") {
        expect_arity(cmd, 4);
        if (!cmd.items[2].is_list() || !cmd.items[2].items.empty())
          throw ParseError(ParseErrorKind::UnsupportedConstruct, cmd.items[2].pos,
                           cmd.items[1].text, "only 0-arity functions are supported");
        declare(cmd.items[1], parse_sort(cmd.items[3]));
      } else if (name == "define-fun") {
        expect_arity(cmd, 5);
        if (!cmd.items[2].is_list() || !cmd.items[2].items.empty())
          throw ParseError(ParseErrorKind::UnsupportedConstruct, cmd.items[2].pos,
                           cmd.items[1].text, "only 0-parameter definitions are supported");
        Sort s = parse_sort(cmd.items[3]);
        Typed body = term(cmd.items[4]);
        if (body.sort != s)
          throw ParseError(ParseErrorKind::SortMismatch, cmd.items[4].pos, cmd.items[1].text,
                           "definition body does not match declared sort");
        check_fresh(cmd.items[1]);
        macros_[cmd.items[1].text] = body;
      } else if (name == "assert") {
        expect_arity(cmd, 2);
        Typed t = term(cmd.items[1]);
        if (t.sort != Sort::Bool)
          throw ParseError(ParseErrorKind::SortMismatch, cmd.items[1].pos, cmd.items[1].text,
                           "assertion is not Boolean");
        asserts.push_back(t.node);
      } else {
        throw ParseError(ParseErrorKind::UnsupportedConstruct, cmd.items[0].pos, name,
                         "unsupported command");
      }
    }
    if (asserts.empty()) {
      script_.assertion = ast::bool_const(true);
    } else if (asserts.size() == 1) {
      script_.assertion = asserts[0];
    } else {
      script_.assertion = ast::make(AstKind::And, std::move(asserts));
    }
    return std::move(script_);
  }

 private:
  static void expect_arity(const SExpr& cmd, std::size_t n) {
    if (cmd.items.size() != n)
      throw ParseError(ParseErrorKind::MalformedSexp, cmd.items[0].pos, cmd.items[0].text,
                       "wrong number of arguments");
  }

  static Sort parse_sort(const SExpr& s) {
    if (s.is_symbol("Int")) return Sort::Int;
    if (s.is_symbol("Bool")) return Sort::Bool;
    std::string text = s.is_list() && !s.items.empty() ? s.items[0].text : s.text;
    throw ParseError(ParseErrorKind::UnsupportedConstruct, s.pos, text, "unsupported sort");
  }

  void check_fresh(const SExpr& sym) {
    if (sym.kind != SExpr::Kind::Symbol)
      throw ParseError(ParseErrorKind::MalformedSexp, sym.pos, sym.text, "expected a symbol");
    if (vars_.count(sym.text) || macros_.count(sym.text))
      throw ParseError(ParseErrorKind::DuplicateSymbol, sym.pos, sym.text, "symbol redeclared");
  }

  void declare(const SExpr& sym, Sort sort) {
    check_fresh(sym);
    AstPtr node;
    if (sort == Sort::Bool) {
      node = ast::bool_var(static_cast<std::uint32_t>(script_.bool_names.size()));
      script_.bool_names.push_back(sym.text);
    } else {
      node = ast::int_var(static_cast<std::uint32_t>(script_.int_names.size()));
      script_.int_names.push_back(sym.text);
    }
    vars_[sym.text] = Typed{node, sort};
  }

  static Int parse_numeral(const SExpr& e) {
    Int v = 0;
    auto [ptr, ec] = std::from_chars(e.text.data(), e.text.data() + e.text.size(), v);
    if (ec != std::errc() || ptr != e.text.data() + e.text.size())
      throw ParseError(ParseErrorKind::NumericOverflow, e.pos, e.text, "numeral too large");
    return v;
  }

  static Rational parse_decimal(const SExpr& e) {
    auto dot = e.text.find('.');
    std::string digits = e.text.substr(0, dot) + e.text.substr(dot + 1);
    try {
      SExpr tmp = e;
      tmp.text = digits;
      Int num = parse_numeral(tmp);
      Int den = checked::pow(10, static_cast<unsigned>(e.text.size() - dot - 1));
      return Rational(num, den);
    } catch (const NumericOverflow&) {
      throw ParseError(ParseErrorKind::NumericOverflow, e.pos, e.text, "decimal too large");
    }
  }

  Typed lookup(const SExpr& e) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(e.text);
      if (f != it->end()) return f->second;
    }
    if (auto m = macros_.find(e.text); m != macros_.end()) return m->second;
    if (auto v = vars_.find(e.text); v != vars_.end()) return v->second;
    if (e.text == "true") return {ast::bool_const(true), Sort::Bool};
    if (e.text == "false") return {ast::bool_const(false), Sort::Bool};
    throw ParseError(ParseErrorKind::UndeclaredSymbol, e.pos, e.text, "undeclared symbol");
  }

  static bool is_unsupported_head(const std::string& h) {
    static const char* const names[] = {
        "ite",     "div",       "mod",    "abs",    "forall", "exists", "select", "store",
        "to_real", "to_int",    "is_int", "concat", "extract", "match", "divisible",
        "bvadd",   "bvmul",     "bvand",  "bvor",   "bvnot",  "bvneg", "bvult",  "bvule",
        "bvslt",   "bvsle",     "bvsub",  "bvshl",  "bvlshr", "bvudiv", "bvurem"};
    for (const char* n : names)
      if (h == n) return true;
    return false;
  }

  Typed expect_sort(const SExpr& e, Sort s) {
    Typed t = term(e);
    if (t.sort != s)
      throw ParseError(ParseErrorKind::SortMismatch, e.pos, e.is_list() ? "(" : e.text,
                       s == Sort::Int ? "expected an Int term" : "expected a Bool term");
    return t;
  }

  std::vector<AstPtr> args_of_sort(const SExpr& e, Sort s, std::size_t min_args) {
    if (e.items.size() - 1 < min_args)
      throw ParseError(ParseErrorKind::MalformedSexp, e.items[0].pos, e.items[0].text,
                       "too few arguments");
    std::vector<AstPtr> out;
    for (std::size_t i = 1; i < e.items.size(); ++i) out.push_back(expect_sort(e.items[i], s).node);
    return out;
  }

  // Constant value of a term built only from numerals, decimals, - and /.
  static std::optional<Rational> constant_value(const AstPtr& n) {
    if (n->kind == AstKind::IntConst) return n->value;
    if (n->kind == AstKind::Neg) {
      auto v = constant_value(n->children[0]);
      if (v) return -*v;
    }
    return std::nullopt;
  }

  Typed term(const SExpr& e) {
    switch (e.kind) {
      case SExpr::Kind::Numeral:
        return {ast::int_const(parse_numeral(e)), Sort::Int};
      case SExpr::Kind::Decimal:
        return {ast::int_const(parse_decimal(e)), Sort::Int};
      case SExpr::Kind::Symbol:
        return lookup(e);
      case SExpr::Kind::String:
      case SExpr::Kind::Keyword:
        throw ParseError(ParseErrorKind::MalformedSexp, e.pos, e.text, "unexpected token in term");
      case SExpr::Kind::List:
        break;
    }
    if (e.items.empty())
      throw ParseError(ParseErrorKind::MalformedSexp, e.pos, "(", "empty application");
    const SExpr& head = e.items[0];
    if (head.is_list()) {
      std::string tok = head.items.empty() ? "(" : head.items[0].text;
      throw ParseError(ParseErrorKind::UnsupportedConstruct, head.pos, tok,
                       "indexed or higher-order application");
    }
    const std::string& h = head.text;
    if (head.kind != SExpr::Kind::Symbol)
      throw ParseError(ParseErrorKind::MalformedSexp, head.pos, h, "expected a function symbol");

    if (h == "let") return let(e);
    if (h == "!") {
      if (e.items.size() < 2)
        throw ParseError(ParseErrorKind::MalformedSexp, head.pos, h, "empty annotation");
      return term(e.items[1]);
    }
    if (h == "not") {
      if (e.items.size() != 2)
        throw ParseError(ParseErrorKind::MalformedSexp, head.pos, h, "not takes one argument");
      return {ast::negate(expect_sort(e.items[1], Sort::Bool).node), Sort::Bool};
    }
    if (h == "and" || h == "or") {
      auto args = args_of_sort(e, Sort::Bool, 0);
      if (args.empty()) return {ast::bool_const(h == "and"), Sort::Bool};
      if (args.size() == 1) return {args[0], Sort::Bool};
      return {ast::make(h == "and" ? AstKind::And : AstKind::Or, std::move(args)), Sort::Bool};
    }
    if (h == "=>") {
      auto args = args_of_sort(e, Sort::Bool, 2);
      AstPtr acc = args.back();
      for (std::size_t i = args.size() - 1; i-- > 0;)
        acc = ast::make(AstKind::Implies, {args[i], acc});
      return {acc, Sort::Bool};
    }
    if (h == "xor") {
      auto args = args_of_sort(e, Sort::Bool, 2);
      AstPtr acc = args[0];
      for (std::size_t i = 1; i < args.size(); ++i)
        acc = ast::negate(ast::make(AstKind::Iff, {acc, args[i]}));
      return {acc, Sort::Bool};
    }
    if (h == "=" || h == "distinct") {
      if (e.items.size() < 3)
        throw ParseError(ParseErrorKind::MalformedSexp, head.pos, h, "too few arguments");
      std::vector<Typed> args;
      for (std::size_t i = 1; i < e.items.size(); ++i) {
        args.push_back(term(e.items[i]));
        if (args.back().sort != args[0].sort)
          throw ParseError(ParseErrorKind::SortMismatch, e.items[i].pos,
                           e.items[i].is_list() ? "(" : e.items[i].text,
                           "arguments have different sorts");
      }
      return h == "=" ? equality(args) : distinct(args);
    }
    if (h == "<=" || h == "<" || h == ">=" || h == ">") {
      auto args = args_of_sort(e, Sort::Int, 2);
      CmpOp op = h == "<=" ? CmpOp::LE : h == "<" ? CmpOp::LT : h == ">=" ? CmpOp::GE : CmpOp::GT;
      std::vector<AstPtr> chain;
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        chain.push_back(ast::cmp(op, args[i], args[i + 1]));
      return {conj(std::move(chain)), Sort::Bool};
    }
    if (h == "+" || h == "*") {
      auto args = args_of_sort(e, Sort::Int, 1);
      if (args.size() == 1) return {args[0], Sort::Int};
      return {ast::make(h == "+" ? AstKind::Add : AstKind::Mul, std::move(args)), Sort::Int};
    }
    if (h == "-") {
      auto args = args_of_sort(e, Sort::Int, 1);
      if (args.size() == 1) {
        if (args[0]->kind == AstKind::IntConst) return {ast::int_const(-args[0]->value), Sort::Int};
        return {ast::make(AstKind::Neg, std::move(args)), Sort::Int};
      }
      return {ast::make(AstKind::Sub, std::move(args)), Sort::Int};
    }
    if (h == "/") {
      auto args = args_of_sort(e, Sort::Int, 2);
      Rational acc;
      for (std::size_t i = 0; i < args.size(); ++i) {
        auto v = constant_value(args[i]);
        if (!v)
          throw ParseError(ParseErrorKind::UnsupportedConstruct, head.pos, h,
                           "division is only supported between constants");
        if (i == 0) {
          acc = *v;
        } else {
          if (v->is_zero())
            throw ParseError(ParseErrorKind::UnsupportedConstruct, e.items[i + 1].pos,
                             e.items[i + 1].text, "division by zero");
          acc = acc * Rational(v->den, v->num);
        }
      }
      return {ast::int_const(acc), Sort::Int};
    }
    if (is_unsupported_head(h) || h.rfind("bv", 0) == 0)
      throw ParseError(ParseErrorKind::UnsupportedConstruct, head.pos, h, "unsupported operator");
    // A declared constant applied to arguments, or an unknown function.
    bool known = vars_.count(h) || macros_.count(h);
    for (const auto& s : scopes_) known = known || s.count(h);
    if (known)
      throw ParseError(ParseErrorKind::UnsupportedConstruct, head.pos, h,
                       "application of a 0-arity symbol");
    throw ParseError(ParseErrorKind::UndeclaredSymbol, head.pos, h, "undeclared function");
  }

  static AstPtr conj(std::vector<AstPtr> parts) {
    if (parts.size() == 1) return parts[0];
    return ast::make(AstKind::And, std::move(parts));
  }

  static Typed equality(const std::vector<Typed>& args) {
    std::vector<AstPtr> chain;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[0].sort == Sort::Bool) {
        chain.push_back(ast::make(AstKind::Iff, {args[i].node, args[i + 1].node}));
      } else {
        chain.push_back(ast::cmp(CmpOp::EQ, args[i].node, args[i + 1].node));
      }
    }
    return {conj(std::move(chain)), Sort::Bool};
  }

  static Typed distinct(const std::vector<Typed>& args) {
    if (args[0].sort == Sort::Int) {
      std::vector<AstPtr> nodes;
      for (const auto& a : args) nodes.push_back(a.node);
      return {ast::make(AstKind::Distinct, std::move(nodes)), Sort::Bool};
    }
    std::vector<AstPtr> parts;
    for (std::size_t i = 0; i < args.size(); ++i)
      for (std::size_t j = i + 1; j < args.size(); ++j)
        parts.push_back(ast::negate(ast::make(AstKind::Iff, {args[i].node, args[j].node})));
    return {conj(std::move(parts)), Sort::Bool};
  }

  Typed let(const SExpr& e) {
    if (e.items.size() != 3 || !e.items[1].is_list())
      throw ParseError(ParseErrorKind::MalformedSexp, e.items[0].pos, "let", "malformed let");
    std::map<std::string, Typed> bindings;
    for (const auto& b : e.items[1].items) {
      if (!b.is_list() || b.items.size() != 2 || b.items[0].kind != SExpr::Kind::Symbol)
        throw ParseError(ParseErrorKind::MalformedSexp, b.pos, "let", "malformed let binding");
      bindings[b.items[0].text] = term(b.items[1]);  // parallel: outer scope only
    }
    scopes_.push_back(std::move(bindings));
    Typed body = term(e.items[2]);
    scopes_.pop_back();
    return body;
  }

  Script script_;
  std::map<std::string, Typed> vars_;
  std::map<std::string, Typed> macros_;
  std::vector<std::map<std::string, Typed>> scopes_;
};

}  // namespace detail

inline Script parse_script(std::string_view text) {
  return detail::Elaborator().run(read_sexprs(text));
}

}  // namespace lsia
