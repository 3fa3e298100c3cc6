#include <cctype>
#include <charconv>

#include "rbmltt/syntax.hpp"

namespace rbm {

ParseError::ParseError(const std::string& msg, SourceSpan where, std::vector<std::string> expect)
    : std::runtime_error(msg), span(std::move(where)), expected(std::move(expect)) {}

namespace {

enum class Tok : std::uint8_t { Ident, Number, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
};

std::vector<Token> lex(std::string_view src, const std::string& file) {
  std::vector<Token> out;
  std::uint32_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;  // count code points, not bytes
      }
      ++i;
    }
  };
  static const char* kSyms[] = {":=", "->", "=>", "(", ")", "[", "]", "{", "}", ":", ",", ";", "*", "+", "@", "<"};
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (src.substr(i, 2) == "--") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.span.file = file;
    t.span.line = line;
    t.span.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      bool matched = false;
      for (const char* s : kSyms) {
        std::string_view sv(s);
        if (src.substr(i, sv.size()) == sv) {
          t.kind = Tok::Sym;
          t.text = std::string(sv);
          advance(sv.size());
          matched = true;
          break;
        }
      }
      if (!matched) {
        SourceSpan sp = t.span;
        sp.end_line = line;
        sp.end_col = col + 1;
        throw ParseError("unexpected character '" + std::string(1, c) + "'", sp);
      }
    }
    t.span.end_line = line;
    t.span.end_col = col;
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.span.file = file;
  end.span.line = end.span.end_line = line;
  end.span.col = end.span.end_col = col;
  out.push_back(end);
  return out;
}

bool is_reserved(const std::string& s) {
  static const char* kWords[] = {"def", "fun", "natrec", "vecrec", "jelim", "U", "Box", "box"};
  for (const char* w : kWords)
    if (s == w) return true;
  return false;
}

SourceSpan join_span(const SourceSpan& a, const SourceSpan& b) {
  SourceSpan s = a;
  s.end_line = b.end_line;
  s.end_col = b.end_col;
  return s;
}

class Parser {
 public:
  Parser(std::string_view src, const std::string& file) : toks_(lex(src, file)) {}

  std::vector<SurfaceDecl> program() {
    std::vector<SurfaceDecl> decls;
    while (!at_end()) decls.push_back(decl());
    return decls;
  }

  SExprPtr whole_expr() {
    SExprPtr e = expr();
    expect_end();
    return e;
  }

  SBoundPtr whole_bound() {
    SBoundPtr b = bound();
    expect_end();
    return b;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_sym(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
  bool is_word(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == s; }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  const Token& last() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }

  [[noreturn]] void error(const std::vector<std::string>& expected) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    std::string msg = "unexpected " + found + ", expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? (i + 1 == expected.size() ? " or " : ", ") : "") + expected[i];
    throw ParseError(msg, t.span, expected);
  }

  void expect_sym(const char* s) {
    if (!is_sym(s)) error({std::string("'") + s + "'"});
    take();
  }
  void expect_word(const char* s) {
    if (!is_word(s)) error({std::string("'") + s + "'"});
    take();
  }
  void expect_end() {
    if (!at_end()) error({"end of input"});
  }

  std::string ident() {
    if (peek().kind != Tok::Ident || is_reserved(peek().text)) error({"identifier"});
    return take().text;
  }

  std::uint64_t number() {
    if (peek().kind != Tok::Number) error({"number"});
    const Token& t = take();
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{}) throw ParseError("numeral out of range", t.span);
    return v;
  }

  ExtNat grade() {
    expect_sym("[");
    ExtNat g;
    if (is_word("inf")) {
      take();
      g = ExtNat::inf();
    } else {
      g = ExtNat{number()};
    }
    expect_sym("]");
    return g;
  }

  std::shared_ptr<SExpr> node(SKind k, const SourceSpan& start) {
    auto e = std::make_shared<SExpr>();
    e->kind = k;
    e->span = start;
    return e;
  }

  SExprPtr finish(std::shared_ptr<SExpr> e) {
    e->span = join_span(e->span, last().span);
    return e;
  }

  SurfaceDecl decl() {
    SurfaceDecl d;
    d.span = peek().span;
    if (is_sym("@")) {
      take();
      expect_word("expect_bound");
      expect_sym("(");
      d.expect_bound = bound();
      expect_sym(")");
    }
    expect_word("def");
    d.name = ident();
    expect_sym(":");
    d.type = expr();
    expect_sym(":=");
    d.body = expr();
    d.span = join_span(d.span, last().span);
    return d;
  }

  // expr := 'fun' ids '=>' expr | arrow
  SExprPtr expr() {
    if (is_word("fun")) {
      auto e = node(SKind::Lam, take().span);
      do e->binders.push_back(binder_name());
      while (!is_sym("=>"));
      expect_sym("=>");
      e->kids.push_back(expr());
      return finish(e);
    }
    return arrow();
  }

  std::string binder_name() {
    if (is_word("_")) return take().text;
    return ident();
  }

  // Dependent binder group `(x : A)` directly followed by `->` or `*`.
  bool at_binder_group() const {
    return is_sym("(") && peek(1).kind == Tok::Ident && is_sym(":", 2);
  }

  SExprPtr arrow() {
    SourceSpan start = peek().span;
    SExprPtr lhs;
    if (at_binder_group()) {
      std::size_t save = pos_;
      take();
      std::string x = binder_name();
      expect_sym(":");
      SExprPtr dom = expr();
      expect_sym(")");
      if (is_sym("->")) return finish_pi(start, x, dom);
      if (is_sym("*")) {
        take();
        auto e = node(SKind::Sigma, start);
        e->binders = {x};
        e->kids = {dom, prod()};
        return finish(e);
      }
      // Plain ascription of a name; reparse as an ordinary operand.
      pos_ = save;
    }
    lhs = prod();
    if (is_sym("->")) return finish_pi(start, "_", lhs);
    return lhs;
  }

  SExprPtr finish_pi(const SourceSpan& start, const std::string& x, SExprPtr dom) {
    expect_sym("->");
    auto e = node(SKind::Pi, start);
    e->binders = {x};
    if (is_sym("[")) {
      take();
      e->bound = bound();
      expect_sym("]");
    }
    e->kids = {std::move(dom), expr()};
    return finish(e);
  }

  // prod := app ['*' prod]
  SExprPtr prod() {
    SourceSpan start = peek().span;
    SExprPtr lhs = app();
    if (is_sym("*")) {
      take();
      auto e = node(SKind::Sigma, start);
      e->binders = {"_"};
      e->kids = {lhs, prod()};
      return finish(e);
    }
    return lhs;
  }

  bool starts_atom() const {
    const Token& t = peek();
    if (t.kind == Tok::Number) return true;
    if (t.kind == Tok::Ident) {
      if (t.text == "def" || t.text == "fun") return false;
      return true;
    }
    return is_sym("(") || is_sym("[");
  }

  SExprPtr app() {
    SourceSpan start = peek().span;
    SExprPtr head;
    if (is_word("natrec") || is_word("vecrec") || is_word("jelim")) head = eliminator();
    else if (is_word("Box") || is_word("box")) head = boxed();
    else head = atom();
    while (starts_atom() && !is_word("natrec") && !is_word("vecrec") && !is_word("jelim") && !is_word("Box") &&
           !is_word("box")) {
      auto e = node(SKind::App, start);
      e->kids = {head, atom()};
      head = finish(e);
    }
    return head;
  }

  SExprPtr boxed() {
    SourceSpan start = peek().span;
    bool type = take().text == "Box";
    auto e = node(type ? SKind::BoxType : SKind::BoxIntro, start);
    e->grade = grade();
    e->kids = {atom()};
    return finish(e);
  }

  std::vector<std::string> names_until(const char* stop) {
    std::vector<std::string> out;
    while (!is_sym(stop)) out.push_back(binder_name());
    return out;
  }

  SExprPtr eliminator() {
    SourceSpan start = peek().span;
    std::string kw = take().text;
    if (kw == "jelim") {
      auto e = node(SKind::JElim, start);
      e->kids = {atom(), atom(), atom()};
      return finish(e);
    }
    bool nat = kw == "natrec";
    auto e = node(nat ? SKind::NatRec : SKind::VecRec, start);
    SExprPtr motive = atom();
    SExprPtr scrut = atom();
    expect_sym("{");
    expect_word(nat ? "zero" : "nil");
    expect_sym("=>");
    SExprPtr base = expr();
    expect_sym(";");
    expect_word(nat ? "succ" : "cons");
    std::vector<std::string> names = names_until("=>");
    std::size_t want = nat ? 2 : 4;
    if (names.size() != want)
      throw ParseError(std::string(nat ? "succ" : "cons") + " branch binds " + std::to_string(want) +
                           " names, got " + std::to_string(names.size()),
                       peek().span, {"=>"});
    expect_sym("=>");
    SExprPtr step = expr();
    if (is_sym(";")) take();
    expect_sym("}");
    e->kids = {motive, scrut, base, step};
    e->case_binders = {{}, names};
    return finish(e);
  }

  SExprPtr atom() {
    const Token& t = peek();
    SourceSpan start = t.span;
    if (t.kind == Tok::Number) {
      auto e = node(SKind::Num, start);
      e->num = number();
      return finish(e);
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "U") {
        take();
        auto e = node(SKind::Universe, start);
        if (is_sym("[")) e->grade = grade();
        return finish(e);
      }
      if (t.text == "natrec" || t.text == "vecrec" || t.text == "jelim" || t.text == "Box" || t.text == "box") {
        error({"'('"});
      }
      auto e = node(SKind::Name, start);
      e->name = ident();
      return finish(e);
    }
    if (is_sym("[")) {
      take();
      auto e = node(SKind::VecLit, start);
      if (!is_sym("]")) {
        e->kids.push_back(expr());
        while (is_sym(",")) {
          take();
          e->kids.push_back(expr());
        }
      }
      expect_sym("]");
      return finish(e);
    }
    if (is_sym("(")) {
      take();
      SExprPtr inner = expr();
      if (is_sym(",")) {
        take();
        auto e = node(SKind::Pair, start);
        e->kids = {inner, expr()};
        expect_sym(")");
        return finish(e);
      }
      if (is_sym(":")) {
        take();
        auto e = node(SKind::Ann, start);
        e->kids = {inner, expr()};
        expect_sym(")");
        return finish(e);
      }
      if (!is_sym(")")) error({"')'", "','", "':'"});
      take();
      return inner;
    }
    error({"term"});
  }

  // ------------------------------------------------------------------ bounds

  std::shared_ptr<SBound> bnode(SBKind k, const SourceSpan& s) {
    auto b = std::make_shared<SBound>();
    b->kind = k;
    b->span = s;
    return b;
  }

  SBoundPtr bound() {
    SourceSpan start = peek().span;
    SBoundPtr lhs = bterm();
    while (is_sym("+")) {
      take();
      auto b = bnode(SBKind::Plus, start);
      b->a = lhs;
      b->b = bterm();
      lhs = b;
    }
    return lhs;
  }

  SBoundPtr bterm() {
    SourceSpan start = peek().span;
    SBoundPtr lhs = bfactor();
    while (is_sym("*")) {
      take();
      SBoundPtr rhs = bfactor();
      if (lhs->kind == SBKind::Num) {
        auto b = bnode(SBKind::Scale, start);
        b->num = lhs->num;
        b->a = rhs;
        lhs = b;
      } else {
        auto b = bnode(SBKind::Fold, start);
        b->a = lhs;
        b->b = rhs;
        lhs = b;
      }
    }
    return lhs;
  }

  SBoundPtr bfactor() {
    const Token& t = peek();
    SourceSpan start = t.span;
    if (t.kind == Tok::Number) {
      auto b = bnode(SBKind::Num, start);
      b->num = number();
      return b;
    }
    if (is_sym("(")) {
      take();
      SBoundPtr inner = bound();
      expect_sym(")");
      return inner;
    }
    if (t.kind != Tok::Ident) error({"bound expression"});
    std::string w = t.text;
    if (w == "inf") {
      take();
      return bnode(SBKind::Inf, start);
    }
    bool call = is_sym("(", 1);
    if (call && (w == "max" || w == "fold")) {
      take();
      take();
      auto b = bnode(w == "max" ? SBKind::Join : SBKind::Fold, start);
      b->a = bound();
      expect_sym(",");
      b->b = bound();
      expect_sym(")");
      return b;
    }
    if (call && w == "log2") {
      take();
      take();
      auto b = bnode(SBKind::Log, start);
      b->a = bound();
      expect_sym(")");
      return b;
    }
    if (call && w == "sum") {
      take();
      take();
      auto b = bnode(SBKind::Sum, start);
      b->name = ident();
      expect_sym("<");
      b->a = bound();
      expect_sym(",");
      b->b = bound();
      expect_sym(")");
      return b;
    }
    if (call && w == "at") {
      take();
      take();
      auto b = bnode(SBKind::At, start);
      b->name = ident();
      expect_sym("=>");
      b->a = bound();
      expect_sym(",");
      b->term = expr();
      expect_sym(")");
      return b;
    }
    auto b = bnode(SBKind::Name, start);
    b->name = ident();
    return b;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<SurfaceDecl> parse_program(std::string_view text, const std::string& file) {
  return Parser(text, file).program();
}

SExprPtr parse_expr(std::string_view text, const std::string& file) { return Parser(text, file).whole_expr(); }

SBoundPtr parse_surface_bound(std::string_view text, const std::string& file) {
  return Parser(text, file).whole_bound();
}

}  // namespace rbm
