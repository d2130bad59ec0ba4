#include <set>

#include "dsl_lexer.hpp"
#include "hcmon/dsl.hpp"

namespace hcmon::dsl {

std::string format_location(const Span& s) {
  return std::to_string(s.line) + ":" + std::to_string(s.col);
}

namespace {

std::string with_expected(const std::string& message, const std::vector<std::string>& expected) {
  if (expected.empty()) return message;
  std::string out = message + " (expected ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += i + 1 == expected.size() ? " or " : ", ";
    out += expected[i];
  }
  return out + ")";
}

}  // namespace

ParseError::ParseError(Span span, const std::string& message, std::vector<std::string> expected)
    : LocatedError(ErrorKind::parse, format_location(span), with_expected(message, expected)),
      span_(span),
      expected_(std::move(expected)) {}

const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Or: return "or";
    case BinOp::And: return "and";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
  }
  return "?";
}

const char* to_string(Suffix s) {
  switch (s) {
    case Suffix::none: return "";
    case Suffix::s: return "s";
    case Suffix::ms: return "ms";
    case Suffix::m: return "m";
    case Suffix::mps: return "mps";
    case Suffix::mph: return "mph";
  }
  return "";
}

const char* to_string(AssertionType t) {
  switch (t) {
    case AssertionType::invariant: return "invariant";
    case AssertionType::execution: return "execution";
    case AssertionType::pre_temporal: return "pre temporal";
    case AssertionType::pre_physical: return "pre physical";
    case AssertionType::post_temporal: return "post temporal";
    case AssertionType::post_physical: return "post physical";
  }
  return "?";
}

const char* to_string(Severity s) { return s == Severity::safety ? "safety" : "performance"; }
const char* to_string(RefMode m) { return m == RefMode::first ? "first" : "all"; }

bool ast_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Number:
      if (a.number != b.number || a.suffix != b.suffix) return false;
      break;
    case Expr::Kind::Bool:
      if (a.boolean != b.boolean) return false;
      break;
    case Expr::Kind::String:
    case Expr::Kind::Name:
      if (a.text != b.text) return false;
      break;
    case Expr::Kind::Unary:
      if (a.unop != b.unop) return false;
      break;
    case Expr::Kind::Binary:
      if (a.binop != b.binop) return false;
      break;
    case Expr::Kind::Call:
      if (a.text != b.text) return false;
      break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!ast_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

namespace {

bool opt_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return ast_equal(*a, *b);
}

}  // namespace

bool ast_equal(const Document& a, const Document& b) {
  if (a.items.size() != b.items.size()) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const Item& x = a.items[i];
    const Item& y = b.items[i];
    if (x.is_const != y.is_const) return false;
    if (x.is_const) {
      if (x.constant.name != y.constant.name || !opt_equal(x.constant.value, y.constant.value)) {
        return false;
      }
      continue;
    }
    const auto& p = x.assertion;
    const auto& q = y.assertion;
    if (p.id != q.id || p.odd != q.odd || p.type != q.type || p.severity != q.severity ||
        p.mode != q.mode || p.window.has_value() != q.window.has_value()) {
      return false;
    }
    if (p.window && (p.window->value != q.window->value || p.window->suffix != q.window->suffix)) {
      return false;
    }
    if (!opt_equal(p.reference, q.reference) || !opt_equal(p.condition, q.condition)) return false;
  }
  return true;
}

namespace {

using detail::Tok;
using detail::Token;

const std::set<std::string>& reserved() {
  static const std::set<std::string> words{"and", "or", "not", "true", "false", "const", "assertion"};
  return words;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Document document() {
    Document doc;
    std::set<std::string> ids;
    std::set<std::string> consts;
    while (peek().kind != Tok::End) {
      if (is_word("const")) {
        Item item;
        item.is_const = true;
        item.constant = const_decl();
        if (!consts.insert(item.constant.name).second) {
          throw ParseError(item.constant.span, "duplicate constant '" + item.constant.name + "'");
        }
        doc.items.push_back(std::move(item));
      } else if (is_word("assertion")) {
        Item item;
        item.assertion = assertion_decl();
        if (!ids.insert(item.assertion.id).second) {
          throw ParseError(item.assertion.span, "duplicate assertion id '" + item.assertion.id + "'");
        }
        doc.items.push_back(std::move(item));
      } else {
        error_expected({"'const'", "'assertion'"});
      }
    }
    return doc;
  }

  ExprPtr lone_expression() {
    auto e = expr();
    if (peek().kind != Tok::End) error_expected({"end of input"});
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_word(const char* w, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == w;
  }

  [[noreturn]] void error_expected(std::vector<std::string> expected) {
    const Token& t = peek();
    std::string found = t.kind == Tok::Ident    ? "'" + t.text + "'"
                        : t.kind == Tok::String ? "string"
                                                : detail::describe(t.kind);
    throw ParseError(t.span, "unexpected " + found, std::move(expected));
  }

  const Token& expect(Tok k) {
    if (peek().kind != k) error_expected({detail::describe(k)});
    return next();
  }

  void expect_word(const char* w) {
    if (!is_word(w)) error_expected({std::string("'") + w + "'"});
    next();
  }

  std::string identifier(const char* what) {
    if (peek().kind != Tok::Ident || reserved().count(peek().text)) {
      error_expected({what});
    }
    return next().text;
  }

  void clause(const char* kw) {
    expect_word(kw);
    expect(Tok::Colon);
  }

  ConstDecl const_decl() {
    ConstDecl c;
    c.span = peek().span;
    next();
    c.name = identifier("constant name");
    expect(Tok::Assign);
    c.value = expr();
    c.span.end_line = c.value->span.end_line;
    c.span.end_col = c.value->span.end_col;
    return c;
  }

  Duration duration() {
    const Token& t = peek();
    if (t.kind != Tok::Number || (t.suffix != Suffix::s && t.suffix != Suffix::ms)) {
      error_expected({"duration (number with 's' or 'ms')"});
    }
    next();
    if (!(t.number > 0.0)) throw ParseError(t.span, "duration must be positive");
    return Duration{t.number, t.suffix};
  }

  AssertionType assertion_type() {
    if (is_word("invariant")) {
      next();
      return AssertionType::invariant;
    }
    if (is_word("execution")) {
      next();
      return AssertionType::execution;
    }
    const bool pre = is_word("pre");
    if (!pre && !is_word("post")) {
      error_expected({"'invariant'", "'execution'", "'pre'", "'post'"});
    }
    next();
    if (is_word("temporal")) {
      next();
      return pre ? AssertionType::pre_temporal : AssertionType::post_temporal;
    }
    if (is_word("physical")) {
      next();
      return pre ? AssertionType::pre_physical : AssertionType::post_physical;
    }
    error_expected({"'temporal'", "'physical'"});
  }

  AssertionDecl assertion_decl() {
    AssertionDecl a;
    a.span = peek().span;
    next();
    a.id = identifier("assertion id");
    expect(Tok::LBrace);

    clause("odd");
    a.odd.push_back(identifier("ODD tag"));
    while (peek().kind == Tok::Comma) {
      next();
      a.odd.push_back(identifier("ODD tag"));
    }

    clause("type");
    const Span type_span = peek().span;
    a.type = assertion_type();
    const bool temporal =
        a.type == AssertionType::pre_temporal || a.type == AssertionType::post_temporal;
    const bool physical =
        a.type == AssertionType::pre_physical || a.type == AssertionType::post_physical;

    if (is_word("window") || is_word("offset")) {
      const Token kw = peek();
      if (!temporal && !physical) {
        throw ParseError(kw.span, "'" + kw.text + "' is only valid for pre/post assertions");
      }
      next();
      expect(Tok::Colon);
      a.window = duration();
    } else if (temporal || physical) {
      throw ParseError(type_span, std::string("'") + to_string(a.type) + "' assertion needs " +
                                      (temporal ? "a window" : "an offset"),
                       {temporal ? "'window'" : "'offset'"});
    }

    if (is_word("severity")) {
      clause("severity");
      if (is_word("safety")) {
        a.severity = Severity::safety;
      } else if (is_word("performance")) {
        a.severity = Severity::performance;
      } else {
        error_expected({"'safety'", "'performance'"});
      }
      next();
    }
    if (is_word("mode")) {
      clause("mode");
      if (is_word("first")) {
        a.mode = RefMode::first;
      } else if (is_word("all")) {
        a.mode = RefMode::all;
      } else {
        error_expected({"'first'", "'all'"});
      }
      next();
    }
    if (is_word("reference")) {
      const Span rs = peek().span;
      clause("reference");
      if (a.type == AssertionType::invariant) {
        throw ParseError(rs, "invariant assertions take no reference");
      }
      a.reference = expr();
    } else if (a.type != AssertionType::invariant) {
      if (is_word("condition")) {
        throw ParseError(peek().span, std::string("'") + to_string(a.type) +
                                          "' assertion needs a reference", {"'reference'"});
      }
      error_expected({"'reference'"});
    }
    if (!is_word("condition")) {
      std::vector<std::string> expected{"'condition'"};
      if (!a.reference && a.type != AssertionType::invariant) expected.insert(expected.begin(), "'reference'");
      error_expected(expected);
    }
    clause("condition");
    a.condition = expr();
    const Token& close = expect(Tok::RBrace);
    a.span.end_line = close.span.end_line;
    a.span.end_col = close.span.end_col;
    return a;
  }

  static std::shared_ptr<Expr> make(Expr::Kind k, Span s) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->span = s;
    return e;
  }

  static Span join(const Span& a, const Span& b) { return {a.line, a.col, b.end_line, b.end_col}; }

  ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r) {
    auto e = make(Expr::Kind::Binary, join(l->span, r->span));
    e->binop = op;
    e->args = {std::move(l), std::move(r)};
    return e;
  }

  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    auto l = and_expr();
    while (is_word("or")) {
      next();
      l = binary(BinOp::Or, l, and_expr());
    }
    return l;
  }

  ExprPtr and_expr() {
    auto l = cmp_expr();
    while (is_word("and")) {
      next();
      l = binary(BinOp::And, l, cmp_expr());
    }
    return l;
  }

  static std::optional<BinOp> cmp_op(Tok k) {
    switch (k) {
      case Tok::Lt: return BinOp::Lt;
      case Tok::Le: return BinOp::Le;
      case Tok::Gt: return BinOp::Gt;
      case Tok::Ge: return BinOp::Ge;
      case Tok::EqEq: return BinOp::Eq;
      case Tok::Ne: return BinOp::Ne;
      default: return std::nullopt;
    }
  }

  ExprPtr cmp_expr() {
    auto l = add_expr();
    if (auto op = cmp_op(peek().kind)) {
      next();
      l = binary(*op, l, add_expr());
      if (cmp_op(peek().kind)) {
        throw ParseError(peek().span, "comparisons do not chain; add parentheses");
      }
    }
    return l;
  }

  ExprPtr add_expr() {
    auto l = mul_expr();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const BinOp op = next().kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      l = binary(op, l, mul_expr());
    }
    return l;
  }

  ExprPtr mul_expr() {
    auto l = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const BinOp op = next().kind == Tok::Star ? BinOp::Mul : BinOp::Div;
      l = binary(op, l, unary());
    }
    return l;
  }

  ExprPtr unary() {
    if (is_word("not") || peek().kind == Tok::Minus) {
      const Token t = next();
      if (++depth_ > kMaxDepth) throw ParseError(t.span, "expression nested too deeply");
      auto operand = unary();
      --depth_;
      auto e = make(Expr::Kind::Unary, join(t.span, operand->span));
      e->unop = t.kind == Tok::Minus ? UnOp::Neg : UnOp::Not;
      e->args = {std::move(operand)};
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Number: {
        next();
        auto e = make(Expr::Kind::Number, t.span);
        e->number = t.number;
        e->suffix = t.suffix;
        return e;
      }
      case Tok::String: {
        next();
        auto e = make(Expr::Kind::String, t.span);
        e->text = t.text;
        return e;
      }
      case Tok::LParen: {
        next();
        if (++depth_ > kMaxDepth) throw ParseError(t.span, "expression nested too deeply");
        auto inner = expr();
        --depth_;
        expect(Tok::RParen);
        return inner;
      }
      case Tok::Ident: {
        if (t.text == "true" || t.text == "false") {
          next();
          auto e = make(Expr::Kind::Bool, t.span);
          e->boolean = t.text == "true";
          return e;
        }
        if (reserved().count(t.text)) break;
        next();
        if (peek().kind == Tok::LParen) {
          next();
          auto e = make(Expr::Kind::Call, t.span);
          e->text = t.text;
          if (peek().kind != Tok::RParen) {
            if (++depth_ > kMaxDepth) throw ParseError(t.span, "expression nested too deeply");
            e->args.push_back(expr());
            while (peek().kind == Tok::Comma) {
              next();
              e->args.push_back(expr());
            }
            --depth_;
          }
          if (peek().kind != Tok::RParen) error_expected({"','", "')'"});
          const Token& close = next();
          e->span = join(t.span, close.span);
          return e;
        }
        auto e = make(Expr::Kind::Name, t.span);
        e->text = t.text;
        return e;
      }
      default: break;
    }
    error_expected({"number", "string", "identifier", "'('", "'not'", "'-'"});
  }

  static constexpr int kMaxDepth = 200;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

Document parse(std::string_view text) { return Parser(detail::lex(text)).document(); }

ExprPtr parse_expression(std::string_view text) {
  return Parser(detail::lex(text)).lone_expression();
}

}  // namespace hcmon::dsl
