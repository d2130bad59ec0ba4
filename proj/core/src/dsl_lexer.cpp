#include "dsl_lexer.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace hcmon::dsl::detail {

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Assign: return "'='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::Ne: return "'!='";
    case Tok::End: return "end of input";
  }
  return "token";
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.span.line = line_;
      t.span.col = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        t.span.end_line = line_;
        t.span.end_col = col_;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (ident_start(c)) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (digit(c)) {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_punct(t);
      }
      t.span.end_line = line_;
      t.span.end_col = col_;
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    Span s{line_, col_, line_, col_ + 1};
    throw ParseError(s, msg);
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& t) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && digit(src_[pos_])) advance();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && digit(src_[pos_ + 1])) {
      advance();
      while (pos_ < src_.size() && digit(src_[pos_])) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && digit(src_[look])) {
        while (pos_ < look) advance();
        while (pos_ < src_.size() && digit(src_[pos_])) advance();
      }
    }
    const std::string_view digits = src_.substr(start, pos_ - start);
    double v = 0.0;
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (res.ec != std::errc() || !std::isfinite(v)) fail("numeric literal out of range");
    t.kind = Tok::Number;
    t.number = v;

    std::size_t sstart = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
    const std::string_view suf = src_.substr(sstart, pos_ - sstart);
    if (suf.empty()) {
      t.suffix = Suffix::none;
    } else if (suf == "s") {
      t.suffix = Suffix::s;
    } else if (suf == "ms") {
      t.suffix = Suffix::ms;
    } else if (suf == "m") {
      t.suffix = Suffix::m;
    } else if (suf == "mps") {
      t.suffix = Suffix::mps;
    } else if (suf == "mph") {
      t.suffix = Suffix::mph;
    } else {
      throw ParseError(Span{t.span.line, t.span.col, line_, col_},
                       "unknown unit suffix '" + std::string(suf) + "'",
                       {"s", "ms", "m", "mps", "mph"});
    }
  }

  void lex_string(Token& t) {
    advance();
    std::string out;
    for (;;) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') fail("unterminated string literal");
      const char c = src_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) fail("unterminated string literal");
        const char e = src_[pos_];
        if (e != '"' && e != '\\') fail("unknown escape sequence");
        out.push_back(e);
        advance();
        continue;
      }
      out.push_back(c);
      advance();
    }
    t.kind = Tok::String;
    t.text = std::move(out);
  }

  void lex_punct(Token& t) {
    const char c = src_[pos_];
    const char n = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
    auto one = [&](Tok k) {
      t.kind = k;
      advance();
    };
    auto two = [&](Tok k) {
      t.kind = k;
      advance();
      advance();
    };
    switch (c) {
      case '{': return one(Tok::LBrace);
      case '}': return one(Tok::RBrace);
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case ',': return one(Tok::Comma);
      case ':': return one(Tok::Colon);
      case '+': return one(Tok::Plus);
      case '-': return one(Tok::Minus);
      case '*': return one(Tok::Star);
      case '/': return one(Tok::Slash);
      case '<': return n == '=' ? two(Tok::Le) : one(Tok::Lt);
      case '>': return n == '=' ? two(Tok::Ge) : one(Tok::Gt);
      case '=': return n == '=' ? two(Tok::EqEq) : one(Tok::Assign);
      case '!':
        if (n == '=') return two(Tok::Ne);
        break;
      default: break;
    }
    std::string shown = (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f)
                            ? "byte " + std::to_string(static_cast<unsigned char>(c))
                            : std::string(1, c);
    fail("unexpected character '" + shown + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<Token> lex(std::string_view text) { return Lexer(text).run(); }

}  // namespace hcmon::dsl::detail
