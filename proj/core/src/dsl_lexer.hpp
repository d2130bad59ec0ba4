#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hcmon/dsl.hpp"

namespace hcmon::dsl::detail {

enum class Tok {
  Ident,
  Number,
  String,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Comma,
  Colon,
  Assign,
  Plus,
  Minus,
  Star,
  Slash,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  Ne,
  End,
};

const char* describe(Tok t);

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier name or decoded string literal
  double number = 0.0;
  Suffix suffix = Suffix::none;
  Span span;
};

std::vector<Token> lex(std::string_view text);

}  // namespace hcmon::dsl::detail
