#include <charconv>
#include <sstream>

#include "hcmon/dsl.hpp"

namespace hcmon::dsl {

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary:
      switch (e.binop) {
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Lt:
        case BinOp::Le:
        case BinOp::Gt:
        case BinOp::Ge:
        case BinOp::Eq:
        case BinOp::Ne: return 3;
        case BinOp::Add:
        case BinOp::Sub: return 4;
        case BinOp::Mul:
        case BinOp::Div: return 5;
      }
      return 0;
    case Expr::Kind::Unary: return 6;
    default: return 7;
  }
}

std::string number_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void emit(const Expr& e, std::string& out);

void emit_child(const Expr& child, bool parens, std::string& out) {
  if (parens) out.push_back('(');
  emit(child, out);
  if (parens) out.push_back(')');
}

void emit(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Number:
      out += number_text(e.number);
      out += to_string(e.suffix);
      return;
    case Expr::Kind::Bool:
      out += e.boolean ? "true" : "false";
      return;
    case Expr::Kind::String:
      out += quote(e.text);
      return;
    case Expr::Kind::Name:
      out += e.text;
      return;
    case Expr::Kind::Unary: {
      out += e.unop == UnOp::Not ? "not " : "-";
      const Expr& operand = *e.args[0];
      emit_child(operand, precedence(operand) < 6, out);
      return;
    }
    case Expr::Kind::Binary: {
      const int p = precedence(e);
      const Expr& l = *e.args[0];
      const Expr& r = *e.args[1];
      const bool cmp = p == 3;
      emit_child(l, cmp ? precedence(l) <= p : precedence(l) < p, out);
      out += ' ';
      out += to_string(e.binop);
      out += ' ';
      emit_child(r, precedence(r) <= p, out);
      return;
    }
    case Expr::Kind::Call:
      out += e.text;
      out.push_back('(');
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        emit(*e.args[i], out);
      }
      out.push_back(')');
      return;
  }
}

void sexpr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Number:
      out += "(num " + number_text(e.number);
      if (e.suffix != Suffix::none) out += std::string(" ") + to_string(e.suffix);
      out += ")";
      return;
    case Expr::Kind::Bool:
      out += e.boolean ? "(bool true)" : "(bool false)";
      return;
    case Expr::Kind::String:
      out += "(str " + quote(e.text) + ")";
      return;
    case Expr::Kind::Name:
      out += "(name " + e.text + ")";
      return;
    case Expr::Kind::Unary:
      out += e.unop == UnOp::Not ? "(not " : "(neg ";
      sexpr(*e.args[0], out);
      out += ")";
      return;
    case Expr::Kind::Binary:
      out += std::string("(") + to_string(e.binop) + " ";
      sexpr(*e.args[0], out);
      out += " ";
      sexpr(*e.args[1], out);
      out += ")";
      return;
    case Expr::Kind::Call:
      out += "(call " + e.text;
      for (const auto& a : e.args) {
        out += " ";
        sexpr(*a, out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::string format(const Expr& e) {
  std::string out;
  emit(e, out);
  return out;
}

std::string format(const Document& doc) {
  std::string out;
  for (std::size_t i = 0; i < doc.items.size(); ++i) {
    const Item& item = doc.items[i];
    if (i) out += "\n";
    if (item.is_const) {
      out += "const " + item.constant.name + " = " + format(*item.constant.value) + "\n";
      continue;
    }
    const auto& a = item.assertion;
    out += "assertion " + a.id + " {\n";
    out += "  odd: ";
    for (std::size_t k = 0; k < a.odd.size(); ++k) {
      if (k) out += ", ";
      out += a.odd[k];
    }
    out += "\n";
    out += std::string("  type: ") + to_string(a.type) + "\n";
    if (a.window) {
      const bool physical =
          a.type == AssertionType::pre_physical || a.type == AssertionType::post_physical;
      out += physical ? "  offset: " : "  window: ";
      out += number_text(a.window->value) + to_string(a.window->suffix) + "\n";
    }
    out += std::string("  severity: ") + to_string(a.severity) + "\n";
    out += std::string("  mode: ") + to_string(a.mode) + "\n";
    if (a.reference) out += "  reference: " + format(*a.reference) + "\n";
    out += "  condition: " + format(*a.condition) + "\n";
    out += "}\n";
  }
  return out;
}

std::string dump(const Expr& e) {
  std::string out;
  sexpr(e, out);
  return out;
}

std::string dump(const Document& doc) {
  std::string out;
  for (const auto& item : doc.items) {
    if (item.is_const) {
      out += "(const " + item.constant.name + " " + dump(*item.constant.value) + ")\n";
      continue;
    }
    const auto& a = item.assertion;
    out += "(assertion " + a.id + "\n";
    out += "  (odd";
    for (const auto& t : a.odd) out += " " + t;
    out += ")\n";
    out += std::string("  (type ") + to_string(a.type) + ")\n";
    if (a.window) {
      out += "  (window " + number_text(a.window->value) + " " + to_string(a.window->suffix) + ")\n";
    }
    out += std::string("  (severity ") + to_string(a.severity) + ")\n";
    out += std::string("  (mode ") + to_string(a.mode) + ")\n";
    if (a.reference) out += "  (reference " + dump(*a.reference) + ")\n";
    out += "  (condition " + dump(*a.condition) + "))\n";
  }
  return out;
}

}  // namespace hcmon::dsl
