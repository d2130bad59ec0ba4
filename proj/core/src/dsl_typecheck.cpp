#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "hcmon/dsl.hpp"

namespace hcmon::dsl {

namespace {

constexpr Type kBool{BaseType::Bool, Unit::any};
constexpr Type kPoly{BaseType::Polygon, Unit::any};
constexpr Type kStr{BaseType::Str, Unit::any};
constexpr Type num(Unit u) { return {BaseType::Num, u}; }

const char* unit_name(Unit u) {
  switch (u) {
    case Unit::any: return "unitless literal";
    case Unit::dimensionless: return "dimensionless";
    case Unit::metres: return "metres";
    case Unit::seconds: return "seconds";
    case Unit::mps: return "m/s";
    case Unit::mps2: return "m/s^2";
  }
  return "?";
}

}  // namespace

std::string to_string(const Type& t) {
  switch (t.base) {
    case BaseType::Bool: return "bool";
    case BaseType::Polygon: return "polygon";
    case BaseType::Str: return "string";
    case BaseType::Num: return std::string("number[") + unit_name(t.unit) + "]";
  }
  return "?";
}

TypeError::TypeError(std::vector<Diagnostic> diags)
    : LocatedError(ErrorKind::type_error, diags.empty() ? "?" : format_location(diags[0].span),
                   diags.empty() ? "type error" : diags[0].message),
      diags_(std::move(diags)) {}

const std::vector<BuiltinInfo>& registry() {
  static const std::vector<BuiltinInfo> table{
      {Builtin::box_of, "box_of", {kStr}, kPoly, 0},
      {Builtin::danger_space_of, "danger_space_of", {kStr}, kPoly, 1},
      {Builtin::overlaps, "overlaps", {kPoly, kPoly}, kBool, 0},
      {Builtin::min_distance, "min_distance", {kPoly, kPoly}, num(Unit::metres), 0},
      {Builtin::crosses_centreline, "crosses_centreline", {kStr}, kBool, 0},
      {Builtin::distance_ahead, "distance_ahead", {kStr, kStr}, num(Unit::metres), 0},
      {Builtin::speed_of, "speed_of", {kStr}, num(Unit::mps), 1},
      {Builtin::accel_of, "accel_of", {kStr}, num(Unit::mps2), 2},
      {Builtin::sda, "sda", {}, num(Unit::metres), 1},
      {Builtin::within_lane, "within_lane", {kStr}, kBool, 0},
      {Builtin::heading_rel_lane, "heading_rel_lane", {kStr}, num(Unit::dimensionless), 0},
      {Builtin::present, "present", {kStr}, kBool, 0},
      {Builtin::overtaking, "overtaking", {kStr}, kBool, 0},
      {Builtin::returning, "returning", {kStr}, kBool, 0},
      {Builtin::cutting_in, "cutting_in", {kStr, kStr}, kBool, 0},
      {Builtin::danger_space_length, "danger_space_length", {num(Unit::mps)}, num(Unit::metres), 0},
      {Builtin::cut_in_clearance, "cut_in_clearance", {}, num(Unit::metres), 0},
  };
  return table;
}

const BuiltinInfo* find_builtin(std::string_view name) {
  for (const auto& b : registry()) {
    if (name == b.name) return &b;
  }
  return nullptr;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_builtin(std::string_view name) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& b : registry()) {
    const std::size_t d = levenshtein(name, b.name);
    if (d < best_d) {
      best_d = d;
      best = b.name;
    }
  }
  return best;
}

int lookahead(const Node& n) {
  int la = 0;
  if (n.op == Node::Op::Call) {
    for (const auto& b : registry()) {
      if (b.id == n.fn) la = b.lookahead;
    }
  }
  for (const auto& k : n.kids) la = std::max(la, lookahead(k));
  return la;
}

namespace {

struct Fail {
  Span span;
  std::string message;
};

std::optional<Unit> unify(Unit a, Unit b) {
  if (a == Unit::any) return b;
  if (b == Unit::any) return a;
  if (a == b) return a;
  return std::nullopt;
}

std::optional<Unit> multiply(Unit a, Unit b) {
  if (a == Unit::any || a == Unit::dimensionless) return b == Unit::any ? a : b;
  if (b == Unit::any || b == Unit::dimensionless) return a;
  auto pair = [&](Unit x, Unit y) { return (a == x && b == y) || (a == y && b == x); };
  if (pair(Unit::mps, Unit::seconds)) return Unit::metres;
  if (pair(Unit::mps2, Unit::seconds)) return Unit::mps;
  return std::nullopt;
}

std::optional<Unit> divide(Unit a, Unit b) {
  if (b == Unit::any) return a;
  if (b == Unit::dimensionless) return a;
  if (a == Unit::any) return std::nullopt;
  if (a == b) return Unit::dimensionless;
  if (a == Unit::metres && b == Unit::seconds) return Unit::mps;
  if (a == Unit::metres && b == Unit::mps) return Unit::seconds;
  if (a == Unit::mps && b == Unit::seconds) return Unit::mps2;
  if (a == Unit::mps && b == Unit::mps2) return Unit::seconds;
  return std::nullopt;
}

class Checker {
 public:
  explicit Checker(const Document& doc) {
    for (const auto& item : doc.items) {
      if (item.is_const) consts_[item.constant.name] = &item.constant;
    }
  }

  Node check(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Number: {
        Node n;
        n.op = Node::Op::Const;
        double v = e.number;
        Unit u = Unit::any;
        switch (e.suffix) {
          case Suffix::none: break;
          case Suffix::s: u = Unit::seconds; break;
          case Suffix::ms: u = Unit::seconds; v /= 1000.0; break;
          case Suffix::m: u = Unit::metres; break;
          case Suffix::mps: u = Unit::mps; break;
          case Suffix::mph: u = Unit::mps; v *= 0.44704; break;
        }
        n.value = v;
        n.type = num(u);
        return n;
      }
      case Expr::Kind::Bool: {
        Node n;
        n.op = Node::Op::Const;
        n.is_bool = true;
        n.boolean = e.boolean;
        n.type = kBool;
        return n;
      }
      case Expr::Kind::String: {
        Node n;
        n.op = Node::Op::Str;
        n.text = e.text;
        n.type = kStr;
        return n;
      }
      case Expr::Kind::Name: return constant(e);
      case Expr::Kind::Unary: {
        Node inner = check(*e.args[0]);
        Node n;
        n.kids.push_back(inner);
        if (e.unop == UnOp::Not) {
          if (inner.type.base != BaseType::Bool) {
            throw Fail{e.span, "'not' needs a boolean operand, found " + to_string(inner.type)};
          }
          n.op = Node::Op::Not;
          n.type = kBool;
        } else {
          if (inner.type.base != BaseType::Num) {
            throw Fail{e.span, "unary '-' needs a number, found " + to_string(inner.type)};
          }
          n.op = Node::Op::Neg;
          n.type = inner.type;
        }
        return n;
      }
      case Expr::Kind::Binary: return binary(e);
      case Expr::Kind::Call: return call(e);
    }
    throw Fail{e.span, "unsupported expression"};
  }

 private:
  Node constant(const Expr& e) {
    auto it = consts_.find(e.text);
    if (it == consts_.end()) {
      std::string msg = "unknown name '" + e.text + "'";
      if (find_builtin(e.text)) {
        msg += "; call it as " + e.text + "(...)";
      } else {
        msg += "; actors are written as strings, e.g. \"av\"";
      }
      throw Fail{e.span, msg};
    }
    if (auto done = resolved_.find(e.text); done != resolved_.end()) return done->second;
    if (!visiting_.insert(e.text).second) {
      throw Fail{e.span, "constant '" + e.text + "' is defined in terms of itself"};
    }
    Node n = check(*it->second->value);
    visiting_.erase(e.text);
    resolved_[e.text] = n;
    return n;
  }

  Node binary(const Expr& e) {
    Node l = check(*e.args[0]);
    Node r = check(*e.args[1]);
    Node n;
    n.binop = e.binop;
    n.kids = {l, r};
    const std::string op = to_string(e.binop);
    switch (e.binop) {
      case BinOp::And:
      case BinOp::Or:
        if (l.type.base != BaseType::Bool || r.type.base != BaseType::Bool) {
          throw Fail{e.span, "'" + op + "' needs boolean operands, found " + to_string(l.type) +
                                 " and " + to_string(r.type)};
        }
        n.op = e.binop == BinOp::And ? Node::Op::And : Node::Op::Or;
        n.type = kBool;
        return n;
      case BinOp::Eq:
      case BinOp::Ne:
        if (l.type.base == r.type.base &&
            (l.type.base == BaseType::Bool || l.type.base == BaseType::Str)) {
          n.op = Node::Op::Cmp;
          n.type = kBool;
          return n;
        }
        [[fallthrough]];
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge:
        if (l.type.base != BaseType::Num || r.type.base != BaseType::Num) {
          throw Fail{e.span, "'" + op + "' cannot compare " + to_string(l.type) + " with " +
                                 to_string(r.type)};
        }
        if (!unify(l.type.unit, r.type.unit)) {
          throw Fail{e.span, std::string("unit mismatch: cannot compare ") + unit_name(l.type.unit) +
                                 " with " + unit_name(r.type.unit)};
        }
        n.op = Node::Op::Cmp;
        n.type = kBool;
        return n;
      case BinOp::Add:
      case BinOp::Sub:
      case BinOp::Mul:
      case BinOp::Div: {
        if (l.type.base != BaseType::Num || r.type.base != BaseType::Num) {
          throw Fail{e.span, "'" + op + "' needs numeric operands, found " + to_string(l.type) +
                                 " and " + to_string(r.type)};
        }
        std::optional<Unit> u;
        if (e.binop == BinOp::Add || e.binop == BinOp::Sub) {
          u = unify(l.type.unit, r.type.unit);
        } else if (e.binop == BinOp::Mul) {
          u = multiply(l.type.unit, r.type.unit);
        } else {
          u = divide(l.type.unit, r.type.unit);
        }
        if (!u) {
          throw Fail{e.span, std::string("unit mismatch: ") + unit_name(l.type.unit) + " " + op +
                                 " " + unit_name(r.type.unit) + " is not supported"};
        }
        n.op = Node::Op::Arith;
        n.type = num(*u);
        return n;
      }
    }
    throw Fail{e.span, "unsupported operator"};
  }

  Node call(const Expr& e) {
    const BuiltinInfo* b = find_builtin(e.text);
    if (!b) {
      throw Fail{e.span, "unknown function '" + e.text + "'; did you mean '" +
                             nearest_builtin(e.text) + "'?"};
    }
    if (e.args.size() != b->params.size()) {
      throw Fail{e.span, "function '" + e.text + "' expects " + std::to_string(b->params.size()) +
                             " argument(s), got " + std::to_string(e.args.size())};
    }
    Node n;
    n.op = Node::Op::Call;
    n.fn = b->id;
    n.text = b->name;
    n.type = b->result;
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      Node a = check(*e.args[i]);
      const Type& want = b->params[i];
      const bool ok = a.type.base == want.base &&
                      (want.base != BaseType::Num || unify(a.type.unit, want.unit).has_value());
      if (!ok) {
        throw Fail{e.args[i]->span, "argument " + std::to_string(i + 1) + " of '" + e.text +
                                        "' must be " + to_string(want) + ", found " +
                                        to_string(a.type)};
      }
      n.kids.push_back(std::move(a));
    }
    return n;
  }

  std::map<std::string, const ConstDecl*> consts_;
  std::map<std::string, Node> resolved_;
  std::set<std::string> visiting_;
};

std::string number_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void serialize_node(const Node& n, std::string& out) {
  out += "(";
  switch (n.op) {
    case Node::Op::Const:
      out += n.is_bool ? std::string("bool ") + (n.boolean ? "true" : "false")
                       : "num " + number_text(n.value);
      break;
    case Node::Op::Str: out += "str \"" + n.text + "\""; break;
    case Node::Op::Not: out += "not"; break;
    case Node::Op::Neg: out += "neg"; break;
    case Node::Op::And: out += "and"; break;
    case Node::Op::Or: out += "or"; break;
    case Node::Op::Cmp:
    case Node::Op::Arith: out += to_string(n.binop); break;
    case Node::Op::Call: out += "call " + n.text; break;
  }
  out += " :" + to_string(n.type);
  for (const auto& k : n.kids) {
    out += " ";
    serialize_node(k, out);
  }
  out += ")";
}

}  // namespace

Plan compile(const Document& doc) {
  Checker checker(doc);
  std::vector<Diagnostic> diags;
  Plan plan;
  auto root = [&](const ExprPtr& e, const char* what, std::optional<Node>& out) {
    try {
      Node n = checker.check(*e);
      if (n.type.base != BaseType::Bool) {
        diags.push_back({e->span, std::string(what) + " must be boolean, found " + to_string(n.type)});
        return;
      }
      out = std::move(n);
    } catch (const Fail& f) {
      diags.push_back({f.span, f.message});
    }
  };
  for (const auto& item : doc.items) {
    if (item.is_const) {
      try {
        checker.check(*item.constant.value);
      } catch (const Fail& f) {
        diags.push_back({f.span, f.message});
      }
      continue;
    }
    const auto& a = item.assertion;
    CompiledAssertion c;
    c.id = a.id;
    c.odd = a.odd;
    c.type = a.type;
    c.window = a.window ? a.window->seconds() : 0.0;
    c.severity = a.severity;
    c.mode = a.mode;
    std::optional<Node> cond;
    if (a.reference) root(a.reference, "reference", c.reference);
    root(a.condition, "condition", cond);
    if (cond) c.condition = std::move(*cond);
    c.ref_lookahead = c.reference ? lookahead(*c.reference) : 0;
    c.cond_lookahead = lookahead(c.condition);
    plan.assertions.push_back(std::move(c));
  }
  if (!diags.empty()) throw TypeError(std::move(diags));
  return plan;
}

Plan compile_text(std::string_view text) { return compile(parse(text)); }

Type typecheck_expression(std::string_view text) {
  auto e = parse_expression(text);
  Document empty;
  Checker checker(empty);
  try {
    return checker.check(*e).type;
  } catch (const Fail& f) {
    throw TypeError({{f.span, f.message}});
  }
}

std::string serialize_plan(const Plan& plan) {
  std::string out;
  for (const auto& a : plan.assertions) {
    out += "(assertion " + a.id + " (odd";
    for (const auto& t : a.odd) out += " " + t;
    out += std::string(") (type ") + to_string(a.type) + ") (window " + number_text(a.window) +
           ") (severity " + to_string(a.severity) + ") (mode " + to_string(a.mode) +
           ") (lookahead " + std::to_string(a.ref_lookahead) + " " +
           std::to_string(a.cond_lookahead) + ")";
    if (a.reference) {
      out += " (reference ";
      serialize_node(*a.reference, out);
      out += ")";
    }
    out += " (condition ";
    serialize_node(a.condition, out);
    out += "))\n";
  }
  return out;
}

}  // namespace hcmon::dsl
