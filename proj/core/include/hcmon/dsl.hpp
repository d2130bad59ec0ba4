#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcmon/error.hpp"

namespace hcmon::dsl {

struct Span {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
};

std::string format_location(const Span& s);

enum class BinOp { Or, And, Lt, Le, Gt, Ge, Eq, Ne, Add, Sub, Mul, Div };
enum class UnOp { Not, Neg };
enum class Suffix { none, s, ms, m, mps, mph };

const char* to_string(BinOp op);
const char* to_string(Suffix s);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Number, Bool, String, Name, Unary, Binary, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  Suffix suffix = Suffix::none;
  bool boolean = false;
  std::string text;  // string literal, name, or function name
  UnOp unop = UnOp::Not;
  BinOp binop = BinOp::Or;
  std::vector<ExprPtr> args;  // operands or call arguments
  Span span;
};

// Structural equality ignoring spans.
bool ast_equal(const Expr& a, const Expr& b);

enum class AssertionType { invariant, execution, pre_temporal, pre_physical, post_temporal, post_physical };
enum class Severity { safety, performance };
enum class RefMode { first, all };

const char* to_string(AssertionType t);
const char* to_string(Severity s);
const char* to_string(RefMode m);

struct Duration {
  double value = 0.0;
  Suffix suffix = Suffix::s;
  double seconds() const { return suffix == Suffix::ms ? value / 1000.0 : value; }
};

struct AssertionDecl {
  std::string id;
  std::vector<std::string> odd;
  AssertionType type = AssertionType::invariant;
  std::optional<Duration> window;  // window (temporal) or offset (physical)
  Severity severity = Severity::safety;
  RefMode mode = RefMode::first;
  ExprPtr reference;
  ExprPtr condition;
  Span span;
};

struct ConstDecl {
  std::string name;
  ExprPtr value;
  Span span;
};

struct Item {
  bool is_const = false;
  ConstDecl constant;
  AssertionDecl assertion;
};

struct Document {
  std::vector<Item> items;
};

bool ast_equal(const Document& a, const Document& b);

class ParseError : public LocatedError {
 public:
  ParseError(Span span, const std::string& message, std::vector<std::string> expected = {});
  const Span& span() const { return span_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  Span span_;
  std::vector<std::string> expected_;
};

Document parse(std::string_view text);
ExprPtr parse_expression(std::string_view text);

std::string format(const Document& doc);
std::string format(const Expr& e);

// S-expression dump of the AST (spans excluded) for golden fixtures.
std::string dump(const Document& doc);
std::string dump(const Expr& e);

// ---- types and compilation ----

enum class BaseType { Bool, Num, Polygon, Str };
enum class Unit { any, dimensionless, metres, seconds, mps, mps2 };

struct Type {
  BaseType base = BaseType::Bool;
  Unit unit = Unit::any;
  friend bool operator==(const Type&, const Type&) = default;
};

std::string to_string(const Type& t);

struct Diagnostic {
  Span span;
  std::string message;
};

class TypeError : public LocatedError {
 public:
  explicit TypeError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

enum class Builtin {
  box_of,
  danger_space_of,
  overlaps,
  min_distance,
  crosses_centreline,
  distance_ahead,
  speed_of,
  accel_of,
  sda,
  within_lane,
  heading_rel_lane,
  present,
  overtaking,
  returning,
  cutting_in,
  danger_space_length,
  cut_in_clearance,
};

struct BuiltinInfo {
  Builtin id;
  const char* name;
  std::vector<Type> params;
  Type result;
  int lookahead;  // future steps needed to evaluate at a step
};

const std::vector<BuiltinInfo>& registry();
const BuiltinInfo* find_builtin(std::string_view name);
std::string nearest_builtin(std::string_view name);

// Compiled expression: constants inlined, literals converted to SI.
struct Node {
  enum class Op { Const, Str, Not, Neg, And, Or, Cmp, Arith, Call };
  Op op = Op::Const;
  double value = 0.0;
  bool boolean = false;
  bool is_bool = false;
  std::string text;
  BinOp binop = BinOp::Or;
  Builtin fn = Builtin::box_of;
  std::vector<Node> kids;
  Type type;
};

int lookahead(const Node& n);

struct CompiledAssertion {
  std::string id;
  std::vector<std::string> odd;
  AssertionType type = AssertionType::invariant;
  double window = 0.0;  // seconds; window or offset
  Severity severity = Severity::safety;
  RefMode mode = RefMode::first;
  std::optional<Node> reference;
  Node condition;
  int ref_lookahead = 0;
  int cond_lookahead = 0;
};

struct Plan {
  std::vector<CompiledAssertion> assertions;
};

Plan compile(const Document& doc);
Plan compile_text(std::string_view text);
Type typecheck_expression(std::string_view text);
// Deterministic textual form of a compiled plan.
std::string serialize_plan(const Plan& plan);

std::size_t levenshtein(std::string_view a, std::string_view b);

}  // namespace hcmon::dsl
