#include <cmath>
#include <variant>

#include "hcmon/engine.hpp"
#include "hcmon/error.hpp"

namespace hcmon {

using dsl::Builtin;
using dsl::Node;

double WorstCaseSpeeds::for_role(Role r) const {
  switch (r) {
    case Role::AV: return av;
    case Role::VBP: return vbp;
    case Role::OV: return ov;
    case Role::other: return other;
  }
  return other;
}

namespace {

using Value = std::variant<bool, double, ConvexPolygon, std::string>;

class Evaluator {
 public:
  Evaluator(const StepSource& src, long long index, const EvalConfig& cfg, Detail& detail)
      : src_(src), index_(index), cfg_(cfg), detail_(detail), step_(src.at(index)) {}

  Value eval(const Node& n) {
    switch (n.op) {
      case Node::Op::Const:
        if (n.is_bool) return n.boolean;
        return n.value;
      case Node::Op::Str: return n.text;
      case Node::Op::Not: return !boolean(n.kids[0]);
      case Node::Op::Neg: return -number(n.kids[0]);
      case Node::Op::And: return boolean(n.kids[0]) && boolean(n.kids[1]);
      case Node::Op::Or: return boolean(n.kids[0]) || boolean(n.kids[1]);
      case Node::Op::Cmp: return compare(n);
      case Node::Op::Arith: {
        const double a = number(n.kids[0]);
        const double b = number(n.kids[1]);
        switch (n.binop) {
          case dsl::BinOp::Add: return a + b;
          case dsl::BinOp::Sub: return a - b;
          case dsl::BinOp::Mul: return a * b;
          case dsl::BinOp::Div:
            if (b == 0.0) throw Error(ErrorKind::invalid_argument, "division by zero");
            return a / b;
          default: break;
        }
        throw Error(ErrorKind::invalid_argument, "bad arithmetic operator");
      }
      case Node::Op::Call: return call(n);
    }
    throw Error(ErrorKind::invalid_argument, "bad plan node");
  }

  bool boolean(const Node& n) { return std::get<bool>(eval(n)); }
  double number(const Node& n) { return std::get<double>(eval(n)); }

 private:
  Value compare(const Node& n) {
    const Value a = eval(n.kids[0]);
    const Value b = eval(n.kids[1]);
    if (std::holds_alternative<double>(a)) {
      const double x = std::get<double>(a);
      const double y = std::get<double>(b);
      detail_["measured"] = x;
      detail_["threshold"] = y;
      switch (n.binop) {
        case dsl::BinOp::Lt: return x < y;
        case dsl::BinOp::Le: return x <= y;
        case dsl::BinOp::Gt: return x > y;
        case dsl::BinOp::Ge: return x >= y;
        case dsl::BinOp::Eq: return x == y;
        case dsl::BinOp::Ne: return x != y;
        default: break;
      }
      throw Error(ErrorKind::invalid_argument, "bad comparison");
    }
    const bool eq = a == b;
    return n.binop == dsl::BinOp::Eq ? eq : !eq;
  }

  const RoadMap& map() const {
    if (!cfg_.map) throw Error(ErrorKind::not_found, "no road map configured");
    return *cfg_.map;
  }

  const ActorState* try_resolve(const std::string& ref) const {
    if (!step_) return nullptr;
    if (auto role = parse_role(ref)) {
      if (const ActorState* s = find_role(*step_, *role)) return s;
    }
    return step_->find(ref);
  }

  const ActorState& resolve(const std::string& ref) {
    const ActorState* s = try_resolve(ref);
    if (!s) {
      throw Error(ErrorKind::not_found,
                  "actor '" + ref + "' not present at t=" + std::to_string(step_ ? step_->t : 0.0));
    }
    if (s->low_confidence) detail_["low_confidence"] = std::string("true");
    return *s;
  }

  Neighbourhood neighbours(const ActorState& s) const {
    Neighbourhood nb;
    for (int off = -2; off <= 2; ++off) {
      if (const Step* st = src_.at(index_ + off)) nb.at[off + 2] = st->find(s.actor_id);
    }
    if (!nb.at[1]) nb.at[0] = nullptr;
    if (!nb.at[3]) nb.at[4] = nullptr;
    return nb;
  }

  double speed(const ActorState& s) {
    if (cfg_.speed_policy == SpeedPolicy::worst_case) return cfg_.worst_case.for_role(s.role);
    const auto k = kinematics(neighbours(s));
    if (!k.velocity) {
      throw Error(ErrorKind::velocity_undefined, "speed of '" + s.actor_id + "' is undefined");
    }
    return *k.velocity;
  }

  double along_lane_speed(const ActorState& s) {
    if (cfg_.speed_policy == SpeedPolicy::worst_case) return cfg_.worst_case.for_role(s.role);
    const auto k = kinematics(neighbours(s));
    if (k.velocity_vec) return along_lane_component(map(), s, *k.velocity_vec);
    if (s.speed) return *s.speed * std::cos(folded_lane_angle(map(), s));
    throw Error(ErrorKind::velocity_undefined, "speed of '" + s.actor_id + "' is undefined");
  }

  ConvexPolygon box(const ActorState& s) const { return oriented_box(s.pose, s.dims); }

  std::string str(const Node& n) { return std::get<std::string>(eval(n)); }

  Value call(const Node& n) {
    switch (n.fn) {
      case Builtin::box_of: return box(resolve(str(n.kids[0])));
      case Builtin::danger_space_of: {
        const ActorState& s = resolve(str(n.kids[0]));
        const double v = std::max(0.0, speed(s));
        return danger_space(s.pose, s.dims, danger_space_length(Mps{v}, cfg_.coefficients));
      }
      case Builtin::overlaps: {
        const ConvexPolygon a = std::get<ConvexPolygon>(eval(n.kids[0]));
        const ConvexPolygon b = std::get<ConvexPolygon>(eval(n.kids[1]));
        const double d = min_distance(a, b);
        detail_["measured"] = d;
        detail_["threshold"] = 0.0;
        return d == 0.0;
      }
      case Builtin::min_distance: {
        const ConvexPolygon a = std::get<ConvexPolygon>(eval(n.kids[0]));
        const ConvexPolygon b = std::get<ConvexPolygon>(eval(n.kids[1]));
        return min_distance(a, b);
      }
      case Builtin::crosses_centreline:
        return crosses_centreline(map(), box(resolve(str(n.kids[0]))));
      case Builtin::distance_ahead: {
        const ActorState& a = resolve(str(n.kids[0]));
        const ActorState& b = resolve(str(n.kids[1]));
        const double da = hcmon::distance_ahead(a, b, map());
        detail_["da"] = da;
        return da;
      }
      case Builtin::speed_of: return speed(resolve(str(n.kids[0])));
      case Builtin::accel_of: {
        const ActorState& s = resolve(str(n.kids[0]));
        if (cfg_.speed_policy == SpeedPolicy::worst_case) return 0.0;
        const auto k = kinematics(neighbours(s));
        if (!k.acceleration) {
          throw Error(ErrorKind::velocity_undefined,
                      "acceleration of '" + s.actor_id + "' is undefined");
        }
        return *k.acceleration;
      }
      case Builtin::sda: {
        const ActorState& av = resolve("av");
        const ActorState& vbp = resolve("vbp");
        const ActorState& ov = resolve("ov");
        const Mps v_av{along_lane_speed(av)};
        const Mps v_vbp{std::max(0.0, along_lane_speed(vbp))};
        const Mps v_ov{std::max(0.0, along_lane_speed(ov))};
        const ManoeuvreGeometry g{cfg_.calibration.lateral_offset, cfg_.calibration.vbp_length,
                                  v_av, v_vbp, v_ov};
        const auto s = safe_distance_ahead(cfg_.profile, g, cfg_.coefficients);
        detail_["sda"] = s.total;
        detail_["manoeuvre_time"] = s.time.total;
        detail_["closing_speed"] = s.closing_speed;
        detail_["ds_ov"] = s.ds_ov;
        return s.total;
      }
      case Builtin::within_lane:
        return within_single_lanelet(map(), box(resolve(str(n.kids[0]))));
      case Builtin::heading_rel_lane: {
        const ActorState& s = resolve(str(n.kids[0]));
        auto h = hcmon::heading_rel_lane(map(), s);
        if (!h) throw Error(ErrorKind::not_found, "actor '" + s.actor_id + "' is off-road");
        return *h;
      }
      case Builtin::present: return try_resolve(str(n.kids[0])) != nullptr;
      case Builtin::overtaking: {
        const ActorState& s = resolve(str(n.kids[0]));
        return against_lane_area(map(), box(s), s.pose.heading) > 0.0;
      }
      case Builtin::returning: {
        const ActorState& s = resolve(str(n.kids[0]));
        if (!(against_lane_area(map(), box(s), s.pose.heading) > 0.0)) return false;
        const Vec2 toward = oncoming_normal(map(), s.pose.position(), s.pose.heading);
        return dot(s.pose.forward(), toward) < 0.0;
      }
      case Builtin::cutting_in: {
        const ActorState& av = resolve(str(n.kids[0]));
        const ActorState& vbp = resolve(str(n.kids[1]));
        const ConvexPolygon a = box(av);
        if (!(against_lane_area(map(), a, av.pose.heading) > 0.0)) return false;
        const Vec2 toward = oncoming_normal(map(), av.pose.position(), av.pose.heading);
        if (!(dot(av.pose.forward(), toward) < 0.0)) return false;
        const Vec2 axis = lane_axis(map(), av);
        double av_lo = INFINITY;
        for (const auto& v : a.vertices()) av_lo = std::min(av_lo, dot(v, axis));
        double vbp_hi = -INFINITY;
        for (const auto& v : box(vbp).vertices()) vbp_hi = std::max(vbp_hi, dot(v, axis));
        return av_lo >= vbp_hi;
      }
      case Builtin::danger_space_length:
        return danger_space_length(Mps{number(n.kids[0])}, cfg_.coefficients);
      case Builtin::cut_in_clearance: return cfg_.profile.cut_in_clearance;
    }
    throw Error(ErrorKind::invalid_argument, "unknown builtin");
  }

  const StepSource& src_;
  long long index_;
  const EvalConfig& cfg_;
  Detail& detail_;
  const Step* step_;
};

}  // namespace

StepOutcome evaluate_at(const Node& node, const StepSource& src, long long index,
                        const EvalConfig& cfg) {
  StepOutcome out;
  try {
    Evaluator ev(src, index, cfg, out.detail);
    out.value = ev.boolean(node);
  } catch (const Error& e) {
    out.error = true;
    out.error_kind = e.kind();
    out.value = false;
    out.detail["reason"] = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return out;
}

}  // namespace hcmon
