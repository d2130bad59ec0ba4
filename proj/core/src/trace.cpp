#include "hcmon/trace.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hcmon/error.hpp"

namespace hcmon {

using nlohmann::json;

const char* to_string(Role role) {
  switch (role) {
    case Role::AV: return "AV";
    case Role::VBP: return "VBP";
    case Role::OV: return "OV";
    case Role::other: return "other";
  }
  return "other";
}

std::optional<Role> parse_role(const std::string& text) {
  std::string s;
  for (char c : text) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "av") return Role::AV;
  if (s == "vbp") return Role::VBP;
  if (s == "ov") return Role::OV;
  if (s == "other") return Role::other;
  return std::nullopt;
}

const ActorState* Step::find(const std::string& actor_id) const {
  auto it = actors.find(actor_id);
  return it == actors.end() ? nullptr : &it->second;
}

const ActorState* find_role(const Step& step, Role role) {
  for (const auto& [id, s] : step.actors) {
    if (s.role == role) return &s;
  }
  return nullptr;
}

namespace {

std::string record_loc(std::size_t index) { return "record " + std::to_string(index); }

double required_number(const json& j, const char* key, std::size_t index) {
  if (!j.contains(key)) {
    throw LocatedError(ErrorKind::parse, record_loc(index),
                       std::string("missing required field '") + key + "'");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) {
    throw LocatedError(ErrorKind::parse, record_loc(index),
                       std::string("field '") + key + "' must be a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw LocatedError(ErrorKind::parse, record_loc(index),
                       std::string("field '") + key + "' must be finite");
  }
  return d;
}

}  // namespace

ActorState parse_record(const std::string& line, std::size_t index) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw LocatedError(ErrorKind::parse, record_loc(index), e.what());
  }
  if (!j.is_object()) throw LocatedError(ErrorKind::parse, record_loc(index), "expected an object");

  ActorState s;
  s.t = required_number(j, "t", index);
  if (s.t < 0.0) throw LocatedError(ErrorKind::validation, record_loc(index), "t must be >= 0");
  if (!j.contains("actor_id")) {
    throw LocatedError(ErrorKind::parse, record_loc(index), "missing required field 'actor_id'");
  }
  const auto& id = j["actor_id"];
  if (id.is_string()) {
    s.actor_id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    s.actor_id = std::to_string(id.get<long long>());
  } else {
    throw LocatedError(ErrorKind::parse, record_loc(index), "actor_id must be a string or integer");
  }
  if (!j.contains("role") || !j["role"].is_string()) {
    throw LocatedError(ErrorKind::parse, record_loc(index), "missing required field 'role'");
  }
  auto role = parse_role(j["role"].get<std::string>());
  if (!role) {
    throw LocatedError(ErrorKind::parse, record_loc(index),
                       "unknown role '" + j["role"].get<std::string>() + "'");
  }
  s.role = *role;
  const double x = required_number(j, "x", index);
  const double y = required_number(j, "y", index);
  const double h = required_number(j, "heading_rad", index);
  s.pose = Pose2D(x, y, h);
  s.dims = {required_number(j, "length_m", index), required_number(j, "width_m", index)};
  if (!s.dims.valid()) {
    throw LocatedError(ErrorKind::validation, record_loc(index), "dimensions must be positive");
  }
  if (j.contains("speed_mps")) {
    s.speed = required_number(j, "speed_mps", index);
  } else if (j.contains("speed_mph")) {
    s.speed = required_number(j, "speed_mph", index) * kMphToMps;
  }
  if (j.contains("low_confidence")) {
    if (!j["low_confidence"].is_boolean()) {
      throw LocatedError(ErrorKind::parse, record_loc(index), "low_confidence must be boolean");
    }
    s.low_confidence = j["low_confidence"].get<bool>();
  }
  return s;
}

std::string serialize_record(const ActorState& s) {
  json j = json::object();
  j["t"] = s.t;
  j["actor_id"] = s.actor_id;
  j["role"] = to_string(s.role);
  j["x"] = s.pose.x;
  j["y"] = s.pose.y;
  j["heading_rad"] = s.pose.heading;
  j["length_m"] = s.dims.length;
  j["width_m"] = s.dims.width;
  if (s.speed) j["speed_mps"] = *s.speed;
  if (s.low_confidence) j["low_confidence"] = true;
  return j.dump();
}

std::string serialize_trace(const Trace& trace) {
  std::string out;
  for (const auto& step : trace.steps) {
    for (const auto& [id, s] : step.actors) {
      out += serialize_record(s);
      out += '\n';
    }
  }
  return out;
}

void validate_trace(const Trace& trace) {
  std::map<std::string, BoxDims> dims;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    if (i > 0 && !(step.t > trace.steps[i - 1].t)) {
      throw LocatedError(ErrorKind::ordering, "step " + std::to_string(i),
                         "timestamps must be strictly increasing");
    }
    for (const auto& [id, s] : step.actors) {
      auto [it, fresh] = dims.emplace(id, s.dims);
      if (!fresh && !(it->second == s.dims)) {
        throw LocatedError(ErrorKind::validation, "step " + std::to_string(i),
                           "dimensions of actor '" + id + "' changed");
      }
    }
  }
}

namespace {

double min_spacing(const std::vector<Step>& steps) {
  if (steps.size() < 2) return 0.0;
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < steps.size(); ++i) dt = std::min(dt, steps[i].t - steps[i - 1].t);
  return dt;
}

// Incremental grouping shared by load_trace and make_trace so both report the
// same record indices.
class TraceBuilder {
 public:
  void add(ActorState s, std::size_t index) {
    if (!steps_.empty() && s.t < steps_.back().t) {
      throw LocatedError(ErrorKind::ordering, record_loc(index),
                         "timestamp decreases (" + std::to_string(s.t) + " after " +
                             std::to_string(steps_.back().t) + ")");
    }
    auto [it, fresh] = dims_.emplace(s.actor_id, s.dims);
    if (!fresh && !(it->second == s.dims)) {
      throw LocatedError(ErrorKind::validation, record_loc(index),
                         "dimensions of actor '" + s.actor_id + "' changed");
    }
    if (steps_.empty() || s.t > steps_.back().t) steps_.push_back(Step{s.t, {}});
    auto& actors = steps_.back().actors;
    if (actors.count(s.actor_id)) {
      throw LocatedError(ErrorKind::validation, record_loc(index),
                         "duplicate record for actor '" + s.actor_id + "' at t=" +
                             std::to_string(s.t));
    }
    const std::string id = s.actor_id;
    actors.emplace(id, std::move(s));
  }

  Trace finish() {
    Trace t{std::move(steps_), 0.0};
    t.dt = min_spacing(t.steps);
    return t;
  }

 private:
  std::vector<Step> steps_;
  std::map<std::string, BoxDims> dims_;
};

}  // namespace

Trace make_trace(std::vector<ActorState> states) {
  std::stable_sort(states.begin(), states.end(),
                   [](const ActorState& a, const ActorState& b) { return a.t < b.t; });
  TraceBuilder b;
  for (std::size_t i = 0; i < states.size(); ++i) b.add(std::move(states[i]), i);
  return b.finish();
}

Trace load_trace(std::istream& in) {
  TraceBuilder b;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    b.add(parse_record(line, index), index);
    ++index;
  }
  return b.finish();
}

Trace load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::not_found, "cannot open trace file '" + path + "'");
  return load_trace(in);
}

Kinematics kinematics(const Neighbourhood& nb) {
  Kinematics k;
  const ActorState* c = nb[0];
  if (!c) return k;
  const ActorState* p1 = nb[-1];
  const ActorState* p2 = nb[-2];
  const ActorState* n1 = nb[1];
  const ActorState* n2 = nb[2];
  auto diff = [](const ActorState* a, const ActorState* b) {
    const double h = b->t - a->t;
    return Vec2{(b->pose.x - a->pose.x) / h, (b->pose.y - a->pose.y) / h};
  };
  if (p1 && n1) {
    k.velocity_vec = diff(p1, n1);
  } else if (n1) {
    k.velocity_vec = diff(c, n1);
  } else if (p1) {
    k.velocity_vec = diff(p1, c);
  }
  // Second difference on three consecutive samples a, b, c (non-uniform).
  auto second = [&](const ActorState* a, const ActorState* b, const ActorState* cc) {
    const Vec2 d1 = diff(a, b);
    const Vec2 d2 = diff(b, cc);
    const double span = 0.5 * (cc->t - a->t);
    return Vec2{(d2.x - d1.x) / span, (d2.y - d1.y) / span};
  };
  if (p1 && n1) {
    k.accel_vec = second(p1, c, n1);
  } else if (n1 && n2) {
    k.accel_vec = second(c, n1, n2);
  } else if (p1 && p2) {
    k.accel_vec = second(p2, p1, c);
  }
  const Vec2 f = c->pose.forward();
  if (k.velocity_vec) {
    k.velocity = dot(*k.velocity_vec, f);
  } else if (c->speed) {
    k.velocity = c->speed;
  }
  if (k.accel_vec) k.acceleration = dot(*k.accel_vec, f);
  return k;
}

Neighbourhood neighbourhood(const Trace& trace, std::size_t index, const std::string& actor_id) {
  Neighbourhood nb;
  for (int off = -2; off <= 2; ++off) {
    const long long j = static_cast<long long>(index) + off;
    if (j < 0 || j >= static_cast<long long>(trace.steps.size())) continue;
    nb.at[off + 2] = trace.steps[static_cast<std::size_t>(j)].find(actor_id);
  }
  // Presence must be contiguous with the centre step.
  if (!nb.at[1]) nb.at[0] = nullptr;
  if (!nb.at[3]) nb.at[4] = nullptr;
  return nb;
}

std::optional<double> heading_rel_lane(const RoadMap& map, const ActorState& s) {
  auto o = try_lane_orientation_at(map, s.pose.position());
  if (!o) return std::nullopt;
  return normalize_angle(s.pose.heading - *o);
}

Vec2 lane_axis(const RoadMap& map, const ActorState& s) {
  auto o = try_lane_orientation_at(map, s.pose.position());
  const double lane = o ? *o : s.pose.heading;
  Vec2 axis{std::cos(lane), std::sin(lane)};
  if (dot(axis, s.pose.forward()) < 0.0) axis = Vec2{-axis.x, -axis.y};
  return axis;
}

double along_lane_component(const RoadMap& map, const ActorState& s, Vec2 velocity) {
  return dot(velocity, lane_axis(map, s));
}

double folded_lane_angle(const RoadMap& map, const ActorState& s) {
  const Vec2 axis = lane_axis(map, s);
  return std::abs(std::atan2(cross(axis, s.pose.forward()), dot(axis, s.pose.forward())));
}

double distance_ahead(const ActorState& av, const ActorState& ov, const RoadMap& map) {
  const auto o = try_lane_orientation_at(map, av.pose.position());
  const double lane = o ? *o : av.pose.heading;
  const Vec2 axis{std::cos(lane), std::sin(lane)};
  const auto a = oriented_box(av.pose, av.dims);
  const auto b = oriented_box(ov.pose, ov.dims);
  if (overlaps(a, b)) return 0.0;
  auto interval = [&](const ConvexPolygon& p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& v : p.vertices()) {
      lo = std::min(lo, dot(v, axis));
      hi = std::max(hi, dot(v, axis));
    }
    return std::pair{lo, hi};
  };
  const auto [alo, ahi] = interval(a);
  const auto [blo, bhi] = interval(b);
  return std::max(0.0, std::max(blo - ahi, alo - bhi));
}

double distance_ahead(const Step& step, const RoadMap& map) {
  const ActorState* av = find_role(step, Role::AV);
  const ActorState* ov = find_role(step, Role::OV);
  if (!av) throw Error(ErrorKind::not_found, "no AV at t=" + std::to_string(step.t));
  if (!ov) throw Error(ErrorKind::not_found, "no OV at t=" + std::to_string(step.t));
  return distance_ahead(*av, *ov, map);
}

DerivedTrace derive_dynamics(const Trace& trace, const RoadMap& map) {
  if (trace.steps.size() < 2) {
    throw Error(ErrorKind::velocity_undefined, "velocity undefined: trace has fewer than 2 steps");
  }
  DerivedTrace out(trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    for (const auto& [id, s] : step.actors) {
      DerivedState d;
      const auto k = kinematics(neighbourhood(trace, i, id));
      d.velocity = k.velocity;
      d.acceleration = k.acceleration;
      if (k.velocity_vec) {
        d.along_lane_speed = along_lane_component(map, s, *k.velocity_vec);
        if (s.speed && std::abs(*s.speed - *k.velocity) > 0.5) {
          d.warnings.push_back("recorded speed differs from positional speed by more than 0.5 m/s");
        }
      } else if (s.speed) {
        d.along_lane_speed = *s.speed * std::cos(folded_lane_angle(map, s));
      }
      d.heading_rel_lane = heading_rel_lane(map, s);
      if (d.heading_rel_lane) {
        const double angle = folded_lane_angle(map, s);
        const double lateral = dot(s.pose.forward(), oncoming_normal(map, s.pose.position(), s.pose.heading));
        if (lateral > 0.0) d.pull_out_angle = angle;
        if (lateral < 0.0) d.cut_in_angle = angle;
      }
      if (s.role == Role::AV) {
        if (const ActorState* ov = find_role(step, Role::OV)) {
          d.distance_ahead = distance_ahead(s, *ov, map);
        }
      }
      out[i].emplace(id, std::move(d));
    }
  }
  return out;
}

}  // namespace hcmon
