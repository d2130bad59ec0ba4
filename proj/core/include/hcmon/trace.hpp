#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hcmon/geometry.hpp"
#include "hcmon/worldmap.hpp"

namespace hcmon {

enum class Role { AV, VBP, OV, other };

const char* to_string(Role role);
std::optional<Role> parse_role(const std::string& text);

inline constexpr double kMphToMps = 0.44704;

struct ActorState {
  std::string actor_id;
  Role role = Role::other;
  double t = 0.0;
  Pose2D pose;
  BoxDims dims;
  std::optional<double> speed;  // m/s, signed along heading
  bool low_confidence = false;

  friend bool operator==(const ActorState& a, const ActorState& b) {
    return a.actor_id == b.actor_id && a.role == b.role && a.t == b.t && a.pose.x == b.pose.x &&
           a.pose.y == b.pose.y && a.pose.heading == b.pose.heading && a.dims == b.dims &&
           a.speed == b.speed && a.low_confidence == b.low_confidence;
  }
};

struct Step {
  double t = 0.0;
  std::map<std::string, ActorState> actors;

  const ActorState* find(const std::string& actor_id) const;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Trace {
  std::vector<Step> steps;
  double dt = 0.0;  // smallest step spacing; 0 for fewer than two steps

  friend bool operator==(const Trace&, const Trace&) = default;
};

// Groups states into steps, validates invariants and computes dt.
Trace make_trace(std::vector<ActorState> states);
// Validates strictly increasing step times and per-actor constant dims.
void validate_trace(const Trace& trace);

Trace load_trace(std::istream& in);
Trace load_trace_file(const std::string& path);
// One JSON object for the record; no trailing newline.
std::string serialize_record(const ActorState& s);
std::string serialize_trace(const Trace& trace);
// Parses one JSON-lines record. `index` is used for error locations.
ActorState parse_record(const std::string& line, std::size_t index);

// Actor positions/presence at neighbouring steps, relative to a centre step.
// offset -2..+2; nullptr when the actor is absent or the step does not exist.
struct Neighbourhood {
  const ActorState* at[5] = {nullptr, nullptr, nullptr, nullptr, nullptr};
  const ActorState* operator[](int offset) const { return at[offset + 2]; }
};

struct Kinematics {
  std::optional<Vec2> velocity_vec;
  std::optional<Vec2> accel_vec;
  std::optional<double> velocity;      // along heading
  std::optional<double> acceleration;  // along heading
};

// Finite differences over the actor's contiguous presence run: central in the
// interior, one-sided at the run ends. Falls back to the recorded speed when
// the run has a single step.
Kinematics kinematics(const Neighbourhood& nb);

struct DerivedState {
  std::optional<double> velocity;
  std::optional<double> acceleration;
  std::optional<double> along_lane_speed;
  std::optional<double> heading_rel_lane;
  std::optional<double> pull_out_angle;
  std::optional<double> cut_in_angle;
  std::optional<double> distance_ahead;
  std::vector<std::string> warnings;
};

using DerivedTrace = std::vector<std::map<std::string, DerivedState>>;

DerivedTrace derive_dynamics(const Trace& trace, const RoadMap& map);

Neighbourhood neighbourhood(const Trace& trace, std::size_t index, const std::string& actor_id);

// Heading relative to the lane under the actor's centre; nullopt off-road.
std::optional<double> heading_rel_lane(const RoadMap& map, const ActorState& s);
// Lane axis under the actor's centre, flipped to point along its heading.
// Falls back to the heading itself off-road.
Vec2 lane_axis(const RoadMap& map, const ActorState& s);
// Speed component along the lane axis folded toward the actor's heading.
double along_lane_component(const RoadMap& map, const ActorState& s, Vec2 velocity);
// Magnitude of the heading relative to the lane axis, folded into [0, pi/2].
double folded_lane_angle(const RoadMap& map, const ActorState& s);

// Longitudinal gap between the AV and OV boxes along the AV's lane axis.
double distance_ahead(const ActorState& av, const ActorState& ov, const RoadMap& map);
double distance_ahead(const Step& step, const RoadMap& map);

// Smallest-id actor carrying `role` in the step.
const ActorState* find_role(const Step& step, Role role);

}  // namespace hcmon
