#include "hcmon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hcmon/error.hpp"

namespace hcmon {

void ScenarioSpec::validate() const {
  auto fail = [this](const std::string& msg) {
    throw Error(ErrorKind::invalid_spec, "scenario '" + name + "': " + msg);
  };
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(duration > 0.0)) fail("duration must be positive");
  if (!(road_length > 0.0) || !(lane_width > 0.0)) fail("road dimensions must be positive");
  if (!(ov_start_offset > 0.0)) fail("ov_start_offset must be positive");
  if (v_av.value < 0.0 || v_ov.value < 0.0 || v_vbp < 0.0) fail("speeds must be non-negative");
  if (!av_dims.valid() || !ov_dims.valid() || !(vbp_length > 0.0) || !(vbp_width > 0.0)) {
    fail("vehicle dimensions must be positive");
  }
  if (!(lateral_offset > 0.0)) fail("lateral offset must be positive");
  if (lateral_offset > lane_width) fail("lateral offset exceeds the lane width");
  const double half_pi = std::numbers::pi / 2.0;
  if (!(profile.pull_out_angle > 0.0 && profile.pull_out_angle < half_pi) ||
      !(profile.cut_in_angle > 0.0 && profile.cut_in_angle < half_pi)) {
    fail("profile angles must lie in (0, pi/2)");
  }
  if (profile.cut_in_clearance < 0.0) fail("cut-in clearance must be non-negative");
  if (to_mps(v_av).value <= v_vbp) fail("AV is not faster than the VBP");
}

std::vector<std::string> preset_names() { return {"safe", "near_miss", "collision", "occlusion_abort"}; }

namespace {

ScenarioSpec overtake_at(const std::string& name, double da) {
  ScenarioSpec s;
  s.name = name;
  s.profile = default_profiles().get("nominal");
  s.ov_start_offset = da;
  return s;
}

}  // namespace

ScenarioSpec preset(const std::string& name) {
  if (name == "safe") return overtake_at(name, 76.43);
  if (name == "near_miss") return overtake_at(name, 58.33);
  if (name == "collision") return overtake_at(name, 35.63);
  if (name != "occlusion_abort") throw Error(ErrorKind::not_found, "unknown preset '" + name + "'");

  ScenarioSpec s;
  s.name = name;
  s.road_length = 300.0;
  s.av_start_x = 10.0;
  s.vbp_length = 10.0;
  s.vbp_width = 2.5;
  s.v_vbp = 8.0;
  s.vbp_position = 34.0;
  s.ov_dims = {4.5, 1.8};
  s.profile = default_profiles().get("nominal");
  s.lateral_offset = 3.0;
  s.pull_out_gap = 12.0;
  s.duration = 20.0;
  s.ov_start_offset = 100.0;
  s.abort = AbortManoeuvre{};
  s.ov_braking = OvBraking{};

  // The AV path up to visibility does not depend on the OV.
  const Scenario probe = generate(s);
  const double t_cross = probe.trace.steps[probe.crossing_step].t;
  Occlusion occ;
  occ.visible_from_t = probe.pull_out_t + 6.0;
  const auto visible_step = static_cast<std::size_t>(std::llround(occ.visible_from_t / s.dt));
  occ.flicker_steps = {visible_step + 20, visible_step + 21};
  s.occlusion = occ;
  // 60 m to the OV when it comes into view.
  const double closing = to_mps(s.v_av).value + to_mps(s.v_ov).value;
  s.ov_start_offset = 60.0 + closing * (occ.visible_from_t - t_cross);
  return s;
}

namespace {

double ramp(double x, double start, double slope, double cap) {
  return std::clamp((x - start) * slope, 0.0, cap);
}

double max_along_x(const ConvexPolygon& p) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& v : p.vertices()) m = std::max(m, v.x);
  return m;
}

}  // namespace

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  Scenario out;
  out.map = straight_two_lane_road(spec.road_length, spec.lane_width);

  const double own_y = spec.lane_width / 2.0;
  const double tanb = std::tan(spec.profile.pull_out_angle);
  const double tant = std::tan(spec.profile.cut_in_angle);
  const double lat = spec.lateral_offset;
  const double v_av = to_mps(spec.v_av).value;
  const double v_ov = to_mps(spec.v_ov).value;
  const double half_av = spec.av_dims.length / 2.0;
  const double half_vbp = spec.vbp_length / 2.0;
  const auto n = static_cast<std::size_t>(std::floor(spec.duration / spec.dt + 1e-9)) + 1;
  const double visible_from =
      spec.occlusion ? spec.occlusion->visible_from_t : std::numeric_limits<double>::infinity();

  struct AvSample {
    double x, y, heading, speed;
  };
  std::vector<AvSample> av(n);
  double x = spec.av_start_x;
  double spd = v_av;
  std::optional<double> x_ps;
  std::optional<double> x_ci;
  bool braking = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    const double vbp_x = spec.vbp_position + spec.v_vbp * t;
    const double vbp_rear = vbp_x - half_vbp;
    const double vbp_front = vbp_x + half_vbp;
    if (spec.abort && x_ps && !x_ci && t >= visible_from - 1e-9) braking = true;
    if (braking) spd = std::max(spec.abort->min_speed, spd - spec.abort->decel * spec.dt);

    if (!x_ps) {
      const double gap = vbp_rear - (x + half_av);
      if (gap <= spec.pull_out_gap) x_ps = x - (spec.pull_out_gap - gap) * spd / (spd - spec.v_vbp);
    }
    if (x_ps && !x_ci) {
      const double x_pe = *x_ps + lat / tanb;
      if (braking) {
        if (x + half_av <= vbp_rear - spec.abort->back_gap) x_ci = std::max(x, x_pe);
      } else if (!spec.abort || !spec.occlusion) {
        const double margin = (x - half_av) - vbp_front;
        if (margin >= spec.profile.cut_in_clearance && spd > spec.v_vbp) {
          x_ci = std::max(x_pe, x - (margin - spec.profile.cut_in_clearance) * spd / (spd - spec.v_vbp));
        }
      }
    }

    double y = own_y;
    double heading = 0.0;
    if (x_ps) {
      y -= ramp(x, *x_ps, tanb, lat);
      if (x >= *x_ps && x < *x_ps + lat / tanb) heading = -spec.profile.pull_out_angle;
    }
    if (x_ci) {
      y += ramp(x, *x_ci, tant, lat);
      if (x >= *x_ci && x < *x_ci + lat / tant) heading = spec.profile.cut_in_angle;
    }
    av[k] = {x, y, heading, spd / std::cos(heading)};
    x += spd * spec.dt;
  }

  std::optional<std::size_t> crossing;
  std::optional<std::size_t> pull_out;
  for (std::size_t k = 0; k < n; ++k) {
    const Pose2D pose(av[k].x, av[k].y, av[k].heading);
    const auto box = oriented_box(pose, spec.av_dims);
    if (!crossing && crosses_centreline(out.map, box)) crossing = k;
    if (!pull_out && against_lane_area(out.map, box, pose.heading) > 0.0) pull_out = k;
  }
  if (!crossing || !pull_out) {
    throw Error(ErrorKind::invalid_spec, "scenario '" + spec.name + "': AV never crosses the centreline");
  }
  out.crossing_step = *crossing;
  out.pull_out_t = static_cast<double>(*pull_out) * spec.dt;

  const double t_brake = spec.ov_braking && spec.occlusion
                             ? visible_from + spec.ov_braking->delay
                             : std::numeric_limits<double>::infinity();
  auto ov_travel = [&](double t) {
    if (t <= t_brake) return v_ov * t;
    const double tau = std::min(t - t_brake, v_ov / spec.ov_braking->decel);
    return v_ov * t_brake + v_ov * tau - spec.ov_braking->decel * tau * tau / 2.0;
  };
  auto ov_speed = [&](double t) {
    if (t <= t_brake) return v_ov;
    return std::max(0.0, v_ov - spec.ov_braking->decel * (t - t_brake));
  };
  const double t_cross = static_cast<double>(*crossing) * spec.dt;
  const auto& ac = av[*crossing];
  const double av_front = max_along_x(oriented_box(Pose2D(ac.x, ac.y, ac.heading), spec.av_dims));
  const double ov_x0 = av_front + spec.ov_start_offset + spec.ov_dims.length / 2.0 + ov_travel(t_cross);

  std::vector<ActorState> states;
  states.reserve(3 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    ActorState a;
    a.actor_id = "av";
    a.role = Role::AV;
    a.t = t;
    a.pose = Pose2D(av[k].x, av[k].y, av[k].heading);
    a.dims = spec.av_dims;
    a.speed = av[k].speed;
    states.push_back(a);

    ActorState b;
    b.actor_id = "vbp";
    b.role = Role::VBP;
    b.t = t;
    b.pose = Pose2D(spec.vbp_position + spec.v_vbp * t, own_y, 0.0);
    b.dims = {spec.vbp_length, spec.vbp_width};
    b.speed = spec.v_vbp;
    states.push_back(b);

    bool hidden = false;
    if (spec.occlusion) {
      const auto& f = spec.occlusion->flicker_steps;
      hidden = t < visible_from - 1e-9 || std::find(f.begin(), f.end(), k) != f.end();
    }
    if (hidden) continue;
    ActorState o;
    o.actor_id = "ov";
    o.role = Role::OV;
    o.t = t;
    o.pose = Pose2D(ov_x0 - ov_travel(t), -own_y, std::numbers::pi);
    o.dims = spec.ov_dims;
    o.speed = ov_speed(t);
    states.push_back(o);
  }
  out.trace = make_trace(std::move(states));
  return out;
}

CameraCalibration synthetic_calibration(const ScenarioSpec& spec) {
  return {1200.0, 1.8, spec.lane_width, spec.lane_width * 100.0, 640.0};
}

std::vector<DetectionRecord> detections(const ScenarioSpec& spec, const Scenario& scenario) {
  const auto cal = synthetic_calibration(spec);
  const double px_per_m = cal.lane_width_px / cal.lane_width_real;
  const auto& steps = scenario.trace.steps;
  std::vector<DetectionRecord> out;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& step = steps[k];
    const ActorState* av = find_role(step, Role::AV);
    if (!av) continue;
    const std::size_t a = k + 1 < steps.size() ? k : k - 1;
    const ActorState* av0 = find_role(steps[a], Role::AV);
    const ActorState* av1 = a + 1 < steps.size() ? find_role(steps[a + 1], Role::AV) : nullptr;
    DetectionRecord lane;
    lane.frame_index = static_cast<long>(k);
    lane.t = step.t;
    lane.actor_class = ActorClass::lane_marking;
    lane.box_centre_px = cal.frame_centre_px + av->pose.y * px_per_m;
    if (av0 && av1) lane.speed_mps = (av1->pose.x - av0->pose.x) / (steps[a + 1].t - steps[a].t);
    out.push_back(lane);

    const double av_front = av->pose.x + av->dims.length / 2.0;
    for (Role role : {Role::VBP, Role::OV}) {
      const ActorState* s = find_role(step, role);
      if (!s) continue;
      const double near = s->pose.x - s->dims.length / 2.0;
      const double gap = near - av_front;
      if (!(gap > 0.0)) continue;
      DetectionRecord r;
      r.frame_index = static_cast<long>(k);
      r.t = step.t;
      r.actor_class = role == Role::VBP && s->dims.length > 6.0 ? ActorClass::goods_vehicle : ActorClass::car;
      r.box_width_px = cal.c * cal.assumed_vehicle_width / gap;
      r.box_centre_px = cal.frame_centre_px + (av->pose.y - s->pose.y) * px_per_m;
      r.role_hint = role;
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace hcmon
