#pragma once

// Small hand-built situations shared by unit and acceptance tests.

#include <numbers>
#include <string>

#include "hcmon/engine.hpp"
#include "hcmon/rulepack.hpp"

namespace fixture {

inline hcmon::ActorState actor(const std::string& id, hcmon::Role role, double x, double y,
                               double heading, double speed) {
  hcmon::ActorState s;
  s.actor_id = id;
  s.role = role;
  s.pose = hcmon::Pose2D(x, y, heading);
  s.dims = {4.0, 1.8};
  s.speed = speed;
  return s;
}

// One step with the AV on the centre line at 25 mph, a parked VBP and the OV
// `da` metres ahead at 25 mph; returns the rule162 verdict under `profile`.
inline hcmon::Verdict rule162_at(double da, const hcmon::DrivingProfile& profile,
                                 const hcmon::RoadMap& map) {
  using hcmon::Role;
  const double v = 11.176;
  const auto av = actor("av", Role::AV, 8, 0.5, 0, v);
  const auto vbp = actor("vbp", Role::VBP, 40, 1.825, 0, 0.0);
  const auto ov = actor("ov", Role::OV, 10 + da + 2, -1.825, std::numbers::pi, v);
  hcmon::EvalConfig cfg;
  cfg.map = &map;
  cfg.profile = profile;
  cfg.calibration = hcmon::default_profiles().calibration;
  static const auto plan = hcmon::rulepack::plan_for({hcmon::rulepack::kRule162});
  return hcmon::evaluate(plan, hcmon::make_trace({av, vbp, ov}), cfg).at(0);
}

// One assertion of every kind over the random trace actors.
inline const char* kAllKinds = R"(
const gap = 30m
assertion inv { odd: road type: invariant condition: speed_of("av") >= 0 }
assertion exe { odd: road type: execution mode: all reference: present("vbp")
  condition: min_distance(box_of("av"), box_of("ov")) > gap }
assertion post_t { odd: road type: post temporal window: 0.3s mode: all reference: present("vbp")
  condition: distance_ahead("av", "ov") > 40m }
assertion pre_t { odd: road type: pre temporal window: 250ms reference: crosses_centreline("av")
  condition: speed_of("av") > 9 }
assertion post_p { odd: road type: post physical offset: 0.2s mode: all reference: present("vbp")
  condition: accel_of("av") < 100 }
assertion pre_p { odd: road type: pre physical offset: 0.1s mode: all reference: present("vbp")
  condition: within_lane("av") }
)";

}  // namespace fixture
