#include <gtest/gtest.h>

#include <cmath>

#include "hcmon/engine.hpp"
#include "hcmon/rulepack.hpp"
#include "hcmon/scenario.hpp"

using namespace hcmon;
using rulepack::kDangerSpaceIds;

namespace {

EvalConfig config(const RoadMap& map, const std::string& profile = "nominal") {
  EvalConfig cfg;
  cfg.map = &map;
  cfg.profile = default_profiles().get(profile);
  cfg.calibration = default_profiles().calibration;
  return cfg;
}

const Verdict& only(const std::vector<Verdict>& v, const std::string& id) {
  const Verdict* found = nullptr;
  for (const auto& x : v) {
    if (x.assertion_id == id) {
      EXPECT_EQ(found, nullptr) << "more than one verdict for " << id;
      found = &x;
    }
  }
  if (!found) throw std::runtime_error("no verdict for " + id);
  return *found;
}

std::optional<double> first_fail(const std::vector<Verdict>& v, const std::string& id) {
  for (const auto& x : v) {
    if (x.assertion_id == id && x.result == Result::fail) return x.t;
  }
  return std::nullopt;
}

ActorState actor(const std::string& id, Role role, double x, double y, double h, double speed) {
  ActorState s;
  s.actor_id = id;
  s.role = role;
  s.pose = Pose2D(x, y, h);
  s.dims = {4.0, 1.8};
  s.speed = speed;
  return s;
}

// Single step with the AV on the centre line `gap` metres behind the VBP.
Result pull_out_result(double gap, const RoadMap& map, double* measured = nullptr) {
  const auto av = actor("av", Role::AV, 48, 0.5, 0, 11.176);
  const auto vbp = actor("vbp", Role::VBP, 50 + gap + 2, 1.825, 0, 0.0);
  const auto plan = rulepack::plan_for({rulepack::kRule163PullOut});
  const auto v = evaluate(plan, make_trace({av, vbp}), config(map));
  if (measured) *measured = std::get<double>(v.at(0).detail.at("measured"));
  return v.at(0).result;
}

struct GridRow {
  const char* preset;
  double da;
  Result relaxed, nominal, aggressive;
};

const GridRow kGrid[] = {
    {"safe", 76.43, Result::fail, Result::pass, Result::pass},
    {"near_miss", 58.33, Result::fail, Result::fail, Result::pass},
    {"collision", 35.63, Result::fail, Result::fail, Result::fail},
};

}  // namespace

TEST(Rule162, ProfileByPresetGrid) {
  const auto plan = rulepack::plan_for({rulepack::kRule162});
  for (const auto& row : kGrid) {
    const Scenario sc = generate(preset(row.preset));
    const Result want[] = {row.relaxed, row.nominal, row.aggressive};
    const char* names[] = {"relaxed", "nominal", "aggressive"};
    for (int p = 0; p < 3; ++p) {
      const auto v = evaluate(plan, sc.trace, config(sc.map, names[p]));
      const Verdict& r = only(v, rulepack::kRule162);
      EXPECT_EQ(r.result, want[p]) << row.preset << " " << names[p];
      EXPECT_NEAR(std::get<double>(r.detail.at("da")), row.da, 0.01);
    }
  }
}

TEST(Rule163PullOut, SeparationExamples) {
  const RoadMap map = straight_two_lane_road(150, 3.65);
  double measured = 0;
  EXPECT_EQ(pull_out_result(20.0, map, &measured), Result::pass);
  EXPECT_NEAR(measured, 20.0, 1e-9);
  EXPECT_EQ(pull_out_result(10.0, map), Result::fail);

  // Nudge the VBP until the measured separation equals the threshold exactly.
  const double threshold = danger_space_length(Mps{11.176});
  EXPECT_NEAR(threshold, 16.658, 1e-9);
  double gap = threshold;
  bool tie = false;
  for (int k = 0; k < 64 && !tie; ++k) {
    pull_out_result(gap, map, &measured);
    if (measured == threshold) {
      tie = true;
    } else {
      gap = std::nextafter(gap, measured > threshold ? 0.0 : 100.0);
    }
  }
  ASSERT_TRUE(tie);
  EXPECT_EQ(pull_out_result(gap, map), Result::fail);
}

TEST(Rule163PullOut, GeneratedScenariosPass) {
  const auto plan = rulepack::plan_for({rulepack::kRule163PullOut});
  for (const char* name : {"safe", "near_miss", "collision"}) {
    const Scenario sc = generate(preset(name));
    const Verdict& v = only(evaluate(plan, sc.trace, config(sc.map)), rulepack::kRule163PullOut);
    EXPECT_EQ(v.result, Result::pass) << name;
  }
}

TEST(Rule163CutIn, Examples) {
  const auto plan = rulepack::plan_for({rulepack::kRule163CutIn});
  const Scenario sc = generate(preset("safe"));
  EvalConfig cfg = config(sc.map);
  const Verdict& ok = only(evaluate(plan, sc.trace, cfg), rulepack::kRule163CutIn);
  EXPECT_EQ(ok.result, Result::pass);
  const double measured = std::get<double>(ok.detail.at("measured"));
  EXPECT_GE(measured, cfg.profile.cut_in_clearance);

  cfg.profile.cut_in_clearance = measured + 0.1;
  EXPECT_EQ(only(evaluate(plan, sc.trace, cfg), rulepack::kRule163CutIn).result, Result::fail);

  const Scenario ab = generate(preset("occlusion_abort"));
  EXPECT_EQ(only(evaluate(plan, ab.trace, config(ab.map)), rulepack::kRule163CutIn).result,
            Result::not_applicable);
}

TEST(Stages, SafeScenarioThreeContiguousIntervals) {
  const Scenario sc = generate(preset("safe"));
  const auto st = rulepack::detect_stages(sc.trace, sc.map);
  ASSERT_TRUE(st.passing && st.cut_in);
  EXPECT_FALSE(st.abort);
  EXPECT_EQ(st.passing->first, st.pull_out.last + 1);
  EXPECT_EQ(st.cut_in->first, st.passing->last + 1);
  EXPECT_LT(st.pull_out.t_start, st.passing->t_start);
  EXPECT_LT(st.passing->t_end, st.cut_in->t_start);

  // Scan oracle: first step with any AV area in the westbound lane.
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < sc.trace.steps.size() && !first; ++i) {
    const auto* av = sc.trace.steps[i].find("av");
    for (const auto& v : oriented_box(av->pose, av->dims).vertices()) {
      if (v.y < 0) first = i;
    }
  }
  EXPECT_EQ(st.pull_out.first, first);
}

TEST(Stages, OcclusionAbortHasPullOutAndPassingOnly) {
  const Scenario sc = generate(preset("occlusion_abort"));
  const auto st = rulepack::detect_stages(sc.trace, sc.map);
  EXPECT_TRUE(st.passing.has_value());
  EXPECT_FALSE(st.cut_in.has_value());
  EXPECT_TRUE(st.abort.has_value());
}

TEST(Stages, NoManoeuvre) {
  const RoadMap map = straight_two_lane_road(150, 3.65);
  std::vector<ActorState> v;
  for (int k = 0; k < 5; ++k) {
    auto av = actor("av", Role::AV, 10 + k, 1.825, 0, 10);
    av.t = 0.1 * k;
    auto vbp = actor("vbp", Role::VBP, 40, 1.825, 0, 0);
    vbp.t = av.t;
    v.insert(v.end(), {av, vbp});
  }
  try {
    rulepack::detect_stages(make_trace(v), map);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_manoeuvre);
  }
}

TEST(Stages, IntervalsPartitionTheManoeuvre) {
  std::vector<ScenarioSpec> specs;
  for (const auto& name : preset_names()) specs.push_back(preset(name));
  for (double gap : {12.0, 18.0, 25.0}) {
    for (const char* profile : {"relaxed", "aggressive"}) {
      ScenarioSpec s = preset("safe");
      s.pull_out_gap = gap;
      s.profile = default_profiles().get(profile);
      specs.push_back(s);
    }
  }
  for (const auto& spec : specs) {
    const Scenario sc = generate(spec);
    const auto st = rulepack::detect_stages(sc.trace, sc.map);
    std::vector<rulepack::Interval> parts{st.pull_out};
    for (const auto* iv : {&st.passing, &st.cut_in, &st.abort}) {
      if (*iv) parts.push_back(**iv);
    }
    for (std::size_t i = 1; i < parts.size(); ++i) {
      EXPECT_EQ(parts[i].first, parts[i - 1].last + 1) << spec.name;
      EXPECT_LE(parts[i].first, parts[i].last);
    }
    // Manoeuvre end: the first step back in the running lane, or the trace end.
    const std::size_t last = parts.back().last;
    const auto* av = sc.trace.steps[last].find("av");
    const auto box = oriented_box(av->pose, av->dims);
    const bool in_lane = against_lane_area(sc.map, box, av->pose.heading) == 0.0;
    EXPECT_TRUE(in_lane || last + 1 == sc.trace.steps.size()) << spec.name;
    for (std::size_t i = parts.front().first; i < last; ++i) {
      const auto* a = sc.trace.steps[i].find("av");
      EXPECT_GT(against_lane_area(sc.map, oriented_box(a->pose, a->dims), a->pose.heading), 0.0);
    }
  }
}

TEST(DangerSpaces, StageGrid) {
  const Scenario sc = generate(preset("occlusion_abort"));
  EvalConfig cfg = config(sc.map);
  cfg.speed_policy = SpeedPolicy::worst_case;
  const auto plan = dsl::compile_text(rulepack::runtime_pack());
  const auto v = evaluate(plan, sc.trace, cfg);
  const auto st = rulepack::detect_stages(sc.trace, sc.map);
  const Result passing[] = {Result::pass, Result::fail, Result::fail, Result::fail};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(rulepack::aggregate(v, kDangerSpaceIds[i], st.pull_out), Result::pass) << i;
    EXPECT_EQ(rulepack::aggregate(v, kDangerSpaceIds[i], st.passing), passing[i]) << i;
  }
}

TEST(DangerSpaces, FailuresBeginWhenTheOncomingVehicleAppears) {
  const ScenarioSpec spec = preset("occlusion_abort");
  const Scenario sc = generate(spec);
  EvalConfig cfg = config(sc.map);
  cfg.speed_policy = SpeedPolicy::worst_case;
  const auto v = evaluate(dsl::compile_text(rulepack::runtime_pack()), sc.trace, cfg);
  EXPECT_FALSE(first_fail(v, kDangerSpaceIds[0]));
  for (int i = 1; i < 4; ++i) {
    ASSERT_TRUE(first_fail(v, kDangerSpaceIds[i]));
    EXPECT_NEAR(*first_fail(v, kDangerSpaceIds[i]), spec.occlusion->visible_from_t, 1e-9);
  }
}

TEST(DangerSpaces, OverlapOfDangerSpacesPrecedesOccupancy) {
  ScenarioSpec spec = preset("occlusion_abort");
  spec.occlusion.reset();
  spec.abort.reset();
  spec.ov_braking.reset();
  spec.ov_start_offset = 150;
  const Scenario sc = generate(spec);
  EvalConfig cfg = config(sc.map);
  cfg.speed_policy = SpeedPolicy::worst_case;
  const auto v = evaluate(dsl::compile_text(rulepack::runtime_pack()), sc.trace, cfg);
  const auto f4 = first_fail(v, kDangerSpaceIds[3]);
  const auto f2 = first_fail(v, kDangerSpaceIds[1]);
  const auto f3 = first_fail(v, kDangerSpaceIds[2]);
  ASSERT_TRUE(f4 && f2 && f3);
  EXPECT_LT(*f4, *f2);
  EXPECT_LT(*f4, *f3);
}

TEST(Accessors, DeclarationsMatchPacks) {
  EXPECT_EQ(rulepack::rule162_sda_assertion().type, dsl::AssertionType::execution);
  EXPECT_EQ(rulepack::rule162_sda_assertion().mode, dsl::RefMode::first);
  EXPECT_EQ(rulepack::rule163_pullout_separation_assertion().id, rulepack::kRule163PullOut);
  EXPECT_EQ(rulepack::rule163_cut_in_clearance_assertion().id, rulepack::kRule163CutIn);
  const auto ds = rulepack::danger_space_assertions();
  ASSERT_EQ(ds.size(), 4u);
  for (const auto& a : ds) EXPECT_EQ(a.type, dsl::AssertionType::invariant);
  EXPECT_THROW(rulepack::plan_for({"nope"}), Error);
}
