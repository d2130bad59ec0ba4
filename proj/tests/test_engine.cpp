#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "hcmon/engine.hpp"
#include "hcmon/rulepack.hpp"
#include "hcmon/scenario.hpp"

using namespace hcmon;

namespace {

const RoadMap& road() {
  static const RoadMap m = straight_two_lane_road(300.0, 3.65);
  return m;
}

EvalConfig config() {
  EvalConfig cfg;
  cfg.map = &road();
  cfg.profile = default_profiles().get("nominal");
  cfg.calibration = default_profiles().calibration;
  return cfg;
}

ActorState actor(const std::string& id, Role role, double t, double x, double y, double h = 0) {
  ActorState s;
  s.actor_id = id;
  s.role = role;
  s.t = t;
  s.pose = Pose2D(x, y, h);
  s.dims = {4.0, 1.8};
  return s;
}

// AV driving at 10 m/s, OV approaching; `flag` steps add a VBP marker actor.
Trace simple_trace(int steps, double dt, const std::vector<int>& marked = {}) {
  std::vector<ActorState> v;
  for (int k = 0; k < steps; ++k) {
    const double t = dt * k;
    v.push_back(actor("av", Role::AV, t, 10 + 10 * t, 1.825));
    v.push_back(actor("ov", Role::OV, t, 200 - 10 * t, -1.825, std::numbers::pi));
    if (std::find(marked.begin(), marked.end(), k) != marked.end()) {
      v.push_back(actor("vbp", Role::VBP, t, 150, 1.825));
    }
  }
  return make_trace(std::move(v));
}

std::vector<Verdict> stream(const dsl::Plan& plan, const Trace& tr, const EvalConfig& cfg,
                            std::vector<std::vector<Verdict>>* per_push = nullptr) {
  StreamingEngine eng(plan, cfg);
  std::vector<Verdict> out;
  for (const auto& s : tr.steps) {
    auto v = eng.push(s);
    if (per_push) per_push->push_back(v);
    out.insert(out.end(), v.begin(), v.end());
  }
  auto tail = eng.finish();
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

std::vector<Verdict> sorted(std::vector<Verdict> v) {
  std::sort(v.begin(), v.end(), verdict_less);
  return v;
}

std::vector<Verdict> results(std::initializer_list<Result> rs) {
  std::vector<Verdict> v;
  double t = 0;
  for (Result r : rs) v.push_back(Verdict{"x", t += 0.1, r, {}});
  return v;
}


}  // namespace

TEST(Evaluate, InvariantAllPass) {
  const auto plan = dsl::compile_text(
      R"(assertion a { odd: road type: invariant condition: speed_of("av") >= 0 })");
  const auto v = evaluate(plan, simple_trace(10, 0.1), config());
  ASSERT_EQ(v.size(), 10u);
  for (const auto& x : v) EXPECT_EQ(x.result, Result::pass);
}

TEST(Evaluate, ExecutionTiesFail) {
  // DA equals the threshold exactly: the assertion fails.
  std::vector<ActorState> v{actor("av", Role::AV, 0, 8, 1.825),
                            actor("ov", Role::OV, 0, 8 + 4 + 64, -1.825, std::numbers::pi)};
  const Trace tr = make_trace(v);
  const double da = distance_ahead(tr.steps[0], road());
  const auto plan = dsl::compile_text(
      std::string("const need = 64m\n") +
      R"(assertion a { odd: road type: execution reference: present("ov") condition: distance_ahead("av", "ov") > need })");
  ASSERT_DOUBLE_EQ(plan.assertions[0].condition.kids[1].value, da);
  const auto out = evaluate(plan, tr, config());
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].result, Result::fail);
  EXPECT_EQ(std::get<double>(out[0].detail.at("measured")), da);
  EXPECT_EQ(std::get<double>(out[0].detail.at("threshold")), da);
}

TEST(Evaluate, Rule162TieAgainstSdaFails) {
  const auto& ps = default_profiles();
  const auto sda = safe_distance_ahead(ps.get("nominal"),
                                       ps.geometry(to_mps(Mph{25}), Mps{0}, to_mps(Mph{25})));
  // Single step: speeds come from the recorded values.
  auto av = actor("av", Role::AV, 0, 8, 0.5);
  auto vbp = actor("vbp", Role::VBP, 0, 40, 1.825);
  auto ov = actor("ov", Role::OV, 0, 10 + sda.total + 2, -1.825, std::numbers::pi);
  av.speed = 11.176;
  vbp.speed = 0.0;
  ov.speed = 11.176;
  const Trace tr = make_trace({av, vbp, ov});
  const auto plan = dsl::compile_text(rulepack::simulation_pack());
  EvalConfig cfg = config();
  const auto out = evaluate(*std::find_if(plan.assertions.begin(), plan.assertions.end(),
                                          [](auto& a) { return a.id == rulepack::kRule162; }),
                            tr, cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(std::get<double>(out[0].detail.at("sda")), sda.total, 1e-9);
  EXPECT_NEAR(std::get<double>(out[0].detail.at("da")), sda.total, 1e-9);
  EXPECT_EQ(out[0].result, Result::fail);
}

TEST(Evaluate, OddExcludedGivesSingleNotApplicable) {
  const auto plan = dsl::compile_text(
      R"(assertion a { odd: highway type: invariant condition: speed_of("av") >= 0 })");
  EvalConfig cfg = config();
  cfg.active_odd = std::set<std::string>{"urban"};
  const auto v = evaluate(plan, simple_trace(10, 0.1), cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].result, Result::not_applicable);
}

TEST(ReferencePoints, Examples) {
  const Scenario sc = generate(preset("safe"));
  EvalConfig cfg = config();
  cfg.map = &sc.map;
  const auto plan = dsl::compile_text(rulepack::simulation_pack());
  const auto refs = find_reference_points(plan.assertions[0], sc.trace, cfg);
  ASSERT_EQ(refs.size(), 1u);
  std::optional<double> scan;
  for (const auto& s : sc.trace.steps) {
    const auto* av = s.find("av");
    if (crosses_centreline(sc.map, oriented_box(av->pose, av->dims))) {
      scan = s.t;
      break;
    }
  }
  EXPECT_EQ(refs[0], scan);

  const auto never = dsl::compile_text(
      R"(assertion a { odd: road type: execution reference: false condition: true })");
  EXPECT_TRUE(find_reference_points(never.assertions[0], sc.trace, cfg).empty());
  const auto v = evaluate(never, sc.trace, cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].result, Result::not_applicable);

  const auto always = dsl::compile_text(
      R"(assertion a { odd: road type: execution mode: all reference: true condition: true })");
  EXPECT_EQ(find_reference_points(always.assertions[0], sc.trace, cfg).size(), sc.trace.steps.size());
}

TEST(Evaluate, TemporalAndPhysicalWindows) {
  const Trace tr = simple_trace(30, 0.1, {10});
  const auto plan = dsl::compile_text(R"(
assertion post_ok { odd: r type: post temporal window: 0.5s reference: present("vbp") condition: present("ov") }
assertion post_bad { odd: r type: post temporal window: 0.5s reference: present("vbp") condition: not present("vbp") }
assertion pre_bad { odd: r type: pre temporal window: 0.5s reference: present("vbp") condition: present("vbp") }
assertion phys { odd: r type: post physical offset: 0.34s reference: present("vbp") condition: true }
assertion late { odd: r type: post temporal window: 5s reference: present("vbp") condition: true }
)");
  EvalConfig cfg = config();
  auto v = evaluate(plan, tr, cfg);
  ASSERT_EQ(v.size(), 5u);
  auto by_id = [&](const char* id) {
    return *std::find_if(v.begin(), v.end(), [&](const Verdict& x) { return x.assertion_id == id; });
  };
  EXPECT_EQ(by_id("post_ok").result, Result::pass);
  EXPECT_EQ(std::get<double>(by_id("post_ok").detail.at("window_steps")), 5.0);
  EXPECT_EQ(by_id("post_bad").result, Result::pass);
  EXPECT_EQ(by_id("pre_bad").result, Result::fail);
  EXPECT_NEAR(std::get<double>(by_id("phys").detail.at("evaluated_t")), 1.3, 1e-9);
  EXPECT_EQ(by_id("late").result, Result::fail);
  EXPECT_EQ(std::get<std::string>(by_id("late").detail.at("reason")), "insufficient-data");
  cfg.strict_windows = false;
  v = evaluate(plan, tr, cfg);
  EXPECT_EQ(by_id("late").result, Result::not_applicable);
}

TEST(Streaming, MatchesBatchOnSafeTrace) {
  const Scenario sc = generate(preset("safe"));
  EvalConfig cfg = config();
  cfg.map = &sc.map;
  for (const char* text : {rulepack::simulation_pack(), rulepack::runtime_pack()}) {
    const auto plan = dsl::compile_text(text);
    EXPECT_EQ(sorted(evaluate(plan, sc.trace, cfg)), sorted(stream(plan, sc.trace, cfg)));
  }
}

TEST(Streaming, MatchesBatchOnRandomTracesAllKinds) {
  std::mt19937 rng(101);
  const auto plan = dsl::compile_text(fixture::kAllKinds);
  std::uniform_int_distribution<int> len(1, 60);
  for (int i = 0; i < 120; ++i) {
    const Trace tr = gen::random_trace(rng, static_cast<std::size_t>(len(rng)), 0.05);
    for (bool strict : {true, false}) {
      EvalConfig cfg = config();
      cfg.strict_windows = strict;
      ASSERT_EQ(sorted(evaluate(plan, tr, cfg)), sorted(stream(plan, tr, cfg))) << "trace " << i;
    }
  }
}

TEST(Streaming, InvariantEmittedInSameStep) {
  const auto plan = dsl::compile_text(
      R"(assertion a { odd: r type: invariant condition: present("ov") })");
  std::vector<std::vector<Verdict>> pushes;
  stream(plan, simple_trace(5, 0.1), config(), &pushes);
  for (std::size_t k = 0; k < pushes.size(); ++k) {
    ASSERT_EQ(pushes[k].size(), 1u);
    EXPECT_NEAR(pushes[k][0].t, 0.1 * static_cast<double>(k), 1e-12);
  }
}

TEST(Streaming, PostWindowEmittedWhenWindowCloses) {
  const auto plan = dsl::compile_text(
      R"(assertion a { odd: r type: post temporal window: 2s reference: present("vbp") condition: present("ov") })");
  const Trace tr = simple_trace(50, 0.1, {5});
  std::vector<std::vector<Verdict>> pushes;
  stream(plan, tr, config(), &pushes);
  for (std::size_t k = 0; k < pushes.size(); ++k) {
    if (tr.steps[k].t < 2.5 - 1e-9) {
      EXPECT_TRUE(pushes[k].empty()) << k;
    } else if (k == 25) {
      ASSERT_EQ(pushes[k].size(), 1u);
      EXPECT_NEAR(pushes[k][0].t, 0.5, 1e-12);
    }
  }
}

TEST(Streaming, BoundedHistoryAndTimeRegression) {
  const auto plan = dsl::compile_text(
      R"(assertion a { odd: r type: pre temporal window: 0.3s reference: present("vbp") condition: present("ov") })");
  StreamingEngine eng(plan, config());
  const Trace tr = simple_trace(200, 0.1, {150});
  for (const auto& s : tr.steps) {
    eng.push(s);
    EXPECT_LE(eng.retained_steps(), 10u);
  }
  try {
    eng.push(tr.steps.front());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::stream);
  }
}

TEST(Semantics, InvariantEqualsAlwaysTrueExecution) {
  std::mt19937 rng(103);
  const auto inv = dsl::compile_text(
      R"(assertion a { odd: r type: invariant condition: min_distance(box_of("av"), box_of("ov")) > 20 and speed_of("av") > 9 })");
  const auto exe = dsl::compile_text(
      R"(assertion a { odd: r type: execution mode: all reference: true condition: min_distance(box_of("av"), box_of("ov")) > 20 and speed_of("av") > 9 })");
  for (int i = 0; i < 50; ++i) {
    const Trace tr = gen::random_trace(rng, 40, 0.05);
    EXPECT_EQ(evaluate(inv, tr, config()), evaluate(exe, tr, config()));
  }
}

TEST(Semantics, OddFilteringOnlyTogglesApplicability) {
  std::mt19937 rng(107);
  const auto plan = dsl::compile_text(fixture::kAllKinds);
  for (int i = 0; i < 30; ++i) {
    const Trace tr = gen::random_trace(rng, 40, 0.05);
    EvalConfig open = config();
    EvalConfig on = config();
    on.active_odd = std::set<std::string>{"road", "urban"};
    EvalConfig off = config();
    off.active_odd = std::set<std::string>{"urban"};
    EXPECT_EQ(evaluate(plan, tr, open), evaluate(plan, tr, on));
    for (const auto& v : evaluate(plan, tr, off)) EXPECT_EQ(v.result, Result::not_applicable);
  }
}

TEST(Debounce, Examples) {
  using R = Result;
  const auto in = results({R::pass, R::fail, R::pass, R::fail, R::fail, R::fail});
  const auto out = debounce(in, 3);
  const std::vector<R> want{R::pass, R::pass, R::pass, R::pass, R::pass, R::fail};
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].result, want[i]) << i;
  EXPECT_EQ(std::get<std::string>(out[1].detail.at("raw_result")), "fail");
  EXPECT_EQ(out[5].detail.count("raw_result"), 0u);
  EXPECT_EQ(debounce(in, 1), in);
  EXPECT_THROW(debounce(in, 0), Error);
}

TEST(Debounce, FlickerSuppressed) {
  using R = Result;
  const auto in = results({R::pass, R::pass, R::fail, R::fail, R::fail, R::pass, R::pass, R::fail,
                           R::fail, R::fail});
  const auto out = debounce(in, 3);
  int changes = 0;
  for (std::size_t i = 1; i < out.size(); ++i) changes += out[i].result != out[i - 1].result;
  EXPECT_EQ(changes, 1);
  EXPECT_EQ(out[5].result, R::fail);
  EXPECT_EQ(out[6].result, R::fail);
}

TEST(Debounce, Idempotent) {
  std::mt19937 rng(109);
  std::uniform_int_distribution<int> r(0, 2), n(1, 5);
  for (int i = 0; i < 300; ++i) {
    std::vector<Verdict> v;
    for (int k = 0; k < 40; ++k) {
      v.push_back(Verdict{k % 3 == 0 ? "a" : "b", 0.05 * k, static_cast<Result>(r(rng)), {}});
    }
    const int w = n(rng);
    const auto once = debounce(v, w);
    EXPECT_EQ(debounce(once, w), once);
  }
}

TEST(VerdictJson, RoundTrip) {
  Verdict v{"rule162_sda", 1.1, Result::fail, {{"da", 58.33}, {"reason", std::string("x")}}};
  EXPECT_EQ(verdict_from_json(to_jsonl(v)), v);
}
