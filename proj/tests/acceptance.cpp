// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "fixtures.hpp"
#include "generators.hpp"
#include "hcmon/dsl.hpp"
#include "hcmon/engine.hpp"
#include "hcmon/rulepack.hpp"
#include "hcmon/scenario.hpp"
#include "hcmon/zones.hpp"
#include "hcmon_cli/commands.hpp"
#include "oracles.hpp"

using namespace hcmon;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %d %-28s %s  %s\n", n, name, ok ? "PASS" : "FAIL", detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(prec);
  s << v;
  return s.str();
}

std::vector<Verdict> sorted(std::vector<Verdict> v) {
  std::sort(v.begin(), v.end(), verdict_less);
  return v;
}

void overtake_grid() {
  const fs::path dir = fs::temp_directory_path() / ("hcmon_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path rules = dir / "rule162.hca";
  {
    dsl::Document doc;
    doc.items.push_back(dsl::Item{false, {}, rulepack::rule162_sda_assertion()});
    std::ofstream(rules) << dsl::format(doc);
  }
  struct Row {
    const char* preset;
    double da;
    const char* want;
  } rows[] = {{"safe", 76.43, "FPP"}, {"near_miss", 58.33, "FFP"}, {"collision", 35.63, "FFF"}};

  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string grid;
  std::ostringstream sink;
  for (const auto& r : rows) {
    ok = cli::cmd_gen(r.preset, dir.string(), sink, sink) == 0 && ok;
    std::string got;
    for (const char* profile : {"relaxed", "nominal", "aggressive"}) {
      cli::RunConfig rc;
      rc.map_path = (dir / (std::string(r.preset) + ".map.json")).string();
      rc.trace_path = (dir / (std::string(r.preset) + ".trace.jsonl")).string();
      rc.assertion_paths = {rules.string()};
      rc.profile_name = profile;
      std::ostringstream out, err;
      const int code = cli::cmd_check(rc, out, err);
      const Verdict v = verdict_from_json(out.str().substr(0, out.str().find('\n')));
      got += v.result == Result::pass ? 'P' : 'F';
      ok = ok && code == (v.result == Result::pass ? 0 : 1);
      ok = ok && std::abs(std::get<double>(v.detail.at("da")) - r.da) <= 0.01;
    }
    ok = ok && got == r.want;
    grid += std::string(r.preset) + "=" + got + " ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < 5.0;
  fs::remove_all(dir);
  report(1, "overtake-grid", ok, grid + "runtime=" + fmt(secs, 2) + "s");
}

void sda_calibration() {
  const auto& ps = default_profiles();
  const Mps v = to_mps(Mph{25});
  const auto g = ps.geometry(v, Mps{0}, v);
  const double want[] = {101.39, 63.73, 40.02};
  const char* names[] = {"relaxed", "nominal", "aggressive"};
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const auto s = safe_distance_ahead(ps.get(names[i]), g);
    ok = ok && std::abs(s.total - want[i]) <= 0.5 && std::abs(s.ds_ov - oracle::stopping_distance_mph(25)) <= 0.001 &&
         std::abs(s.ds_ov - 16.658) <= 0.001;
    detail += std::string(names[i]) + "=" + fmt(s.total, 2) + " ";
  }
  detail += "ds_ov=" + fmt(safe_distance_ahead(ps.get("nominal"), g).ds_ov);
  report(2, "sda-calibration", ok, detail);
}

struct OcclusionRun {
  ScenarioSpec spec = preset("occlusion_abort");
  Scenario sc = generate(spec);
  std::vector<Verdict> verdicts;
  OcclusionRun() {
    EvalConfig cfg;
    cfg.map = &sc.map;
    cfg.profile = default_profiles().get("nominal");
    cfg.speed_policy = SpeedPolicy::worst_case;
    verdicts = evaluate(dsl::compile_text(rulepack::runtime_pack()), sc.trace, cfg);
  }
};

void danger_space_stages(const OcclusionRun& o) {
  const auto st = rulepack::detect_stages(o.sc.trace, o.sc.map);
  const Result want_pass[] = {Result::pass, Result::fail, Result::fail, Result::fail};
  int cells = 0;
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    const Result a = rulepack::aggregate(o.verdicts, rulepack::kDangerSpaceIds[i], st.pull_out);
    const Result b = rulepack::aggregate(o.verdicts, rulepack::kDangerSpaceIds[i], st.passing);
    cells += (a == Result::pass) + (b == want_pass[i]);
    detail += std::string("(") + to_string(a) + "," + to_string(b) + ") ";
  }
  report(3, "danger-space-stages", cells == 8, detail + std::to_string(cells) + "/8");
}

int flicker_changes(const std::vector<Verdict>& v, const std::string& id, double lo, double hi) {
  int n = 0;
  std::optional<Result> prev;
  for (const auto& x : v) {
    if (x.assertion_id != id) continue;
    if (prev && *prev != x.result && x.t >= lo - 1e-9 && x.t <= hi + 1e-9) ++n;
    prev = x.result;
  }
  return n;
}

void timeline(const OcclusionRun& o) {
  const double dt = o.spec.dt;
  const double visible = o.spec.occlusion->visible_from_t;
  const double expect = o.sc.pull_out_t + 6.0;
  bool ok = std::abs(visible - expect) <= dt + 1e-9;
  std::string detail = "visible=" + fmt(visible, 2);
  for (const char* id : rulepack::kDangerSpaceIds) {
    for (const auto& v : o.verdicts) {
      if (v.assertion_id == id && v.result == Result::fail) {
        ok = ok && std::abs(v.t - expect) <= dt + 1e-9;
        detail += std::string(" ") + id + "@" + fmt(v.t, 2);
        break;
      }
    }
  }
  const auto& steps = o.sc.trace.steps;
  const double lo = steps[o.spec.occlusion->flicker_steps.front()].t;
  const double hi = steps[o.spec.occlusion->flicker_steps.back() + 1].t;
  const auto raw = debounce(o.verdicts, 1);
  const auto smooth = debounce(o.verdicts, 3);
  for (int i = 1; i < 4; ++i) {
    const int n1 = flicker_changes(raw, rulepack::kDangerSpaceIds[i], lo, hi);
    const int n3 = flicker_changes(smooth, rulepack::kDangerSpaceIds[i], lo, hi);
    ok = ok && n1 == 2 && n3 == 0;
    if (i == 1) detail += " flicker n=1:" + std::to_string(n1) + " n=3:" + std::to_string(n3);
  }
  report(4, "occlusion-timeline", ok, detail);
}

void stopping_distance_sweep() {
  const double s20 = stopping_distance(Mph{20}).total;
  const double s70 = stopping_distance(Mph{70}).total;
  bool ok = std::abs(s20 - 11.838) <= 1e-6 && std::abs(s70 - 93.788) <= 1e-6 &&
            std::abs(s20 - oracle::stopping_distance_mph(20)) <= 1e-9;
  double prev = -1;
  int samples = 0;
  for (int i = 0; i <= 700; ++i, ++samples) {
    const double d = stopping_distance(Mph{i * 0.1}).total;
    ok = ok && d > prev;
    prev = d;
  }
  report(5, "stopping-distance", ok,
         "sd(20)=" + fmt(s20) + " sd(70)=" + fmt(s70) + " sweep=" + std::to_string(samples));
}

void stream_equivalence() {
  std::mt19937 rng(6);
  const auto plan = dsl::compile_text(fixture::kAllKinds);
  const RoadMap map = straight_two_lane_road(300.0, 3.65);
  std::uniform_int_distribution<int> len(1, 80);
  int same = 0;
  const int traces = 150;
  std::size_t verdicts = 0;
  for (int i = 0; i < traces; ++i) {
    const Trace tr = gen::random_trace(rng, static_cast<std::size_t>(len(rng)), 0.05);
    EvalConfig cfg;
    cfg.map = &map;
    cfg.profile = default_profiles().get("nominal");
    cfg.strict_windows = i % 2 == 0;
    const auto batch = evaluate(plan, tr, cfg);
    StreamingEngine eng(plan, cfg);
    std::vector<Verdict> streamed;
    for (const auto& s : tr.steps) {
      auto v = eng.push(s);
      streamed.insert(streamed.end(), v.begin(), v.end());
    }
    auto tail = eng.finish();
    streamed.insert(streamed.end(), tail.begin(), tail.end());
    same += sorted(batch) == sorted(streamed);
    verdicts += batch.size();
  }
  report(6, "batch-stream-equivalence", same == traces,
         std::to_string(same) + "/" + std::to_string(traces) + " traces, " +
             std::to_string(plan.assertions.size()) + " kinds, " + std::to_string(verdicts) + " verdicts");
}

void geometry_oracles() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> off(-1.5, 1.5), rot(-3.1, 3.1), far(-50, 50);
  double worst_d = 0, worst_area = 0, worst_rigid = 0;
  int pairs = 0, area_pairs = 0;
  for (; pairs < 1000; ++pairs) {
    const auto a = gen::convex_valid(rng, {0, 0}, 1.0);
    const auto b = gen::convex_valid(rng, {off(rng) * 2, off(rng) * 2}, 1.0);
    const ConvexPolygon pa(a), pb(b);
    worst_d = std::max(worst_d, std::abs(min_distance(pa, pb) - oracle::brute_distance(a, b)));

    const double area = overlap_area(pa, pb);
    const double mc = oracle::stratified_overlap(a, b, 512, rng);
    const double smaller = std::min(oracle::shoelace(a), oracle::shoelace(b));
    if (area >= 0.01 * smaller) {
      ++area_pairs;
      worst_area = std::max(worst_area, std::abs(area - mc) / area);
    } else if (mc > 0.02 * smaller) {
      worst_area = std::max(worst_area, 1.0);
    }

    const double r = rot(rng);
    const Vec2 t{far(rng), far(rng)};
    const auto ta = transformed(pa, r, t), tb = transformed(pb, r, t);
    worst_rigid = std::max(worst_rigid, std::abs(min_distance(pa, pb) - min_distance(ta, tb)));
    worst_rigid = std::max(worst_rigid, std::abs(area - overlap_area(ta, tb)));
  }
  const bool ok = worst_d <= 1e-9 && worst_area <= 0.01 && worst_rigid <= 1e-9;
  std::ostringstream d;
  d << pairs << " pairs (" << area_pairs << " overlapping) max|dist err|=" << worst_d
    << " max area rel err=" << fmt(100 * worst_area, 3) << "% max rigid err=" << worst_rigid;
  report(7, "geometry-oracles", ok, d.str());
}

void dsl_round_trip() {
  bool ok = true;
  for (const char* text : {rulepack::simulation_pack(), rulepack::runtime_pack()}) {
    const auto d = dsl::parse(text);
    ok = ok && dsl::ast_equal(dsl::parse(dsl::format(d)), d);
  }
  std::mt19937 rng(8);
  int fixed = 0;
  for (int i = 0; i < 500; ++i) {
    const auto d = dsl::parse(gen::random_document(rng));
    const auto again = dsl::parse(dsl::format(d));
    fixed += dsl::ast_equal(again, d) && dsl::format(again) == dsl::format(d);
  }
  int located = 0, accepted = 0, unlocated = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::string text = gen::mutate(gen::random_document(rng), rng);
    try {
      dsl::compile(dsl::parse(text));
      ++accepted;
    } catch (const LocatedError& e) {
      e.location().find(':') != std::string::npos ? ++located : ++unlocated;
    } catch (...) {
      ++unlocated;
    }
  }
  ok = ok && fixed == 500 && unlocated == 0;
  report(8, "dsl-round-trip", ok,
         "fuzzed fixed points " + std::to_string(fixed) + "/500, malformed located " +
             std::to_string(located) + " still-valid " + std::to_string(accepted) + " unlocated " +
             std::to_string(unlocated));
}

void zones() {
  const RoadMap map = straight_two_lane_road(400, 3.65);
  int agree = 0, cells = 0;
  for (int j = 0; j < 10; ++j) {
    DrivingProfile p = default_profiles().get("nominal");
    p.pull_out_angle = p.cut_in_angle = 0.08 + 0.06 * j;
    const auto g = default_profiles().geometry(to_mps(Mph{25}), Mps{0}, to_mps(Mph{25}));
    const double sda = safe_distance_ahead(p, g).total;
    for (int i = 0; i < 10; ++i, ++cells) {
      const double da = i == 5 ? sda : sda * (0.6 + 0.1 * i);
      const Verdict v = fixture::rule162_at(da, p, map);
      const bool zone_a = classify(std::get<double>(v.detail.at("da")),
                                   std::get<double>(v.detail.at("sda")), 0.0) == Zone::A;
      agree += zone_a == (v.result == Result::fail);
    }
  }
  const auto& ps = default_profiles();
  const auto g = ps.geometry(to_mps(Mph{25}), Mps{0}, to_mps(Mph{25}));
  const auto safe = optimal_profile(76.43, ps.profiles, g);
  const auto collision = optimal_profile(35.63, ps.profiles, g);
  const bool ok = agree == cells && safe && safe->profile.name == ProfileName::nominal && !collision;
  report(9, "zone-consistency", ok,
         std::to_string(agree) + "/" + std::to_string(cells) + " cells, optimal(76.43)=" +
             (safe ? safe->profile.label : "none") + " optimal(35.63)=" +
             (collision ? collision->profile.label : "none"));
}

}  // namespace

int main() {
  overtake_grid();
  sda_calibration();
  const OcclusionRun occlusion;
  danger_space_stages(occlusion);
  timeline(occlusion);
  stopping_distance_sweep();
  stream_equivalence();
  geometry_oracles();
  dsl_round_trip();
  zones();
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
