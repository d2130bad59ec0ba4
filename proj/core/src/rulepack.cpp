#include "hcmon/rulepack.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "embedded.hpp"
#include "hcmon/error.hpp"

namespace hcmon::rulepack {

const char* simulation_pack() { return embedded::kSimulationPack; }
const char* runtime_pack() { return embedded::kRuntimePack; }
const char* profiles_json() { return embedded::kProfiles; }

namespace {

dsl::AssertionDecl find_decl(const char* pack, const std::string& id) {
  const auto doc = dsl::parse(pack);
  for (const auto& item : doc.items) {
    if (!item.is_const && item.assertion.id == id) return item.assertion;
  }
  throw Error(ErrorKind::not_found, "rulepack has no assertion '" + id + "'");
}

}  // namespace

dsl::AssertionDecl rule162_sda_assertion() { return find_decl(simulation_pack(), kRule162); }
dsl::AssertionDecl rule163_pullout_separation_assertion() {
  return find_decl(simulation_pack(), kRule163PullOut);
}
dsl::AssertionDecl rule163_cut_in_clearance_assertion() {
  return find_decl(simulation_pack(), kRule163CutIn);
}

std::vector<dsl::AssertionDecl> danger_space_assertions() {
  std::vector<dsl::AssertionDecl> out;
  for (const char* id : kDangerSpaceIds) out.push_back(find_decl(runtime_pack(), id));
  return out;
}

dsl::Plan plan_for(const std::vector<std::string>& ids) {
  dsl::Document doc;
  for (const auto& id : ids) {
    dsl::Item item;
    try {
      item.assertion = find_decl(simulation_pack(), id);
    } catch (const Error&) {
      item.assertion = find_decl(runtime_pack(), id);
    }
    doc.items.push_back(std::move(item));
  }
  return dsl::compile(doc);
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::pull_out: return "pull_out";
    case Stage::passing: return "passing";
    case Stage::cut_in: return "cut_in";
    case Stage::abort: return "abort";
  }
  return "?";
}

namespace {

std::pair<double, double> extent(const ConvexPolygon& p, Vec2 axis) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& v : p.vertices()) {
    lo = std::min(lo, dot(v, axis));
    hi = std::max(hi, dot(v, axis));
  }
  return {lo, hi};
}

Interval make_interval(const Trace& trace, std::size_t first, std::size_t last) {
  return {first, last, trace.steps[first].t, trace.steps[last].t};
}

}  // namespace

StageIntervals detect_stages(const Trace& trace, const RoadMap& map) {
  const std::size_t n = trace.steps.size();
  struct Sample {
    bool av = false;
    bool vbp = false;
    bool oncoming = false;
    bool turning_back = false;
    double av_rear = 0.0, vbp_rear = 0.0, vbp_front = 0.0;
  };
  std::vector<Sample> s(n);
  bool any_vbp = false;
  for (std::size_t i = 0; i < n; ++i) {
    const ActorState* av = find_role(trace.steps[i], Role::AV);
    const ActorState* vbp = find_role(trace.steps[i], Role::VBP);
    if (!av) continue;
    s[i].av = true;
    const auto box = oriented_box(av->pose, av->dims);
    s[i].oncoming = against_lane_area(map, box, av->pose.heading) > 0.0;
    s[i].turning_back =
        dot(av->pose.forward(), oncoming_normal(map, av->pose.position(), av->pose.heading)) < 0.0;
    const Vec2 axis = lane_axis(map, *av);
    s[i].av_rear = extent(box, axis).first;
    if (vbp) {
      any_vbp = true;
      s[i].vbp = true;
      const auto e = extent(oriented_box(vbp->pose, vbp->dims), axis);
      s[i].vbp_rear = e.first;
      s[i].vbp_front = e.second;
    }
  }
  if (!any_vbp) throw Error(ErrorKind::not_found, "trace has no VBP");

  std::optional<std::size_t> start;
  for (std::size_t i = 0; i < n && !start; ++i) {
    if (s[i].av && s[i].oncoming) start = i;
  }
  if (!start) throw Error(ErrorKind::no_manoeuvre, "AV never leaves its running lane");

  std::size_t end = *start;
  for (std::size_t i = *start + 1; i < n; ++i) {
    if (!s[i].av) break;
    end = i;
    if (!s[i].oncoming) break;
  }

  std::optional<std::size_t> passed;
  std::optional<std::size_t> turn;
  for (std::size_t i = *start; i <= end; ++i) {
    if (!turn && s[i].turning_back && s[i].oncoming) turn = i;
    if (!passed && !turn && s[i].vbp && s[i].av_rear >= s[i].vbp_rear) passed = i;
  }

  StageIntervals out;
  const std::size_t pull_end =
      passed ? (*passed > *start ? *passed - 1 : *start) : (turn ? *turn - 1 : end);
  out.pull_out = make_interval(trace, *start, std::max(*start, pull_end));
  if (passed) {
    const std::size_t pass_first = std::max(*passed, out.pull_out.last + 1);
    const std::size_t pass_last = turn ? *turn - 1 : end;
    if (pass_first <= pass_last) out.passing = make_interval(trace, pass_first, pass_last);
  }
  if (turn) {
    const std::size_t first = std::max(*turn, out.passing ? out.passing->last + 1 : out.pull_out.last + 1);
    if (first <= end) {
      const Interval iv = make_interval(trace, first, end);
      if (s[*turn].vbp && s[*turn].av_rear >= s[*turn].vbp_front) {
        out.cut_in = iv;
      } else {
        out.abort = iv;
      }
    }
  }
  return out;
}

std::string stages_to_json(const StageIntervals& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  auto put = [&](const char* name, const std::optional<Interval>& iv) {
    if (!iv) {
      j[name] = nullptr;
      return;
    }
    j[name] = {{"t_start", iv->t_start}, {"t_end", iv->t_end},
               {"first_step", iv->first}, {"last_step", iv->last}};
  };
  put("pull_out", s.pull_out);
  put("passing", s.passing);
  put("cut_in", s.cut_in);
  put("abort", s.abort);
  return j.dump();
}

Result aggregate(const std::vector<Verdict>& verdicts, const std::string& assertion_id,
                 const std::optional<Interval>& stage) {
  if (!stage) return Result::not_applicable;
  bool any_pass = false;
  for (const auto& v : verdicts) {
    if (v.assertion_id != assertion_id) continue;
    if (v.t < stage->t_start || v.t > stage->t_end) continue;
    if (v.result == Result::fail) return Result::fail;
    if (v.result == Result::pass) any_pass = true;
  }
  return any_pass ? Result::pass : Result::not_applicable;
}

}  // namespace hcmon::rulepack
