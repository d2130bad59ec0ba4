#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hcmon/dsl.hpp"
#include "hcmon/engine.hpp"
#include "hcmon/trace.hpp"
#include "hcmon/worldmap.hpp"

namespace hcmon::rulepack {

// Shipped rule files, also installed under share/hcmon.
const char* simulation_pack();
const char* runtime_pack();
const char* profiles_json();

inline constexpr const char* kRule162 = "rule162_sda";
inline constexpr const char* kRule163PullOut = "rule163_pull_out_separation";
inline constexpr const char* kRule163CutIn = "rule163_cut_in_clearance";
inline constexpr const char* kDangerSpaceIds[4] = {
    "ds1_vbp_outside_ds_av", "ds2_ov_outside_ds_av", "ds3_av_outside_ds_ov",
    "ds4_ds_av_clear_of_ds_ov"};

dsl::AssertionDecl rule162_sda_assertion();
dsl::AssertionDecl rule163_pullout_separation_assertion();
dsl::AssertionDecl rule163_cut_in_clearance_assertion();
std::vector<dsl::AssertionDecl> danger_space_assertions();

// Compiles the named assertions out of the shipped packs.
dsl::Plan plan_for(const std::vector<std::string>& ids);

struct Interval {
  std::size_t first = 0;  // inclusive step indices
  std::size_t last = 0;
  double t_start = 0.0;
  double t_end = 0.0;
};

struct StageIntervals {
  Interval pull_out;
  std::optional<Interval> passing;
  std::optional<Interval> cut_in;
  std::optional<Interval> abort;
};

StageIntervals detect_stages(const Trace& trace, const RoadMap& map);
std::string stages_to_json(const StageIntervals& s);

enum class Stage { pull_out, passing, cut_in, abort };
const char* to_string(Stage s);

// Stage result: fail if any verdict of `assertion_id` inside the stage fails,
// pass if some pass, not_applicable if the stage is absent or has no verdicts.
Result aggregate(const std::vector<Verdict>& verdicts, const std::string& assertion_id,
                 const std::optional<Interval>& stage);

}  // namespace hcmon::rulepack
