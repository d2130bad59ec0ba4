#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hcmon/engine.hpp"

namespace hcmon::cli {

enum class OutputFormat { jsonl, csv, summary };

inline constexpr int kExitOk = 0;
inline constexpr int kExitSafetyFail = 1;
inline constexpr int kExitUsage = 2;

// Assertion paths may name the shipped packs as "@sim" and "@runtime".
struct RunConfig {
  std::string map_path;
  std::optional<std::string> trace_path;
  bool stream = false;
  std::vector<std::string> assertion_paths;
  std::optional<std::set<std::string>> active_odd;
  std::string profile_name = "nominal";
  std::optional<std::string> profiles_path;
  int debounce_n = 1;
  bool strict_windows = true;
  SpeedPolicy speed_policy = SpeedPolicy::measured;
  OutputFormat output = OutputFormat::jsonl;
  std::optional<std::string> summary_out;
  bool stages = false;
  std::optional<std::string> stages_json;
};

struct ZonesConfig {
  std::optional<std::string> verdicts_path;  // stdin when empty
  std::optional<double> da;
  std::optional<std::string> profiles_path;
  double margin = 0.1;
  double ttc_conservative = 2.5;
  double v_av_mph = 25.0;
  double v_ov_mph = 25.0;
  double v_vbp_mph = 0.0;
};

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_monitor(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_gen(const std::string& preset_name, const std::string& out_dir, std::ostream& out,
            std::ostream& err);
int cmd_estimate(const std::string& detections_path, const std::string& calibration_path,
                 const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err);
int cmd_zones(const ZonesConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

std::string format_csv_header();
std::string format_csv(const Verdict& v);

struct AssertionSummary {
  std::string id;
  dsl::Severity severity = dsl::Severity::safety;
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t not_applicable = 0;
  std::optional<double> first_fail_t;
  Result overall = Result::not_applicable;
};

std::vector<AssertionSummary> summarize(const dsl::Plan& plan, const std::vector<Verdict>& verdicts);
std::string format_summary(const std::vector<AssertionSummary>& s);
// 1 when any safety assertion has a failing verdict.
int exit_code_for(const std::vector<AssertionSummary>& s);

}  // namespace hcmon::cli
