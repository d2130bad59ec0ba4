#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "hcmon/scenario.hpp"
#include "hcmon_cli/commands.hpp"

namespace {

using hcmon::cli::OutputFormat;
using hcmon::cli::RunConfig;

void add_run_options(CLI::App* cmd, RunConfig& rc, std::vector<std::string>& odd,
                     std::string& format, std::string& policy) {
  cmd->add_option("--map", rc.map_path, "Road map (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-a,--assertions", rc.assertion_paths,
                  "Assertion files; @sim and @runtime name the shipped packs (default @sim)");
  cmd->add_option("--odd", odd, "Active ODD tags (comma separated)")->delimiter(',');
  cmd->add_option("--profile", rc.profile_name, "Driving profile")->capture_default_str();
  cmd->add_option("--profiles", rc.profiles_path, "Profile calibration file (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--debounce", rc.debounce_n, "Consecutive steps before a published change")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--lenient", "Report not_applicable instead of fail when a window lacks data");
  cmd->add_option("--format", format, "Verdict output")
      ->check(CLI::IsMember({"jsonl", "csv", "summary"}))
      ->capture_default_str();
  cmd->add_option("--speed-policy", policy, "Speeds used for danger spaces and SDA")
      ->check(CLI::IsMember({"measured", "worst_case"}))
      ->capture_default_str();
  cmd->add_option("--summary-out", rc.summary_out, "Write the summary to a file");
}

void finish_run_options(CLI::App* cmd, RunConfig& rc, const std::vector<std::string>& odd,
                        const std::string& format, const std::string& policy) {
  if (cmd->count("--odd")) rc.active_odd = std::set<std::string>(odd.begin(), odd.end());
  rc.strict_windows = cmd->count("--lenient") == 0;
  static const std::map<std::string, OutputFormat> formats{
      {"jsonl", OutputFormat::jsonl}, {"csv", OutputFormat::csv}, {"summary", OutputFormat::summary}};
  rc.output = formats.at(format);
  rc.speed_policy =
      policy == "worst_case" ? hcmon::SpeedPolicy::worst_case : hcmon::SpeedPolicy::measured;
}

}  // namespace

int main(int argc, char** argv) {
  std::cout.setf(std::ios::unitbuf);
  CLI::App app{"hcmon: highway-code assertion monitor"};
  app.require_subcommand(1);

  RunConfig check_rc;
  std::vector<std::string> check_odd;
  std::string check_format = "jsonl";
  std::string check_policy = "measured";
  std::string trace_path;
  auto* check = app.add_subcommand("check", "Check a recorded trace");
  add_run_options(check, check_rc, check_odd, check_format, check_policy);
  check->add_option("--trace", trace_path, "Trace (JSON lines)")->required()->check(CLI::ExistingFile);
  check->add_flag("--stages", check_rc.stages, "Report per-stage results of the overtaking manoeuvre");
  check->add_option("--stages-json", check_rc.stages_json, "Write the stage intervals as JSON");

  RunConfig mon_rc;
  std::vector<std::string> mon_odd;
  std::string mon_format = "jsonl";
  std::string mon_policy = "measured";
  auto* monitor = app.add_subcommand("monitor", "Check trace records streamed on standard input");
  add_run_options(monitor, mon_rc, mon_odd, mon_format, mon_policy);

  std::string preset_name;
  std::string out_dir = ".";
  auto* gen = app.add_subcommand("gen", "Generate a preset scenario");
  gen->add_option("preset", preset_name, "Preset name")->required();
  gen->add_option("-o,--out-dir", out_dir, "Output directory")->capture_default_str();

  std::string det_path;
  std::string cal_path;
  std::string est_out;
  auto* estimate = app.add_subcommand("estimate", "Convert detections into a trace");
  estimate->add_option("--detections", det_path, "Detections (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("--calibration", cal_path, "Camera calibration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("-o,--out", est_out, "Output trace file (default stdout)");

  hcmon::cli::ZonesConfig zc;
  std::string verdicts_path;
  auto* zones = app.add_subcommand("zones", "Zone report from rule162 verdicts, or profile zones for one DA");
  zones->add_option("--verdicts", verdicts_path, "Verdicts (JSON lines; default stdin)");
  zones->add_option("--da", zc.da, "Distance ahead to classify for each profile");
  zones->add_option("--profiles", zc.profiles_path, "Profile calibration file")->check(CLI::ExistingFile);
  zones->add_option("--margin", zc.margin, "Zone B width as a fraction of SDA")->capture_default_str();
  zones->add_option("--ttc", zc.ttc_conservative, "Zone D TTC threshold (s)")->capture_default_str();
  zones->add_option("--v-av", zc.v_av_mph, "AV speed (mph) for --da")->capture_default_str();
  zones->add_option("--v-ov", zc.v_ov_mph, "OV speed (mph) for --da")->capture_default_str();
  zones->add_option("--v-vbp", zc.v_vbp_mph, "VBP speed (mph) for --da")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hcmon::cli::kExitUsage;
  }

  if (check->parsed()) {
    finish_run_options(check, check_rc, check_odd, check_format, check_policy);
    check_rc.trace_path = trace_path;
    return hcmon::cli::cmd_check(check_rc, std::cout, std::cerr);
  }
  if (monitor->parsed()) {
    finish_run_options(monitor, mon_rc, mon_odd, mon_format, mon_policy);
    mon_rc.stream = true;
    return hcmon::cli::cmd_monitor(mon_rc, std::cin, std::cout, std::cerr);
  }
  if (gen->parsed()) return hcmon::cli::cmd_gen(preset_name, out_dir, std::cout, std::cerr);
  if (estimate->parsed()) {
    return hcmon::cli::cmd_estimate(det_path, cal_path,
                                    est_out.empty() ? std::nullopt : std::optional<std::string>(est_out),
                                    std::cout, std::cerr);
  }
  if (!verdicts_path.empty()) zc.verdicts_path = verdicts_path;
  return hcmon::cli::cmd_zones(zc, std::cin, std::cout, std::cerr);
}
