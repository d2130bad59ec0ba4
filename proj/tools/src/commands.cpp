#include "hcmon_cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hcmon/perception.hpp"
#include "hcmon/rulepack.hpp"
#include "hcmon/scenario.hpp"
#include "hcmon/zones.hpp"

namespace hcmon::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::not_found, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dsl::Plan load_plan(const std::vector<std::string>& paths) {
  const std::vector<std::string> defaults{"@sim"};
  dsl::Plan plan;
  std::set<std::string> ids;
  for (const auto& path : paths.empty() ? defaults : paths) {
    std::string text;
    if (path == "@sim") {
      text = rulepack::simulation_pack();
    } else if (path == "@runtime") {
      text = rulepack::runtime_pack();
    } else {
      text = read_file(path);
    }
    dsl::Plan part;
    try {
      part = dsl::compile_text(text);
    } catch (const dsl::TypeError& e) {
      std::string msg;
      for (const auto& d : e.diagnostics()) {
        if (!msg.empty()) msg += "\n";
        msg += path + ":" + dsl::format_location(d.span) + ": " + d.message;
      }
      throw Error(e.kind(), msg);
    } catch (const LocatedError& e) {
      throw Error(e.kind(), path + ":" + e.what());
    }
    for (auto& a : part.assertions) {
      if (!ids.insert(a.id).second) {
        throw Error(ErrorKind::validation, "assertion '" + a.id + "' defined in more than one file");
      }
      plan.assertions.push_back(std::move(a));
    }
  }
  return plan;
}

EvalConfig make_config(const RunConfig& rc, const RoadMap* map) {
  const ProfileSet profiles =
      rc.profiles_path ? load_profiles_file(*rc.profiles_path) : default_profiles();
  EvalConfig cfg;
  cfg.map = map;
  cfg.profile = profiles.get(rc.profile_name);
  cfg.calibration = profiles.calibration;
  cfg.speed_policy = rc.speed_policy;
  cfg.strict_windows = rc.strict_windows;
  cfg.active_odd = rc.active_odd;
  return cfg;
}

void write_verdict(std::ostream& out, OutputFormat fmt, const Verdict& v) {
  if (fmt == OutputFormat::jsonl) {
    out << to_jsonl(v) << '\n';
  } else if (fmt == OutputFormat::csv) {
    out << format_csv(v) << '\n';
  }
}

std::string stage_summary(const rulepack::StageIntervals& st, const dsl::Plan& plan,
                          const std::vector<Verdict>& verdicts) {
  std::ostringstream out;
  out.precision(12);
  const std::pair<const char*, std::optional<rulepack::Interval>> cols[] = {
      {"pull_out", st.pull_out}, {"passing", st.passing}, {"cut_in", st.cut_in}, {"abort", st.abort}};
  out << "\nstage,t_start,t_end\n";
  for (const auto& [name, iv] : cols) {
    if (iv) out << name << ',' << iv->t_start << ',' << iv->t_end << '\n';
  }
  out << "\nassertion_id,pull_out,passing,cut_in,abort\n";
  for (const auto& a : plan.assertions) {
    out << a.id;
    for (const auto& [name, iv] : cols) out << ',' << to_string(rulepack::aggregate(verdicts, a.id, iv));
    out << '\n';
  }
  return out.str();
}

void emit_summary(const RunConfig& rc, const std::string& text, std::ostream& out, std::ostream& err) {
  if (rc.summary_out) {
    std::ofstream f(*rc.summary_out);
    if (!f) throw Error(ErrorKind::not_found, "cannot write '" + *rc.summary_out + "'");
    f << text;
  }
  if (rc.output == OutputFormat::summary) {
    out << text;
  } else if (!rc.summary_out) {
    err << text;
  }
}

int report_error(std::ostream& err, const std::exception& e) {
  err << "hcmon: error: " << e.what() << '\n';
  return kExitUsage;
}

}  // namespace

std::string format_csv_header() { return "t,assertion_id,result,measured,threshold"; }

std::string format_csv(const Verdict& v) {
  std::ostringstream out;
  out.precision(12);
  out << v.t << ',' << v.assertion_id << ',' << to_string(v.result) << ',';
  auto num = [&](const char* key) {
    auto it = v.detail.find(key);
    if (it != v.detail.end()) {
      if (const double* d = std::get_if<double>(&it->second)) out << *d;
    }
  };
  num("measured");
  out << ',';
  num("threshold");
  return out.str();
}

std::vector<AssertionSummary> summarize(const dsl::Plan& plan, const std::vector<Verdict>& verdicts) {
  std::vector<AssertionSummary> out;
  std::map<std::string, std::size_t> index;
  for (const auto& a : plan.assertions) {
    index[a.id] = out.size();
    AssertionSummary s;
    s.id = a.id;
    s.severity = a.severity;
    out.push_back(s);
  }
  for (const auto& v : verdicts) {
    auto it = index.find(v.assertion_id);
    if (it == index.end()) continue;
    auto& s = out[it->second];
    switch (v.result) {
      case Result::pass: ++s.pass; break;
      case Result::fail:
        ++s.fail;
        if (!s.first_fail_t || v.t < *s.first_fail_t) s.first_fail_t = v.t;
        break;
      case Result::not_applicable: ++s.not_applicable; break;
    }
  }
  for (auto& s : out) {
    s.overall = s.fail ? Result::fail : (s.pass ? Result::pass : Result::not_applicable);
  }
  return out;
}

std::string format_summary(const std::vector<AssertionSummary>& summary) {
  std::ostringstream out;
  out.precision(12);
  out << "assertion_id,severity,result,pass_count,fail_count,not_applicable_count,first_fail_t\n";
  for (const auto& s : summary) {
    out << s.id << ',' << dsl::to_string(s.severity) << ',' << to_string(s.overall) << ',' << s.pass
        << ',' << s.fail << ',' << s.not_applicable << ',';
    if (s.first_fail_t) out << *s.first_fail_t;
    out << '\n';
  }
  return out.str();
}

int exit_code_for(const std::vector<AssertionSummary>& summary) {
  for (const auto& s : summary) {
    if (s.severity == dsl::Severity::safety && s.fail > 0) return kExitSafetyFail;
  }
  return kExitOk;
}

int cmd_check(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  try {
    if (!rc.trace_path) throw Error(ErrorKind::invalid_argument, "check needs a trace file");
    const RoadMap map = load_map_file(rc.map_path);
    const Trace trace = load_trace_file(*rc.trace_path);
    const dsl::Plan plan = load_plan(rc.assertion_paths);
    const EvalConfig cfg = make_config(rc, &map);
    const auto verdicts = debounce(evaluate(plan, trace, cfg), rc.debounce_n);
    if (rc.output == OutputFormat::csv) out << format_csv_header() << '\n';
    for (const auto& v : verdicts) write_verdict(out, rc.output, v);
    out.flush();
    const auto summary = summarize(plan, verdicts);
    std::string text = format_summary(summary);
    if (rc.stages || rc.stages_json) {
      const auto st = rulepack::detect_stages(trace, map);
      if (rc.stages) text += stage_summary(st, plan, verdicts);
      if (rc.stages_json) {
        std::ofstream f(*rc.stages_json);
        if (!f) throw Error(ErrorKind::not_found, "cannot write '" + *rc.stages_json + "'");
        f << rulepack::stages_to_json(st) << '\n';
      }
    }
    emit_summary(rc, text, out, err);
    return exit_code_for(summary);
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_monitor(const RunConfig& rc, std::istream& in, std::ostream& out, std::ostream& err) {
  std::unique_ptr<RoadMap> map;
  dsl::Plan plan;
  std::unique_ptr<StreamingEngine> engine;
  try {
    map = std::make_unique<RoadMap>(load_map_file(rc.map_path));
    plan = load_plan(rc.assertion_paths);
    engine = std::make_unique<StreamingEngine>(plan, make_config(rc, map.get()));
  } catch (const std::exception& e) {
    return report_error(err, e);
  }

  VerdictDebouncer debouncer(rc.debounce_n);
  std::vector<Verdict> all;
  if (rc.output == OutputFormat::csv) out << format_csv_header() << std::endl;
  auto publish = [&](std::vector<Verdict> batch) {
    for (auto& v : batch) {
      v = debouncer.apply(std::move(v));
      write_verdict(out, rc.output, v);
      all.push_back(std::move(v));
    }
    out.flush();
  };
  auto finish = [&](int code) {
    const auto summary = summarize(plan, all);
    emit_summary(rc, format_summary(summary), out, err);
    return code == kExitOk ? exit_code_for(summary) : code;
  };

  std::optional<Step> pending;
  std::string line;
  std::size_t index = 0;
  try {
    while (std::getline(in, line)) {
      ++index;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ActorState s = parse_record(line, index);
      if (pending && s.t < pending->t) {
        publish(engine->finish());
        err << "hcmon: error: record " << index << ": time regression (t=" << s.t << " after t="
            << pending->t << ")\n";
        return finish(kExitSafetyFail);
      }
      if (pending && s.t > pending->t) {
        publish(engine->push(std::move(*pending)));
        pending.reset();
      }
      if (!pending) {
        pending = Step{};
        pending->t = s.t;
      }
      const std::string id = s.actor_id;
      if (!pending->actors.emplace(id, std::move(s)).second) {
        throw LocatedError(ErrorKind::validation, "record " + std::to_string(index),
                           "duplicate actor '" + id + "' at one time step");
      }
    }
    if (pending) publish(engine->push(std::move(*pending)));
    publish(engine->finish());
  } catch (const Error& e) {
    out.flush();
    err << "hcmon: error: " << e.what() << '\n';
    return finish(e.kind() == ErrorKind::stream ? kExitSafetyFail : kExitUsage);
  }
  return finish(kExitOk);
}

int cmd_gen(const std::string& preset_name, const std::string& out_dir, std::ostream& out,
            std::ostream& err) {
  try {
    const ScenarioSpec spec = preset(preset_name);
    const Scenario sc = generate(spec);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    auto write = [&](const std::string& name, const std::string& content) {
      const auto path = dir / name;
      std::ofstream f(path, std::ios::binary);
      if (!f) throw Error(ErrorKind::not_found, "cannot write '" + path.string() + "'");
      f << content;
      out << path.string() << '\n';
    };
    write(preset_name + ".map.json", serialize_map(sc.map));
    write(preset_name + ".trace.jsonl", serialize_trace(sc.trace));
    if (spec.occlusion) {
      std::string det;
      for (const auto& r : detections(spec, sc)) det += serialize_detection(r) + "\n";
      write(preset_name + ".detections.jsonl", det);
      write(preset_name + ".calibration.json", serialize_calibration(synthetic_calibration(spec)));
    }
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_estimate(const std::string& detections_path, const std::string& calibration_path,
                 const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(detections_path);
    if (!in) throw Error(ErrorKind::not_found, "cannot open '" + detections_path + "'");
    const auto records = load_detections(in);
    const auto cal = load_calibration_file(calibration_path);
    const std::string text = serialize_trace(boxes_to_trace(records, cal));
    if (out_path) {
      std::ofstream f(*out_path, std::ios::binary);
      if (!f) throw Error(ErrorKind::not_found, "cannot write '" + *out_path + "'");
      f << text;
    } else {
      out << text;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "hcmon: error: " << e.what() << '\n';
    return e.kind() == ErrorKind::stream ? kExitSafetyFail : kExitUsage;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

int cmd_zones(const ZonesConfig& zc, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    ZoneThresholds th{zc.margin, zc.ttc_conservative};
    th.validate();
    const ProfileSet profiles = zc.profiles_path ? load_profiles_file(*zc.profiles_path) : default_profiles();
    if (zc.da) {
      const auto geom = profiles.geometry(to_mps(Mph{zc.v_av_mph}), to_mps(Mph{zc.v_vbp_mph}),
                                          to_mps(Mph{zc.v_ov_mph}));
      out << "profile,sda,ttc,zone\n";
      for (const auto& p : profiles.profiles) {
        const auto sda = safe_distance_ahead(p, geom);
        const double t = manoeuvre_ttc(*zc.da, sda);
        out << p.label << ',' << sda.total << ',' << t << ',' << to_string(classify(*zc.da, sda.total, t, th))
            << '\n';
      }
      const auto best = optimal_profile(*zc.da, profiles.profiles, geom, th);
      if (best) {
        out << "optimal," << best->profile.label << ",zone=" << to_string(best->zone) << '\n';
      } else {
        out << "optimal,none\n";
      }
      return kExitOk;
    }

    std::ifstream file;
    if (zc.verdicts_path) {
      file.open(*zc.verdicts_path);
      if (!file) throw Error(ErrorKind::not_found, "cannot open '" + *zc.verdicts_path + "'");
    }
    std::istream& src = zc.verdicts_path ? static_cast<std::istream&>(file) : in;
    std::vector<ZoneRow> rows;
    std::string line;
    std::size_t index = 0;
    while (std::getline(src, line)) {
      ++index;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Verdict v;
      try {
        v = verdict_from_json(line);
      } catch (const std::exception& e) {
        throw LocatedError(ErrorKind::parse, "verdict " + std::to_string(index), e.what());
      }
      auto num = [&](const char* key) -> std::optional<double> {
        auto it = v.detail.find(key);
        if (it == v.detail.end()) return std::nullopt;
        if (const double* d = std::get_if<double>(&it->second)) return *d;
        return std::nullopt;
      };
      const auto da = num("da");
      const auto sda = num("sda");
      const auto closing = num("closing_speed");
      const auto time = num("manoeuvre_time");
      if (!da || !sda || !closing || !time) continue;
      ZoneRow row;
      row.t = v.t;
      row.assertion_id = v.assertion_id;
      row.da = *da;
      row.sda = *sda;
      row.ttc = ttc(*da, *closing) - *time;
      row.zone = classify(*da, *sda, row.ttc, th);
      rows.push_back(row);
    }
    out << zone_report_csv(rows);
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

}  // namespace hcmon::cli
