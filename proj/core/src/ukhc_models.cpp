#include "hcmon/ukhc_models.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "embedded.hpp"
#include "hcmon/error.hpp"

namespace hcmon {

using nlohmann::json;

StoppingDistance stopping_distance(Mph v, const StoppingCoefficients& k) {
  if (!(v.value >= 0.0) || !std::isfinite(v.value)) {
    throw Error(ErrorKind::invalid_argument, "speed must be non-negative");
  }
  StoppingDistance sd;
  sd.thinking = k.a * v.value;
  sd.braking = k.b + k.c * v.value + k.d * v.value * v.value;
  sd.total = sd.thinking + sd.braking;
  return sd;
}

double danger_space_length(Mph v, const StoppingCoefficients& k) {
  return stopping_distance(v, k).total;
}

double danger_space_length(Mps v, const StoppingCoefficients& k) {
  return stopping_distance(to_mph(v), k).total;
}

const char* to_string(ProfileName name) {
  switch (name) {
    case ProfileName::relaxed: return "relaxed";
    case ProfileName::nominal: return "nominal";
    case ProfileName::aggressive: return "aggressive";
    case ProfileName::custom: return "custom";
  }
  return "custom";
}

void DrivingProfile::validate() const {
  if (!(pull_out_clearance >= 0.0) || !(cut_in_clearance >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "profile '" + label + "': clearances must be >= 0");
  }
  const double half_pi = std::numbers::pi / 2;
  if (!(pull_out_angle > 0.0 && pull_out_angle < half_pi) ||
      !(cut_in_angle > 0.0 && cut_in_angle < half_pi)) {
    throw Error(ErrorKind::invalid_argument, "profile '" + label + "': angles must be in (0, pi/2)");
  }
}

ManoeuvreTime manoeuvre_time(const DrivingProfile& p, const ManoeuvreGeometry& g) {
  const double tb = std::tan(p.pull_out_angle);
  const double tc = std::tan(p.cut_in_angle);
  if (!(tb > 0.0) || !(tc > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "profile angle tangent must be positive");
  }
  if (!(g.lateral_offset > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "lateral offset must be positive");
  }
  if (g.v_av.value < 0.0 || g.v_vbp.value < 0.0 || g.v_ov.value < 0.0) {
    throw Error(ErrorKind::invalid_argument, "speeds must be non-negative");
  }
  if (!(g.v_av.value > g.v_vbp.value)) {
    throw Error(ErrorKind::no_overtake_possible, "AV is not faster than the VBP");
  }
  ManoeuvreTime m;
  m.pull_out = g.lateral_offset / (g.v_av.value * tb);
  m.pass = (p.pull_out_clearance + g.vbp_length + p.cut_in_clearance) /
           (g.v_av.value - g.v_vbp.value);
  m.cut_in = g.lateral_offset / (g.v_av.value * tc);
  m.total = m.pull_out + m.pass + m.cut_in;
  return m;
}

SafeDistanceAhead safe_distance_ahead(const DrivingProfile& p, const ManoeuvreGeometry& g,
                                      const StoppingCoefficients& k) {
  SafeDistanceAhead s;
  s.time = manoeuvre_time(p, g);
  s.closing_speed = g.v_av.value + g.v_ov.value;
  s.travel = s.closing_speed * s.time.total;
  s.ds_ov = danger_space_length(g.v_ov, k);
  s.total = s.travel + s.ds_ov;
  return s;
}

double ttc(double gap, double closing_speed) {
  if (!(closing_speed > 0.0)) {
    throw Error(ErrorKind::undefined_ttc, "time to collision undefined for non-positive closing speed");
  }
  return gap / closing_speed;
}

const DrivingProfile& ProfileSet::get(const std::string& label) const {
  for (const auto& p : profiles) {
    if (p.label == label) return p;
  }
  throw Error(ErrorKind::not_found, "unknown driving profile '" + label + "'");
}

namespace {

double num(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw LocatedError(ErrorKind::parse, path, std::string("missing numeric field '") + key + "'");
  }
  return j[key].get<double>();
}

ProfileName name_of(const std::string& s) {
  if (s == "relaxed") return ProfileName::relaxed;
  if (s == "nominal") return ProfileName::nominal;
  if (s == "aggressive") return ProfileName::aggressive;
  return ProfileName::custom;
}

ProfileSet parse_profiles(const json& doc) {
  ProfileSet set;
  if (!doc.is_object()) throw LocatedError(ErrorKind::parse, "$", "expected an object");
  if (doc.contains("calibration")) {
    const auto& c = doc["calibration"];
    set.calibration.lateral_offset = num(c, "lateral_offset_m", "$.calibration");
    set.calibration.vbp_length = num(c, "vbp_length_m", "$.calibration");
  }
  if (!doc.contains("profiles") || !doc["profiles"].is_array()) {
    throw LocatedError(ErrorKind::parse, "$", "missing array 'profiles'");
  }
  const auto& arr = doc["profiles"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "$.profiles[" + std::to_string(i) + "]";
    const auto& j = arr[i];
    if (!j.contains("name") || !j["name"].is_string()) {
      throw LocatedError(ErrorKind::parse, path, "missing string field 'name'");
    }
    DrivingProfile p;
    p.label = j["name"].get<std::string>();
    p.name = name_of(p.label);
    p.pull_out_clearance = num(j, "pull_out_clearance_m", path);
    p.pull_out_angle = num(j, "pull_out_angle_rad", path);
    p.cut_in_clearance = num(j, "cut_in_clearance_m", path);
    p.cut_in_angle = num(j, "cut_in_angle_rad", path);
    try {
      p.validate();
    } catch (const Error& e) {
      throw LocatedError(ErrorKind::validation, path, e.what());
    }
    set.profiles.push_back(p);
  }
  return set;
}

}  // namespace

ProfileSet load_profiles(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LocatedError(ErrorKind::parse, "byte " + std::to_string(e.byte), e.what());
  }
  return parse_profiles(doc);
}

ProfileSet load_profiles_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::not_found, "cannot open profiles file '" + path + "'");
  return load_profiles(in);
}

const ProfileSet& default_profiles() {
  static const ProfileSet set = [] {
    std::istringstream in(embedded::kProfiles);
    return load_profiles(in);
  }();
  return set;
}

}  // namespace hcmon
