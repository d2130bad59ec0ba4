#include "hcmon/perception.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include <json.hpp>

#include "hcmon/error.hpp"

namespace hcmon {

using nlohmann::json;

const char* to_string(ActorClass c) {
  switch (c) {
    case ActorClass::car: return "car";
    case ActorClass::goods_vehicle: return "goods_vehicle";
    case ActorClass::lane_marking: return "lane_marking";
  }
  return "car";
}

void CameraCalibration::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::validation, std::string("calibration field '") + name + "' must be positive");
    }
  };
  positive(c, "c");
  positive(assumed_vehicle_width, "assumed_vehicle_width");
  positive(lane_width_real, "lane_width_real");
  positive(lane_width_px, "lane_width_px");
  positive(frame_centre_px, "frame_centre_px");
}

LongitudinalEstimate longitudinal_distance(const DetectionRecord& rec, const CameraCalibration& cal,
                                           double low_confidence_px) {
  if (!(rec.box_width_px > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "box width must be positive");
  }
  return {cal.c * cal.assumed_vehicle_width / rec.box_width_px, rec.box_width_px < low_confidence_px};
}

double lateral_offset(double d_px, const CameraCalibration& cal) {
  if (!(cal.lane_width_px > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "lane width in pixels must be positive");
  }
  return cal.lane_width_real / cal.lane_width_px * d_px;
}

namespace {

struct Frame {
  double t = 0.0;
  std::vector<const DetectionRecord*> records;
};

}  // namespace

Trace boxes_to_trace(const std::vector<DetectionRecord>& records, const CameraCalibration& cal,
                     const EstimatorConfig& config) {
  cal.validate();
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!frames.empty() && r.t < frames.back().t) {
      throw Error(ErrorKind::stream, "detection " + std::to_string(i) + " at t=" +
                                         std::to_string(r.t) + " is out of order");
    }
    if (frames.empty() || r.t > frames.back().t) frames.push_back({r.t, {}});
    frames.back().records.push_back(&r);
  }

  // AV lateral position and speed per frame.
  const double own_y = cal.lane_width_real / 2.0;
  std::vector<double> av_x(frames.size()), av_y(frames.size()), av_v(frames.size());
  double y = own_y;
  double v = config.av_speed_mps;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    for (const auto* r : frames[k].records) {
      if (r->actor_class != ActorClass::lane_marking) continue;
      // Positive offset is into the oncoming lane, which is y < 0.
      y = -lateral_offset(cal.frame_centre_px - r->box_centre_px, cal);
      if (r->speed_mps) v = *r->speed_mps;
    }
    av_y[k] = y;
    av_v[k] = v;
    av_x[k] = k == 0 ? config.av_start_x
                     : av_x[k - 1] + av_v[k - 1] * (frames[k].t - frames[k - 1].t);
  }

  std::vector<ActorState> states;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    double heading = 0.0;
    if (frames.size() > 1) {
      const std::size_t a = k + 1 < frames.size() ? k : k - 1;
      const double dx = av_x[a + 1] - av_x[a];
      const double dy = av_y[a + 1] - av_y[a];
      if (dx != 0.0 || dy != 0.0) heading = std::atan2(dy, dx);
    }
    ActorState av;
    av.actor_id = "av";
    av.role = Role::AV;
    av.t = frames[k].t;
    av.pose = Pose2D(av_x[k], av_y[k], heading);
    av.dims = config.av_dims;
    av.speed = av_v[k];
    states.push_back(av);

    const double av_front = av_x[k] + config.av_dims.length / 2.0;
    int unknown = 0;
    for (const auto* r : frames[k].records) {
      if (r->actor_class == ActorClass::lane_marking) continue;
      const auto est = longitudinal_distance(*r, cal, config.low_confidence_px);
      const bool goods = r->actor_class == ActorClass::goods_vehicle;
      ActorState s;
      s.role = r->role_hint;
      s.t = frames[k].t;
      s.dims = goods ? config.goods_dims : config.car_dims;
      s.low_confidence = est.low_confidence;
      s.speed = r->speed_mps ? *r->speed_mps : (goods ? config.goods_speed_mps : config.car_speed_mps);
      const double near_x = av_front + est.distance;
      if (r->role_hint == Role::OV) {
        s.actor_id = "ov";
        s.pose = Pose2D(near_x + s.dims.length / 2.0, -own_y, std::numbers::pi);
      } else {
        s.actor_id = r->role_hint == Role::VBP ? "vbp" : "obj" + std::to_string(++unknown);
        s.pose = Pose2D(near_x + s.dims.length / 2.0, own_y, 0.0);
      }
      states.push_back(s);
    }
  }
  return make_trace(std::move(states));
}

namespace {

std::string det_loc(std::size_t index) { return "detection " + std::to_string(index); }

double number(const json& j, const char* key, const std::string& loc) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw LocatedError(ErrorKind::parse, loc, std::string("missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

DetectionRecord parse_detection(const std::string& line, std::size_t index) {
  const auto loc = det_loc(index);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw LocatedError(ErrorKind::parse, loc, e.what());
  }
  if (!j.is_object()) throw LocatedError(ErrorKind::parse, loc, "expected an object");
  DetectionRecord r;
  r.t = number(j, "t", loc);
  r.frame_index = static_cast<long>(number(j, "frame", loc));
  if (!j.contains("class") || !j["class"].is_string()) {
    throw LocatedError(ErrorKind::parse, loc, "missing field 'class'");
  }
  const auto cls = j["class"].get<std::string>();
  if (cls == "car") {
    r.actor_class = ActorClass::car;
  } else if (cls == "goods_vehicle") {
    r.actor_class = ActorClass::goods_vehicle;
  } else if (cls == "lane_marking") {
    r.actor_class = ActorClass::lane_marking;
  } else {
    throw LocatedError(ErrorKind::parse, loc, "unknown class '" + cls + "'");
  }
  r.box_centre_px = number(j, "box_centre_px", loc);
  if (r.actor_class != ActorClass::lane_marking) {
    r.box_width_px = number(j, "box_width_px", loc);
    if (!(r.box_width_px > 0.0)) {
      throw LocatedError(ErrorKind::validation, loc, "box_width_px must be positive");
    }
  } else if (j.contains("box_width_px")) {
    r.box_width_px = number(j, "box_width_px", loc);
  }
  if (j.contains("role_hint") && !j["role_hint"].is_null()) {
    if (!j["role_hint"].is_string()) throw LocatedError(ErrorKind::parse, loc, "role_hint must be a string");
    const auto hint = j["role_hint"].get<std::string>();
    if (hint == "unknown") {
      r.role_hint = Role::other;
    } else {
      auto role = parse_role(hint);
      if (!role || *role == Role::AV) {
        throw LocatedError(ErrorKind::parse, loc, "unknown role_hint '" + hint + "'");
      }
      r.role_hint = *role;
    }
  }
  if (j.contains("speed_mps")) r.speed_mps = number(j, "speed_mps", loc);
  return r;
}

std::vector<DetectionRecord> load_detections(std::istream& in) {
  std::vector<DetectionRecord> out;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    ++index;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_detection(line, index));
  }
  return out;
}

std::string serialize_detection(const DetectionRecord& r) {
  json j = json::object();
  j["t"] = r.t;
  j["frame"] = r.frame_index;
  j["class"] = to_string(r.actor_class);
  if (r.actor_class != ActorClass::lane_marking) j["box_width_px"] = r.box_width_px;
  j["box_centre_px"] = r.box_centre_px;
  if (r.actor_class != ActorClass::lane_marking) {
    j["role_hint"] = r.role_hint == Role::other ? "unknown" : to_string(r.role_hint);
  }
  if (r.speed_mps) j["speed_mps"] = *r.speed_mps;
  return j.dump();
}

CameraCalibration load_calibration(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LocatedError(ErrorKind::parse, "calibration", e.what());
  }
  if (!j.is_object()) throw LocatedError(ErrorKind::parse, "calibration", "expected an object");
  CameraCalibration cal;
  cal.c = number(j, "c", "calibration");
  cal.assumed_vehicle_width = number(j, "assumed_vehicle_width", "calibration");
  cal.lane_width_real = number(j, "lane_width_real", "calibration");
  cal.lane_width_px = number(j, "lane_width_px", "calibration");
  cal.frame_centre_px = number(j, "frame_centre_px", "calibration");
  cal.validate();
  return cal;
}

CameraCalibration load_calibration_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::not_found, "cannot open calibration file '" + path + "'");
  return load_calibration(in);
}

std::string serialize_calibration(const CameraCalibration& cal) {
  json j = json::object();
  j["c"] = cal.c;
  j["assumed_vehicle_width"] = cal.assumed_vehicle_width;
  j["lane_width_real"] = cal.lane_width_real;
  j["lane_width_px"] = cal.lane_width_px;
  j["frame_centre_px"] = cal.frame_centre_px;
  return j.dump(2) + "\n";
}

}  // namespace hcmon
