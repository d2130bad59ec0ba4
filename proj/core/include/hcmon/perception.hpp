#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hcmon/geometry.hpp"
#include "hcmon/trace.hpp"

namespace hcmon {

// lane_marking records carry the horizontal pixel position of the centre
// line and, optionally, the ego speed.
enum class ActorClass { car, goods_vehicle, lane_marking };

const char* to_string(ActorClass c);

struct DetectionRecord {
  long frame_index = 0;
  double t = 0.0;
  ActorClass actor_class = ActorClass::car;
  double box_width_px = 0.0;
  double box_centre_px = 0.0;
  Role role_hint = Role::other;  // other = unknown
  std::optional<double> speed_mps;
};

struct CameraCalibration {
  double c = 0.0;
  double assumed_vehicle_width = 0.0;
  double lane_width_real = 0.0;
  double lane_width_px = 0.0;
  double frame_centre_px = 0.0;

  void validate() const;
};

struct LongitudinalEstimate {
  double distance = 0.0;
  bool low_confidence = false;
};

LongitudinalEstimate longitudinal_distance(const DetectionRecord& rec, const CameraCalibration& cal,
                                           double low_confidence_px = 5.0);
double lateral_offset(double d_px, const CameraCalibration& cal);

struct EstimatorConfig {
  BoxDims av_dims{4.0, 1.8};
  BoxDims car_dims{4.5, 1.8};
  BoxDims goods_dims{10.0, 2.5};
  double av_start_x = 10.0;
  double av_speed_mps = 25.0 * kMphToMps;  // used until a lane_marking speed arrives
  double car_speed_mps = 60.0 * kMphToMps;
  double goods_speed_mps = 50.0 * kMphToMps;
  double low_confidence_px = 5.0;
};

// Left-hand traffic on the straight_two_lane_road frame: the AV's own lane is
// y > 0 and distances are measured from the AV front face to the near face of
// the detected vehicle.
Trace boxes_to_trace(const std::vector<DetectionRecord>& records, const CameraCalibration& cal,
                     const EstimatorConfig& config = {});

DetectionRecord parse_detection(const std::string& line, std::size_t index);
std::vector<DetectionRecord> load_detections(std::istream& in);
std::string serialize_detection(const DetectionRecord& r);

CameraCalibration load_calibration(std::istream& in);
CameraCalibration load_calibration_file(const std::string& path);
std::string serialize_calibration(const CameraCalibration& cal);

}  // namespace hcmon
