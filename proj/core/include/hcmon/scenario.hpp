#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hcmon/perception.hpp"
#include "hcmon/trace.hpp"
#include "hcmon/ukhc_models.hpp"
#include "hcmon/worldmap.hpp"

namespace hcmon {

struct Occlusion {
  double visible_from_t = 0.0;
  std::vector<std::size_t> flicker_steps;  // step indices with OV records removed
};

// Abort: from visible_from_t the AV brakes to min_speed, drops back behind
// the VBP and then turns back into its lane.
struct AbortManoeuvre {
  double decel = 5.0;      // m/s^2
  double min_speed = 4.0;  // m/s
  double back_gap = 2.0;   // AV front to VBP rear when turning back
};

struct OvBraking {
  double delay = 0.75;  // s after visible_from_t
  double decel = 6.0;   // m/s^2
};

struct ScenarioSpec {
  std::string name = "custom";
  double road_length = 150.0;
  double lane_width = 3.65;
  Mph v_av{25.0};
  Mph v_ov{25.0};
  double v_vbp = 0.0;  // m/s
  double vbp_position = 40.0;  // centre x
  double vbp_length = 4.0;
  double vbp_width = 1.8;
  BoxDims av_dims{4.0, 1.8};
  BoxDims ov_dims{4.0, 1.8};
  double av_start_x = 5.0;
  DrivingProfile profile;
  double lateral_offset = 2.0;
  double pull_out_gap = 21.0;  // AV front to VBP rear when pulling out
  double ov_start_offset = 0.0;  // DA at the centreline-crossing step
  double dt = 0.05;
  double duration = 8.0;
  std::optional<Occlusion> occlusion;
  std::optional<AbortManoeuvre> abort;
  std::optional<OvBraking> ov_braking;

  void validate() const;
};

std::vector<std::string> preset_names();
ScenarioSpec preset(const std::string& name);

struct Scenario {
  RoadMap map;
  Trace trace;
  std::size_t crossing_step = 0;
  double pull_out_t = 0.0;
};

Scenario generate(const ScenarioSpec& spec);

// Camera calibration used for emitted detections.
CameraCalibration synthetic_calibration(const ScenarioSpec& spec);
// Renders the VBP/OV/lane marking as detector output for the estimator path.
std::vector<DetectionRecord> detections(const ScenarioSpec& spec, const Scenario& scenario);

}  // namespace hcmon
