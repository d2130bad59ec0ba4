#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hcmon {

inline constexpr double kMetresPerSecondPerMph = 0.44704;

struct Mph {
  double value = 0.0;
};

struct Mps {
  double value = 0.0;
};

inline constexpr Mps to_mps(Mph v) { return {v.value * kMetresPerSecondPerMph}; }
inline constexpr Mph to_mph(Mps v) { return {v.value / kMetresPerSecondPerMph}; }

struct StoppingCoefficients {
  double a = 0.300;
  double b = 0.058;
  double c = -0.011;
  double d = 0.015;
};

struct StoppingDistance {
  double thinking = 0.0;
  double braking = 0.0;
  double total = 0.0;
};

StoppingDistance stopping_distance(Mph v, const StoppingCoefficients& k = {});
double danger_space_length(Mph v, const StoppingCoefficients& k = {});
double danger_space_length(Mps v, const StoppingCoefficients& k = {});

enum class ProfileName { relaxed, nominal, aggressive, custom };

const char* to_string(ProfileName name);

struct DrivingProfile {
  ProfileName name = ProfileName::custom;
  std::string label = "custom";
  double pull_out_clearance = 0.0;  // m
  double pull_out_angle = 0.0;      // rad
  double cut_in_clearance = 0.0;    // m
  double cut_in_angle = 0.0;        // rad

  void validate() const;
};

struct ManoeuvreGeometry {
  double lateral_offset = 0.0;  // m
  double vbp_length = 0.0;      // m
  Mps v_av;
  Mps v_vbp;
  Mps v_ov;
};

struct ManoeuvreTime {
  double pull_out = 0.0;
  double pass = 0.0;
  double cut_in = 0.0;
  double total = 0.0;
};

ManoeuvreTime manoeuvre_time(const DrivingProfile& p, const ManoeuvreGeometry& g);

struct SafeDistanceAhead {
  ManoeuvreTime time;
  double closing_speed = 0.0;  // m/s
  double travel = 0.0;         // (v_av + v_ov) * T
  double ds_ov = 0.0;
  double total = 0.0;
};

SafeDistanceAhead safe_distance_ahead(const DrivingProfile& p, const ManoeuvreGeometry& g,
                                      const StoppingCoefficients& k = {});

double ttc(double gap, double closing_speed);

struct Calibration {
  double lateral_offset = 2.0;
  double vbp_length = 4.0;
};

struct ProfileSet {
  Calibration calibration;
  std::vector<DrivingProfile> profiles;  // relaxed -> aggressive

  const DrivingProfile& get(const std::string& label) const;
  ManoeuvreGeometry geometry(Mps v_av, Mps v_vbp, Mps v_ov) const {
    return {calibration.lateral_offset, calibration.vbp_length, v_av, v_vbp, v_ov};
  }
};

ProfileSet load_profiles(std::istream& in);
ProfileSet load_profiles_file(const std::string& path);
// Calibrated defaults shipped with the rulepack.
const ProfileSet& default_profiles();

}  // namespace hcmon
