#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hcmon/ukhc_models.hpp"

namespace hcmon {

enum class Zone { A, B, C, D };

const char* to_string(Zone z);

struct ZoneThresholds {
  double safety_margin_fraction = 0.1;
  double ttc_conservative = 2.5;  // s

  void validate() const;
};

Zone classify(double da, double sda, double ttc, const ZoneThresholds& th = {});

// Time left to the OV after the manoeuvre: da / closing speed - manoeuvre time.
double manoeuvre_ttc(double da, const SafeDistanceAhead& sda);

struct ProfileChoice {
  DrivingProfile profile;
  Zone zone = Zone::C;
};

// Least aggressive profile landing outside zones A and B.
std::optional<ProfileChoice> optimal_profile(double da, const std::vector<DrivingProfile>& profiles,
                                             const ManoeuvreGeometry& geom,
                                             const ZoneThresholds& th = {},
                                             const StoppingCoefficients& k = {});

struct ZoneRow {
  double t = 0.0;
  std::string assertion_id;
  double da = 0.0;
  double sda = 0.0;
  double ttc = 0.0;
  Zone zone = Zone::A;
};

std::string zone_report_csv(const std::vector<ZoneRow>& rows);

}  // namespace hcmon
