#include "hcmon/zones.hpp"

#include <cmath>
#include <sstream>

#include "hcmon/error.hpp"

namespace hcmon {

const char* to_string(Zone z) {
  switch (z) {
    case Zone::A: return "A";
    case Zone::B: return "B";
    case Zone::C: return "C";
    case Zone::D: return "D";
  }
  return "A";
}

void ZoneThresholds::validate() const {
  if (!(safety_margin_fraction >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "safety margin fraction must be >= 0");
  }
  if (!std::isfinite(ttc_conservative)) {
    throw Error(ErrorKind::invalid_argument, "ttc threshold must be finite");
  }
}

Zone classify(double da, double sda, double ttc, const ZoneThresholds& th) {
  th.validate();
  if (!(sda > 0.0)) throw Error(ErrorKind::invalid_argument, "sda must be positive");
  if (da <= sda) return Zone::A;
  if (da <= sda * (1.0 + th.safety_margin_fraction)) return Zone::B;
  return ttc > th.ttc_conservative ? Zone::D : Zone::C;
}

double manoeuvre_ttc(double da, const SafeDistanceAhead& sda) {
  return ttc(da, sda.closing_speed) - sda.time.total;
}

std::optional<ProfileChoice> optimal_profile(double da, const std::vector<DrivingProfile>& profiles,
                                             const ManoeuvreGeometry& geom, const ZoneThresholds& th,
                                             const StoppingCoefficients& k) {
  for (const auto& p : profiles) {
    const auto sda = safe_distance_ahead(p, geom, k);
    const Zone z = classify(da, sda.total, manoeuvre_ttc(da, sda), th);
    if (z == Zone::C || z == Zone::D) return ProfileChoice{p, z};
  }
  return std::nullopt;
}

std::string zone_report_csv(const std::vector<ZoneRow>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "t,assertion_id,da,sda,ttc,zone\n";
  for (const auto& r : rows) {
    out << r.t << ',' << r.assertion_id << ',' << r.da << ',' << r.sda << ',' << r.ttc << ','
        << to_string(r.zone) << '\n';
  }
  return out.str();
}

}  // namespace hcmon
