#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "hcmon/error.hpp"
#include "hcmon/zones.hpp"

using namespace hcmon;

namespace {

ManoeuvreGeometry calibration_geometry() {
  return default_profiles().geometry(to_mps(Mph{25}), Mps{0}, to_mps(Mph{25}));
}

}  // namespace

TEST(Classify, Examples) {
  EXPECT_EQ(classify(35.63, 40.02, 1.0), Zone::A);
  EXPECT_EQ(classify(40.02, 40.02, 1.0), Zone::A);
  EXPECT_EQ(classify(50 * 1.01, 50, 1.0), Zone::B);
  EXPECT_EQ(classify(76.43, 63.73, 2.0), Zone::C);
  EXPECT_EQ(classify(76.43, 63.73, 3.0), Zone::D);
  EXPECT_THROW(classify(10, 0, 1), Error);
  ZoneThresholds bad;
  bad.safety_margin_fraction = -0.1;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Classify, MonotoneInDistance) {
  std::mt19937 rng(401);
  std::uniform_real_distribution<double> sda(5, 150), ttc(0, 6), step(0, 10);
  for (int i = 0; i < 1000; ++i) {
    const double s = sda(rng), t = ttc(rng);
    double da = 0;
    Zone prev = classify(da, s, t);
    for (int k = 0; k < 40; ++k) {
      da += step(rng);
      const Zone z = classify(da, s, t);
      EXPECT_GE(static_cast<int>(z), static_cast<int>(prev));
      prev = z;
    }
  }
}

TEST(Classify, ZoneAMatchesRule162Failures) {
  const RoadMap map = straight_two_lane_road(400, 3.65);
  for (int j = 0; j < 10; ++j) {
    DrivingProfile p = default_profiles().get("nominal");
    p.pull_out_angle = p.cut_in_angle = 0.08 + 0.06 * j;
    for (int i = 0; i < 10; ++i) {
      const double sda = safe_distance_ahead(p, calibration_geometry()).total;
      const double da = i == 5 ? sda : sda * (0.6 + 0.1 * i);
      const Verdict v = fixture::rule162_at(da, p, map);
      const double m_da = std::get<double>(v.detail.at("da"));
      const double m_sda = std::get<double>(v.detail.at("sda"));
      EXPECT_EQ(classify(m_da, m_sda, 0.0) == Zone::A, v.result == Result::fail)
          << "da=" << m_da << " sda=" << m_sda;
    }
  }
}

TEST(OptimalProfile, Examples) {
  const auto& ps = default_profiles();
  const auto g = calibration_geometry();
  const auto safe = optimal_profile(76.43, ps.profiles, g);
  ASSERT_TRUE(safe);
  EXPECT_EQ(safe->profile.name, ProfileName::nominal);
  EXPECT_EQ(safe->zone, Zone::C);
  EXPECT_EQ(classify(76.43, safe_distance_ahead(ps.get("relaxed"), g).total, 0), Zone::A);
  EXPECT_FALSE(optimal_profile(35.63, ps.profiles, g));
  const auto far = optimal_profile(1000, ps.profiles, g);
  ASSERT_TRUE(far);
  EXPECT_EQ(far->profile.name, ProfileName::relaxed);
  EXPECT_EQ(far->zone, Zone::D);
}

TEST(OptimalProfile, NeverZoneAOrB) {
  const auto& ps = default_profiles();
  std::mt19937 rng(409);
  std::uniform_real_distribution<double> da(0, 400), v(3, 30);
  for (int i = 0; i < 2000; ++i) {
    const auto g = ps.geometry(Mps{v(rng) + 1}, Mps{0}, Mps{v(rng)});
    const double d = da(rng);
    if (const auto c = optimal_profile(d, ps.profiles, g)) {
      const auto s = safe_distance_ahead(c->profile, g);
      const Zone z = classify(d, s.total, manoeuvre_ttc(d, s));
      EXPECT_NE(z, Zone::A);
      EXPECT_NE(z, Zone::B);
      EXPECT_EQ(z, c->zone);
    }
  }
}

TEST(ZoneReport, Csv) {
  const std::string csv = zone_report_csv({{1.1, "rule162_sda", 76.43, 63.73, 1.31, Zone::C}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,assertion_id,da,sda,ttc,zone");
  EXPECT_NE(csv.find("rule162_sda"), std::string::npos);
  EXPECT_EQ(csv.back(), '\n');
}
