#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hcmon/geometry.hpp"

namespace hcmon {

enum class LaneDirection { with_map_axis, against_map_axis };

struct Lanelet {
  std::string id;
  ConvexPolygon shape;
  double orientation = 0.0;
  double width = 0.0;
  LaneDirection direction = LaneDirection::with_map_axis;

  friend bool operator==(const Lanelet&, const Lanelet&) = default;
};

class RoadMap {
 public:
  RoadMap() = default;
  // Validates invariants (unique ids, >= 2 centreline points, widths > 0).
  RoadMap(std::vector<Lanelet> lanelets, std::vector<Vec2> centreline);

  const std::vector<Lanelet>& lanelets() const { return lanelets_; }
  const std::vector<Vec2>& centreline() const { return centreline_; }
  const Lanelet* find(const std::string& id) const;

  friend bool operator==(const RoadMap&, const RoadMap&) = default;

 private:
  std::vector<Lanelet> lanelets_;
  std::vector<Vec2> centreline_;
};

struct MapLoadOptions {
  bool strict = true;
};

RoadMap load_map(std::istream& in, const MapLoadOptions& opts = {},
                 std::vector<std::string>* warnings = nullptr);
RoadMap load_map_file(const std::string& path, const MapLoadOptions& opts = {},
                      std::vector<std::string>* warnings = nullptr);
std::string serialize_map(const RoadMap& map);

// Straight two-lane road along +x from x=0 to x=length with left-hand
// traffic: eastbound lane "1" above the centreline y=0, westbound lane "2"
// below it.
RoadMap straight_two_lane_road(double length, double lane_width);

std::vector<std::pair<std::string, double>> lanelets_containing(const RoadMap& map,
                                                                const ConvexPolygon& shape);
bool crosses_centreline(const RoadMap& map, const ConvexPolygon& shape);
double lane_orientation_at(const RoadMap& map, Vec2 point);
std::optional<double> try_lane_orientation_at(const RoadMap& map, Vec2 point);

// Area of `shape` lying in lanelets whose driving direction opposes `heading`.
double against_lane_area(const RoadMap& map, const ConvexPolygon& shape, double heading);
// True iff `shape` lies inside a single lanelet (up to 1e-9 m^2).
bool within_single_lanelet(const RoadMap& map, const ConvexPolygon& shape);
// Unit normal to the nearest centreline segment pointing from the lanes that
// carry traffic in direction `heading` toward the opposing lanes.
Vec2 oncoming_normal(const RoadMap& map, Vec2 point, double heading);

}  // namespace hcmon
