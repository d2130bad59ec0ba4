#include "hcmon/worldmap.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hcmon/error.hpp"

namespace hcmon {

using nlohmann::json;

namespace {

bool aligned(double a, double b) { return std::abs(normalize_angle(a - b)) < std::numbers::pi / 2; }

std::string id_of(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw LocatedError(ErrorKind::parse, path, "lanelet id must be a string or integer");
}

double number_at(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) {
    throw LocatedError(ErrorKind::parse, path, std::string("missing field '") + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw LocatedError(ErrorKind::parse, path + "." + key, "expected a number");
  }
  return v.get<double>();
}

std::vector<Vec2> points_at(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw LocatedError(ErrorKind::parse, path, "expected an array of [x, y]");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& p = arr[i];
    const std::string here = path + "[" + std::to_string(i) + "]";
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw LocatedError(ErrorKind::parse, here, "expected [x, y]");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path,
                bool strict, std::vector<std::string>* warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.count(it.key())) continue;
    const std::string msg = "unknown key '" + it.key() + "'";
    if (strict) throw LocatedError(ErrorKind::parse, path, msg);
    if (warnings) warnings->push_back(path + ": " + msg);
  }
}

double distance_to_boundary(const ConvexPolygon& poly, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, point_segment_distance(p, v[i], v[(i + 1) % v.size()]));
  }
  return best;
}

}  // namespace

RoadMap::RoadMap(std::vector<Lanelet> lanelets, std::vector<Vec2> centreline)
    : lanelets_(std::move(lanelets)), centreline_(std::move(centreline)) {
  if (centreline_.size() < 2) {
    throw Error(ErrorKind::validation, "centreline needs at least 2 points");
  }
  std::set<std::string> ids;
  for (auto& l : lanelets_) {
    if (!ids.insert(l.id).second) {
      throw Error(ErrorKind::validation, "duplicate lanelet id '" + l.id + "'");
    }
    if (!(l.width > 0.0)) {
      throw Error(ErrorKind::validation, "lanelet '" + l.id + "' has non-positive width");
    }
    if (l.shape.size() < 3 || l.shape.is_inert()) {
      throw Error(ErrorKind::validation, "lanelet '" + l.id + "' has no valid shape");
    }
    l.orientation = normalize_angle(l.orientation);
  }
}

const Lanelet* RoadMap::find(const std::string& id) const {
  for (const auto& l : lanelets_) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

RoadMap load_map(std::istream& in, const MapLoadOptions& opts, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LocatedError(ErrorKind::parse, "byte " + std::to_string(e.byte), e.what());
  }
  if (!doc.is_object()) throw LocatedError(ErrorKind::parse, "$", "map must be a JSON object");
  check_keys(doc, {"lanelets", "centreline"}, "$", opts.strict, warnings);
  if (!doc.contains("centreline")) {
    throw LocatedError(ErrorKind::parse, "$", "missing field 'centreline'");
  }
  if (!doc.contains("lanelets") || !doc["lanelets"].is_array()) {
    throw LocatedError(ErrorKind::parse, "$", "missing array 'lanelets'");
  }

  std::vector<Lanelet> lanelets;
  std::set<std::string> seen;
  const auto& arr = doc["lanelets"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& item = arr[i];
    const std::string path = "$.lanelets[" + std::to_string(i) + "]";
    if (!item.is_object()) throw LocatedError(ErrorKind::parse, path, "expected an object");
    check_keys(item, {"id", "vertices", "orientation_rad", "width_m", "direction"}, path,
               opts.strict, warnings);
    if (!item.contains("id")) throw LocatedError(ErrorKind::parse, path, "missing field 'id'");
    Lanelet l;
    l.id = id_of(item["id"], path + ".id");
    const std::string named = path + " (lanelet '" + l.id + "')";
    if (!seen.insert(l.id).second) {
      throw LocatedError(ErrorKind::validation, named, "duplicate lanelet id");
    }
    if (!item.contains("vertices")) {
      throw LocatedError(ErrorKind::parse, named, "missing field 'vertices'");
    }
    try {
      l.shape = ConvexPolygon::from_any_winding(points_at(item["vertices"], path + ".vertices"));
    } catch (const LocatedError&) {
      throw;
    } catch (const Error& e) {
      throw LocatedError(ErrorKind::validation, named, e.what());
    }
    l.orientation = normalize_angle(number_at(item, "orientation_rad", named));
    l.width = number_at(item, "width_m", named);
    if (!(l.width > 0.0)) {
      throw LocatedError(ErrorKind::validation, named, "width_m must be positive");
    }
    const std::string dir = item.value("direction", std::string("with_map_axis"));
    if (dir == "with_map_axis") {
      l.direction = LaneDirection::with_map_axis;
    } else if (dir == "against_map_axis") {
      l.direction = LaneDirection::against_map_axis;
    } else {
      throw LocatedError(ErrorKind::parse, named + ".direction", "unknown direction '" + dir + "'");
    }
    lanelets.push_back(std::move(l));
  }

  auto centreline = points_at(doc["centreline"], "$.centreline");
  if (centreline.size() < 2) {
    throw LocatedError(ErrorKind::validation, "$.centreline", "centreline needs at least 2 points");
  }
  return RoadMap(std::move(lanelets), std::move(centreline));
}

RoadMap load_map_file(const std::string& path, const MapLoadOptions& opts,
                      std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::not_found, "cannot open map file '" + path + "'");
  try {
    return load_map(in, opts, warnings);
  } catch (const LocatedError& e) {
    throw LocatedError(e.kind(), path + ":" + e.location(), e.bare_message());
  }
}

std::string serialize_map(const RoadMap& map) {
  json doc;
  doc["lanelets"] = json::array();
  for (const auto& l : map.lanelets()) {
    json verts = json::array();
    for (const auto& v : l.shape.vertices()) verts.push_back({v.x, v.y});
    doc["lanelets"].push_back({
        {"id", l.id},
        {"vertices", verts},
        {"orientation_rad", l.orientation},
        {"width_m", l.width},
        {"direction",
         l.direction == LaneDirection::with_map_axis ? "with_map_axis" : "against_map_axis"},
    });
  }
  json cl = json::array();
  for (const auto& v : map.centreline()) cl.push_back({v.x, v.y});
  doc["centreline"] = cl;
  return doc.dump(2) + "\n";
}

RoadMap straight_two_lane_road(double length, double lane_width) {
  if (!(length > 0.0) || !(lane_width > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "road length and lane width must be positive");
  }
  Lanelet east{"1",
               ConvexPolygon({{0.0, 0.0}, {length, 0.0}, {length, lane_width}, {0.0, lane_width}}),
               0.0, lane_width, LaneDirection::with_map_axis};
  Lanelet west{"2",
               ConvexPolygon({{0.0, -lane_width}, {length, -lane_width}, {length, 0.0}, {0.0, 0.0}}),
               normalize_angle(std::numbers::pi), lane_width, LaneDirection::against_map_axis};
  return RoadMap({east, west}, {{0.0, 0.0}, {length, 0.0}});
}

std::vector<std::pair<std::string, double>> lanelets_containing(const RoadMap& map,
                                                                const ConvexPolygon& shape) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& l : map.lanelets()) {
    const double a = overlap_area(l.shape, shape);
    if (a > 0.0) out.emplace_back(l.id, a);
  }
  return out;
}

bool crosses_centreline(const RoadMap& map, const ConvexPolygon& shape) {
  const auto& cl = map.centreline();
  for (std::size_t i = 0; i + 1 < cl.size(); ++i) {
    if (segment_touches_polygon(cl[i], cl[i + 1], shape)) return true;
  }
  return false;
}

std::optional<double> try_lane_orientation_at(const RoadMap& map, Vec2 point) {
  const Lanelet* interior = nullptr;
  const Lanelet* boundary = nullptr;
  for (const auto& l : map.lanelets()) {
    if (!l.shape.contains(point)) continue;
    if (distance_to_boundary(l.shape, point) > 1e-12) {
      if (!interior || l.shape.area() < interior->shape.area() ||
          (l.shape.area() == interior->shape.area() && l.id < interior->id)) {
        interior = &l;
      }
    } else if (!boundary || l.id < boundary->id) {
      boundary = &l;
    }
  }
  if (interior) return interior->orientation;
  if (boundary) return boundary->orientation;
  return std::nullopt;
}

double lane_orientation_at(const RoadMap& map, Vec2 point) {
  auto o = try_lane_orientation_at(map, point);
  if (!o) {
    std::ostringstream msg;
    msg << "point (" << point.x << ", " << point.y << ") is not on any lanelet";
    throw Error(ErrorKind::not_found, msg.str());
  }
  return *o;
}

double against_lane_area(const RoadMap& map, const ConvexPolygon& shape, double heading) {
  double area = 0.0;
  for (const auto& l : map.lanelets()) {
    if (aligned(l.orientation, heading)) continue;
    area += overlap_area(l.shape, shape);
  }
  return area;
}

bool within_single_lanelet(const RoadMap& map, const ConvexPolygon& shape) {
  const double total = shape.area();
  for (const auto& l : map.lanelets()) {
    if (std::abs(overlap_area(l.shape, shape) - total) <= 1e-9) return true;
  }
  return false;
}

Vec2 oncoming_normal(const RoadMap& map, Vec2 point, double heading) {
  const auto& cl = map.centreline();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < cl.size(); ++i) {
    const double d = point_segment_distance(point, cl[i], cl[i + 1]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  const Vec2 s0 = cl[best];
  const Vec2 dir = cl[best + 1] - s0;
  const Vec2 left{-dir.y / norm(dir), dir.x / norm(dir)};

  // Side of the centreline carrying traffic in `heading`: nearest aligned
  // lanelet centroid.
  const Lanelet* own = nullptr;
  double own_d = std::numeric_limits<double>::infinity();
  for (const auto& l : map.lanelets()) {
    if (!aligned(l.orientation, heading)) continue;
    const double d = norm(l.shape.centroid() - point);
    if (d < own_d) {
      own_d = d;
      own = &l;
    }
  }
  if (!own) {
    throw Error(ErrorKind::not_found, "no lanelet carries traffic in the given heading");
  }
  const double side = cross(dir, own->shape.centroid() - s0);
  return side > 0.0 ? Vec2{-left.x, -left.y} : left;
}

}  // namespace hcmon
