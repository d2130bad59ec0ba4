#include "hcmon/geometry.hpp"

#include <algorithm>
#include <limits>

#include "hcmon/error.hpp"

namespace hcmon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double signed_area(const std::vector<Vec2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * s;
}

void strip_closing_vertex(std::vector<Vec2>& v) {
  if (v.size() > 1 && v.front() == v.back()) v.pop_back();
}

void validate_ccw_convex(const std::vector<Vec2>& v) {
  if (v.size() < 3) {
    throw Error(ErrorKind::invalid_argument, "polygon needs at least 3 vertices");
  }
  for (const auto& p : v) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::invalid_argument, "polygon vertex is not finite");
    }
  }
  const std::size_t n = v.size();
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = v[(i + 1) % n] - v[i];
    const Vec2 e1 = v[(i + 2) % n] - v[(i + 1) % n];
    const double l0 = norm(e0);
    const double l1 = norm(e1);
    if (l0 == 0.0 || l1 == 0.0) {
      throw Error(ErrorKind::invalid_argument, "polygon has repeated vertices");
    }
    const double c = cross(e0, e1);
    if (c <= 1e-12 * l0 * l1) {
      throw Error(ErrorKind::invalid_argument,
                  "polygon is not strictly convex counter-clockwise");
    }
    turning += std::atan2(c, dot(e0, e1));
  }
  if (std::abs(turning - kTwoPi) > 1e-6) {
    throw Error(ErrorKind::invalid_argument, "polygon is self-intersecting");
  }
}

// Projection interval of a polygon onto an axis.
std::pair<double, double> project(const ConvexPolygon& p, Vec2 axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : p.vertices()) {
    const double d = dot(v, axis);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {lo, hi};
}

// Largest separating gap over the edge normals of both polygons. Non-positive
// means no separating axis exists, i.e. the closed sets intersect.
double sat_gap(const ConvexPolygon& a, const ConvexPolygon& b) {
  double best = -std::numeric_limits<double>::infinity();
  for (const ConvexPolygon* p : {&a, &b}) {
    const auto& v = p->vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 e = v[(i + 1) % v.size()] - v[i];
      const double len = norm(e);
      const Vec2 n{e.y / len, -e.x / len};
      const auto [alo, ahi] = project(a, n);
      const auto [blo, bhi] = project(b, n);
      best = std::max(best, std::max(blo - ahi, alo - bhi));
    }
  }
  return best;
}

Vec2 support(const ConvexPolygon& p, Vec2 d) {
  const auto& v = p.vertices();
  Vec2 best = v[0];
  double best_dot = dot(best, d);
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double s = dot(v[i], d);
    if (s > best_dot) {
      best_dot = s;
      best = v[i];
    }
  }
  return best;
}

Vec2 minkowski_support(const ConvexPolygon& a, const ConvexPolygon& b, Vec2 d) {
  return support(a, d) - support(b, Vec2{-d.x, -d.y});
}

// Closest point to the origin on segment [a, b] with the reduced simplex.
Vec2 closest_on_segment(Vec2 a, Vec2 b, std::vector<Vec2>& simplex) {
  const Vec2 ab = b - a;
  const double denom = dot(ab, ab);
  double t = denom > 0.0 ? -dot(a, ab) / denom : 0.0;
  if (t <= 0.0) {
    simplex = {a};
    return a;
  }
  if (t >= 1.0) {
    simplex = {b};
    return b;
  }
  simplex = {a, b};
  return a + t * ab;
}

Vec2 closest_on_simplex(std::vector<Vec2>& simplex) {
  if (simplex.size() == 1) return simplex[0];
  if (simplex.size() == 2) return closest_on_segment(simplex[0], simplex[1], simplex);
  // Triangle: pick the best of its edges. The origin lying inside cannot
  // happen here because callers rule out intersection first.
  Vec2 best{};
  double best_d = std::numeric_limits<double>::infinity();
  std::vector<Vec2> best_simplex;
  for (int i = 0; i < 3; ++i) {
    std::vector<Vec2> s;
    const Vec2 p = closest_on_segment(simplex[i], simplex[(i + 1) % 3], s);
    const double d = dot(p, p);
    if (d < best_d) {
      best_d = d;
      best = p;
      best_simplex = s;
    }
  }
  simplex = best_simplex;
  return best;
}

double gjk_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  Vec2 dir = a.vertices()[0] - b.vertices()[0];
  if (dir == Vec2{}) dir = {1.0, 0.0};
  std::vector<Vec2> simplex{minkowski_support(a, b, Vec2{-dir.x, -dir.y})};
  Vec2 v = simplex[0];
  for (int iter = 0; iter < 64; ++iter) {
    v = closest_on_simplex(simplex);
    const double vv = dot(v, v);
    if (vv == 0.0) return 0.0;
    const Vec2 w = minkowski_support(a, b, Vec2{-v.x, -v.y});
    if (vv - dot(v, w) <= 1e-14 * vv) break;
    if (std::find(simplex.begin(), simplex.end(), w) != simplex.end()) break;
    simplex.push_back(w);
  }
  return norm(v);
}

}  // namespace

double normalize_angle(double rad) {
  double r = rad - kTwoPi * std::floor((rad + std::numbers::pi) / kTwoPi);
  if (r >= std::numbers::pi) r -= kTwoPi;
  if (r < -std::numbers::pi) r += kTwoPi;
  return r;
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  strip_closing_vertex(vertices_);
  validate_ccw_convex(vertices_);
}

ConvexPolygon ConvexPolygon::from_any_winding(std::vector<Vec2> vertices) {
  strip_closing_vertex(vertices);
  if (vertices.size() >= 3 && signed_area(vertices) < 0.0) {
    std::reverse(vertices.begin(), vertices.end());
  }
  return ConvexPolygon(std::move(vertices));
}

ConvexPolygon ConvexPolygon::inert(Vec2 a, Vec2 b) {
  ConvexPolygon p;
  p.vertices_ = {a, b};
  p.inert_ = true;
  return p;
}

double ConvexPolygon::area() const {
  if (inert_ || vertices_.size() < 3) return 0.0;
  return signed_area(vertices_);
}

Vec2 ConvexPolygon::centroid() const {
  if (vertices_.empty()) return {};
  if (inert_ || vertices_.size() < 3) {
    Vec2 s{};
    for (const auto& v : vertices_) s = s + v;
    return (1.0 / static_cast<double>(vertices_.size())) * s;
  }
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Vec2 p = vertices_[i];
    const Vec2 q = vertices_[(i + 1) % vertices_.size()];
    const double c = cross(p, q);
    a += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  return {cx / (3.0 * a), cy / (3.0 * a)};
}

bool ConvexPolygon::contains(Vec2 p) const {
  if (inert_ || vertices_.size() < 3) return false;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[(i + 1) % vertices_.size()];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

ConvexPolygon oriented_box(const Pose2D& pose, const BoxDims& dims) {
  if (!dims.valid() || !std::isfinite(dims.length) || !std::isfinite(dims.width)) {
    throw Error(ErrorKind::invalid_argument, "box dimensions must be positive");
  }
  const Vec2 c = pose.position();
  const Vec2 f = (0.5 * dims.length) * pose.forward();
  const Vec2 l = (0.5 * dims.width) * pose.left();
  return ConvexPolygon({c + f + l, c - f + l, c - f - l, c + f - l});
}

double min_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::invalid_argument, "degenerate polygon");
  }
  if (a.is_inert() || b.is_inert()) return std::numeric_limits<double>::infinity();
  const double gap = sat_gap(a, b);
  if (gap <= 0.0) return 0.0;
  return std::max(gap, gjk_distance(a, b));
}

bool overlaps(const ConvexPolygon& a, const ConvexPolygon& b) {
  return min_distance(a, b) == 0.0;
}

double overlap_area(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::invalid_argument, "degenerate polygon");
  }
  if (a.is_inert() || b.is_inert()) return 0.0;
  if (sat_gap(a, b) > 0.0) return 0.0;

  std::vector<Vec2> out = a.vertices();
  const auto& clip = b.vertices();
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Vec2 c0 = clip[i];
    const Vec2 c1 = clip[(i + 1) % clip.size()];
    const Vec2 e = c1 - c0;
    std::vector<Vec2> in;
    in.swap(out);
    for (std::size_t j = 0; j < in.size(); ++j) {
      const Vec2 p = in[j];
      const Vec2 q = in[(j + 1) % in.size()];
      const double sp = cross(e, p - c0);
      const double sq = cross(e, q - c0);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  if (out.size() < 3) return 0.0;
  return std::max(0.0, signed_area(out));
}

ConvexPolygon danger_space(const Pose2D& pose, const BoxDims& vehicle, double ds_length) {
  if (!(vehicle.width > 0.0) || !(vehicle.length > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "danger space needs positive vehicle dims");
  }
  if (!(ds_length >= 0.0) || !std::isfinite(ds_length)) {
    throw Error(ErrorKind::invalid_argument, "danger space length must be non-negative");
  }
  const Vec2 f = pose.forward();
  const Vec2 l = (0.5 * vehicle.width) * pose.left();
  const Vec2 front = pose.position() + (0.5 * vehicle.length) * f;
  if (ds_length == 0.0) return ConvexPolygon::inert(front - l, front + l);
  const Vec2 tip = front + ds_length * f;
  return ConvexPolygon({front - l, tip - l, tip + l, front + l});
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double denom = dot(ab, ab);
  if (denom == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / denom, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
    const double c = cross(q - p, r - p);
    return (c > 0.0) - (c < 0.0);
  };
  auto on_segment = [](Vec2 p, Vec2 q, Vec2 r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
           std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
  };
  const int o1 = orient(a0, a1, b0);
  const int o2 = orient(a0, a1, b1);
  const int o3 = orient(b0, b1, a0);
  const int o4 = orient(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

bool segment_touches_polygon(Vec2 a, Vec2 b, const ConvexPolygon& poly) {
  if (poly.is_inert() || poly.size() < 3) return false;
  if (poly.contains(a) || poly.contains(b)) return true;
  const auto& v = poly.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (segments_intersect(a, b, v[i], v[(i + 1) % v.size()])) return true;
  }
  return false;
}

ConvexPolygon transformed(const ConvexPolygon& poly, double rotation, Vec2 translation) {
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  std::vector<Vec2> out;
  out.reserve(poly.size());
  for (const auto& v : poly.vertices()) {
    out.push_back(Vec2{c * v.x - s * v.y, s * v.x + c * v.y} + translation);
  }
  if (poly.is_inert()) return ConvexPolygon::inert(out[0], out[1]);
  return ConvexPolygon(std::move(out));
}

}  // namespace hcmon
