#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace hcmon {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Wraps an angle into [-pi, pi).
double normalize_angle(double rad);

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double heading_)
      : x(x_), y(y_), heading(normalize_angle(heading_)) {}

  Vec2 position() const { return {x, y}; }
  Vec2 forward() const { return {std::cos(heading), std::sin(heading)}; }
  Vec2 left() const { return {-std::sin(heading), std::cos(heading)}; }
};

struct BoxDims {
  double length = 0.0;
  double width = 0.0;

  bool valid() const { return length > 0.0 && width > 0.0; }
  friend bool operator==(const BoxDims&, const BoxDims&) = default;
};

class ConvexPolygon {
 public:
  ConvexPolygon() = default;

  // Validates: >= 3 vertices, CCW winding, strictly convex, simple.
  // Throws Error(invalid_argument) otherwise.
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  // Accepts either winding; reverses clockwise input. Still rejects
  // non-convex or degenerate input.
  static ConvexPolygon from_any_winding(std::vector<Vec2> vertices);

  // Zero-area placeholder used for zero-length danger spaces. Never overlaps
  // anything and is infinitely far from everything.
  static ConvexPolygon inert(Vec2 a, Vec2 b);

  const std::vector<Vec2>& vertices() const& { return vertices_; }
  std::vector<Vec2> vertices() && { return std::move(vertices_); }
  std::size_t size() const { return vertices_.size(); }
  bool is_inert() const { return inert_; }
  bool empty() const { return vertices_.empty(); }

  double area() const;
  Vec2 centroid() const;
  bool contains(Vec2 p) const;  // closed set

  friend bool operator==(const ConvexPolygon&, const ConvexPolygon&) = default;

 private:
  std::vector<Vec2> vertices_;
  bool inert_ = false;
};

ConvexPolygon oriented_box(const Pose2D& pose, const BoxDims& dims);

double min_distance(const ConvexPolygon& a, const ConvexPolygon& b);
bool overlaps(const ConvexPolygon& a, const ConvexPolygon& b);
double overlap_area(const ConvexPolygon& a, const ConvexPolygon& b);

// Rectangle ahead of the vehicle front face, `ds_length` deep along heading.
// `vehicle_length` locates the front face relative to the pose centre.
ConvexPolygon danger_space(const Pose2D& pose, const BoxDims& vehicle, double ds_length);

// Distance from point to closed segment [a, b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);
bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

// Closed-set test: does the segment touch the polygon (boundary or interior)?
bool segment_touches_polygon(Vec2 a, Vec2 b, const ConvexPolygon& poly);

ConvexPolygon transformed(const ConvexPolygon& poly, double rotation, Vec2 translation);

}  // namespace hcmon
