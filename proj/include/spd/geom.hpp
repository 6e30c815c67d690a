#ifndef SPD_GEOM_HPP
#define SPD_GEOM_HPP

#include <array>
#include <cmath>
#include <vector>

namespace spd::geom {

// Absolute tolerance for degenerate-tangency detection. All geometry in this
// library lives at the 10-100 mm scale, so an absolute 1e-9 mm cut is safe.
inline constexpr double kTangencyTol = 1e-9;

/// Planar point / displacement in millimetres.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
inline Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
inline Vec2 operator-(Vec2 v) { return {-v.x, -v.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
inline bool operator!=(Vec2 a, Vec2 b) { return !(a == b); }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline Vec2 normalized(Vec2 v) { return v / norm(v); }
inline Vec2 rotated(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}
inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Normalizes an angle into (-pi, pi].
double normalize_angle(double a);

/// Rigid planar pose: position in mm, orientation in radians, normalized to
/// (-pi, pi] on construction via make_pose().
struct Pose2 {
  Vec2 position;
  double orientation = 0.0;
};

Pose2 make_pose(Vec2 position, double orientation);

/// Maps a point from the pose's local frame into the parent frame.
inline Vec2 transform_point(const Pose2& pose, Vec2 local) {
  return pose.position + rotated(local, pose.orientation);
}
inline Vec2 transform_direction(const Pose2& pose, Vec2 local) {
  return rotated(local, pose.orientation);
}

/// Total-least-squares line fit result. `direction` is unit length; `point`
/// lies on the fitted line. Deviations are perpendicular distances in mm.
struct LineFit {
  Vec2 point;
  Vec2 direction;
  double max_dev = 0.0;
  double rms_dev = 0.0;
};

/// Result of intersecting two circles: one or two points. Two-point results
/// are ordered by the sign of cross(c2 - c1, p - c1), positive first, so the
/// branch selection downstream is deterministic.
struct CircleIntersections {
  std::array<Vec2, 2> points{};
  int count = 0;
};

/// Intersects circle (c1, r1) with circle (c2, r2).
/// Throws KinematicsError "degenerate configuration" for concentric centers
/// and "no intersection" when the circles are disjoint or nested.
CircleIntersections circle_intersect(Vec2 c1, double r1, Vec2 c2, double r2);

/// Non-throwing variant: count == 0 encodes disjoint/nested circles.
/// Concentric centers and nonpositive radii still throw.
CircleIntersections try_circle_intersect(Vec2 c1, double r1, Vec2 c2, double r2);

/// Fits a total-least-squares line (perpendicular residuals) through the
/// points. Throws KinematicsError "degenerate point set" if all points are
/// identical.
LineFit fit_line(const std::vector<Vec2>& points);

/// Euclidean distance from p to the closed segment [a, b]. Exactly symmetric
/// in a and b. Throws KinematicsError for a == b.
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

}  // namespace spd::geom

#endif  // SPD_GEOM_HPP
