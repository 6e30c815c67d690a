#include "spd/geom.hpp"

#include <algorithm>
#include <cmath>

#include "spd/errors.hpp"

namespace spd::geom {

double normalize_angle(double a) {
  double r = std::fmod(a + M_PI, 2.0 * M_PI);
  if (r <= 0.0) r += 2.0 * M_PI;
  return r - M_PI;  // (-pi, pi]
}

Pose2 make_pose(Vec2 position, double orientation) {
  return Pose2{position, normalize_angle(orientation)};
}

CircleIntersections try_circle_intersect(Vec2 c1, double r1, Vec2 c2, double r2) {
  if (!(r1 > 0.0) || !(r2 > 0.0)) {
    throw KinematicsError("circle_intersect: radii must be positive");
  }
  const Vec2 delta = c2 - c1;
  const double d2 = dot(delta, delta);
  const double d = std::sqrt(d2);
  if (d == 0.0) {
    throw KinematicsError("degenerate configuration: concentric circle centers");
  }

  const double outer_gap = d - (r1 + r2);
  const double inner_gap = std::fabs(r1 - r2) - d;
  CircleIntersections out;
  if (outer_gap > kTangencyTol || inner_gap > kTangencyTol) {
    return out;  // disjoint or nested: no intersection
  }

  // Chord geometry: base point at distance `a` from c1 along the center line,
  // half-chord h perpendicular to it. The factored forms avoid the
  // catastrophic cancellation of r1^2 - a^2 at large radii.
  const double d_minus_r1 = d - r1;
  const double r1_minus_a = (r2 - d_minus_r1) * (r2 + d_minus_r1) / (2.0 * d);
  const double a = r1 - r1_minus_a;
  const double h2 = r1_minus_a * (r1 + a);
  const Vec2 u = delta / d;
  const Vec2 v = perp(u);
  const Vec2 base = c1 + a * u;

  if (h2 <= kTangencyTol * kTangencyTol) {
    out.points[0] = base;
    out.count = 1;
    return out;
  }
  const double h = std::sqrt(h2);
  // cross(c2 - c1, (base + h*v) - c1) = d*h > 0, so the +v point goes first.
  out.points[0] = base + h * v;
  out.points[1] = base - h * v;
  out.count = 2;
  return out;
}

CircleIntersections circle_intersect(Vec2 c1, double r1, Vec2 c2, double r2) {
  CircleIntersections out = try_circle_intersect(c1, r1, c2, r2);
  if (out.count == 0) {
    throw KinematicsError("no intersection: circles are disjoint or nested");
  }
  return out;
}

LineFit fit_line(const std::vector<Vec2>& points) {
  if (points.size() < 2) {
    throw KinematicsError("fit_line: at least 2 points required");
  }

  Vec2 centroid{0.0, 0.0};
  for (const Vec2& p : points) centroid = centroid + p;
  centroid = centroid / static_cast<double>(points.size());

  // Scatter matrix about the centroid.
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Vec2& p : points) {
    const Vec2 q = p - centroid;
    sxx += q.x * q.x;
    sxy += q.x * q.y;
    syy += q.y * q.y;
  }
  if (sxx + syy == 0.0) {
    throw KinematicsError("degenerate point set: all points identical");
  }

  // Principal axis of the scatter matrix = TLS direction.
  const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const Vec2 dir{std::cos(angle), std::sin(angle)};

  double max_dev = 0.0, sum_sq = 0.0;
  for (const Vec2& p : points) {
    const double e = cross(dir, p - centroid);
    max_dev = std::max(max_dev, std::fabs(e));
    sum_sq += e * e;
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(points.size()));
  return LineFit{centroid, dir, max_dev, rms};
}

namespace {

double point_segment_distance_oneway(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  double t = dot(p - a, ab) / dot(ab, ab);
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  if (a == b) {
    throw KinematicsError("point_segment_distance: degenerate segment");
  }
  // Evaluating both orientations and taking the min makes the result exactly
  // symmetric in (a, b), which downstream determinism contracts rely on.
  return std::min(point_segment_distance_oneway(p, a, b),
                  point_segment_distance_oneway(p, b, a));
}

}  // namespace spd::geom
