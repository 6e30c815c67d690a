#include "spd/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "spd/errors.hpp"

namespace spd::grasp {

namespace {

constexpr double kBisectTol = 1e-6;  // rad, contact localization resolution
constexpr double kFree = std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------------------
// Object profiles and clearances
// ---------------------------------------------------------------------------

ObjectProfile ObjectProfile::make_circle(Vec2 center, double radius) {
  ObjectProfile o;
  o.shape = Shape::circle;
  o.center = center;
  o.radius = radius;
  o.validate();
  return o;
}

ObjectProfile ObjectProfile::make_polygon(std::vector<Vec2> vertices) {
  ObjectProfile o;
  o.shape = Shape::polygon;
  o.vertices = std::move(vertices);
  o.validate();
  return o;
}

void ObjectProfile::validate() const {
  if (shape == Shape::circle) {
    if (!(radius > 0.0) || !geom::is_finite(center)) {
      throw SimulationError("malformed object: circle needs a positive finite radius");
    }
    return;
  }
  const std::size_t n = vertices.size();
  if (n < 3) {
    throw SimulationError("malformed object: polygon needs at least 3 vertices");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!geom::is_finite(vertices[i])) {
      throw SimulationError("malformed object: non-finite polygon vertex");
    }
    const Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
    const Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (!(geom::cross(e0, e1) > 0.0)) {
      throw SimulationError(
          "malformed object: polygon must be strictly convex with CCW vertices");
    }
  }
}

double ObjectProfile::min_y() const {
  if (shape == Shape::circle) return center.y - radius;
  double m = vertices.front().y;
  for (const Vec2& v : vertices) m = std::min(m, v.y);
  return m;
}

double ObjectProfile::max_y() const {
  if (shape == Shape::circle) return center.y + radius;
  double m = vertices.front().y;
  for (const Vec2& v : vertices) m = std::max(m, v.y);
  return m;
}

namespace {

struct PointOnSegment {
  Vec2 point;
  double t = 0.0;
};

PointOnSegment closest_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = geom::dot(ab, ab);
  double t = len2 > 0.0 ? geom::dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {a + t * ab, t};
}

bool point_in_convex(Vec2 p, const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    if (geom::cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

double depth_in_convex(Vec2 p, const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  double d = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    d = std::min(d, geom::norm(p - closest_on_segment(p, a, b).point));
  }
  return d;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2, double& t_on_p) {
  const Vec2 r = p2 - p1, s = q2 - q1;
  const double denom = geom::cross(r, s);
  if (denom == 0.0) return false;  // parallel; endpoint minima cover touching
  const double t = geom::cross(q1 - p1, s) / denom;
  const double u = geom::cross(q1 - p1, r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
  t_on_p = t;
  return true;
}

// Closest approach between segments, reported on the first segment. Parallel
// face contacts have a whole interval of closest points; ties resolve toward
// the far end of the first segment (the fingertip side for distal phalanges).
SegmentClearance segment_segment(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  double t_cross = 0.0;
  if (segments_intersect(p1, p2, q1, q2, t_cross)) {
    return {0.0, p1 + t_cross * (p2 - p1), t_cross};
  }
  SegmentClearance best{std::numeric_limits<double>::max(), p1, 0.0};
  const auto consider = [&](double dist, Vec2 on_first, double t) {
    if (dist < best.distance - 1e-9 ||
        (dist < best.distance + 1e-9 && t > best.t)) {
      best = {dist, on_first, t};
    }
  };
  const PointOnSegment a = closest_on_segment(q1, p1, p2);
  consider(geom::norm(q1 - a.point), a.point, a.t);
  const PointOnSegment b = closest_on_segment(q2, p1, p2);
  consider(geom::norm(q2 - b.point), b.point, b.t);
  consider(geom::norm(p1 - closest_on_segment(p1, q1, q2).point), p1, 0.0);
  consider(geom::norm(p2 - closest_on_segment(p2, q1, q2).point), p2, 1.0);
  return best;
}

}  // namespace

SegmentClearance segment_clearance(Vec2 a, Vec2 b, const ObjectProfile& object) {
  if (object.shape == ObjectProfile::Shape::circle) {
    const PointOnSegment cp = closest_on_segment(object.center, a, b);
    return {geom::norm(cp.point - object.center) - object.radius, cp.point, cp.t};
  }

  const std::vector<Vec2>& poly = object.vertices;
  const bool in_a = point_in_convex(a, poly);
  const bool in_b = point_in_convex(b, poly);
  const std::size_t n = poly.size();

  // Any overlap (endpoint inside or boundary crossing) reports a strictly
  // negative clearance at the deepest point of the inside chord, so motion
  // bisection cannot park a segment across a corner.
  bool overlap = false;
  double t_lo = std::numeric_limits<double>::max();
  double t_hi = std::numeric_limits<double>::lowest();
  const auto mark = [&](double t) {
    t_lo = std::min(t_lo, t);
    t_hi = std::max(t_hi, t);
    overlap = true;
  };
  if (in_a) mark(0.0);
  if (in_b) mark(1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double t = 0.0;
    if (segments_intersect(a, b, poly[i], poly[(i + 1) % n], t)) mark(t);
  }
  if (overlap) {
    const double t_mid = 0.5 * (t_lo + t_hi);
    const Vec2 q = a + t_mid * (b - a);
    return {-depth_in_convex(q, poly), q, t_mid};
  }

  SegmentClearance best{std::numeric_limits<double>::max(), a, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const SegmentClearance c = segment_segment(a, b, poly[i], poly[(i + 1) % n]);
    if (c.distance < best.distance - 1e-9 ||
        (c.distance < best.distance + 1e-9 && c.t > best.t)) {
      best = c;
    }
  }
  return best;
}

const char* to_string(GraspMode mode) {
  return mode == GraspMode::parallel_pinch ? "ParallelPinch" : "AdaptiveEnvelope";
}

const char* to_string(GraspClass c) {
  switch (c) {
    case GraspClass::pinch: return "Pinch";
    case GraspClass::envelope: return "Envelope";
    default: return "Failure";
  }
}

const char* to_string(Phalange p) {
  switch (p) {
    case Phalange::proximal: return "proximal";
    case Phalange::distal: return "distal";
    default: return "fingertip";
  }
}

// ---------------------------------------------------------------------------
// Gripper geometry
// ---------------------------------------------------------------------------

void GripperSpec::validate() const {
  const bool lengths_ok = palm_width > 0.0 && carriage_height > 0.0 &&
                          proximal_len > 0.0 && distal_len > 0.0 && pad >= 0.0 &&
                          fingertip_zone > 0.0 && max_opening > 0.0;
  if (!lengths_ok) {
    throw SimulationError("gripper spec: lengths must be positive");
  }
  if (!(idle_stroke > 0.0) || idle_stroke > M_PI) {
    throw SimulationError("gripper spec: idle stroke must lie in (0, pi]");
  }
  if (!(gear_ratio > 0.0) || !(psi_max > 0.0)) {
    throw SimulationError("gripper spec: gear ratio and distal limit must be positive");
  }
  if (!(step_size > 0.0) || step_size > 0.01) {
    throw SimulationError("gripper spec: step size must lie in (0, 0.01] rad");
  }
  if (!(max_drive > 0.0) ||
      max_drive > sp.drive_max - sp.drive_min + 1e-12) {
    throw SimulationError("gripper spec: max drive must fit the linkage drive range");
  }
  sp.validate();
  dpm.validate();
}

namespace {

struct FingerGeometry {
  Vec2 carriage, joint, tip;
  std::array<std::pair<Vec2, Vec2>, 2> segments{};  // [proximal, distal]
  double orientation = 0.0;
};

// Per-step kinematic context. The rest configuration is solved once; every
// geometry evaluation re-solves the linkage at the commanded translation
// angle from a fresh rest-branch seed, so evaluations are order-independent.
struct StepContext {
  const GripperSpec& spec;
  double opening;
  Vec2 node_rest;
  Vec2 axis_world;

  StepContext(const GripperSpec& s, double opening_mm)
      : spec(s), opening(opening_mm) {
    const linkage::SpConfig rest = linkage::sp_fk(s.sp, s.sp.rest_angle());
    node_rest = rest.node_d;
    axis_world = geom::transform_direction(s.sp.base, s.sp.slider_axis);
  }

  FingerGeometry geometry(int finger, double translation, double psi,
                          double tilt) const {
    const double side = finger == 0 ? -1.0 : 1.0;
    const double phi = spec.sp.rest_angle() + translation;
    const linkage::SpConfig cfg = linkage::sp_fk(spec.sp, phi);
    const Vec2 delta = cfg.node_d - node_rest;
    const double along = geom::dot(delta, axis_world);
    const double transverse = geom::cross(axis_world, delta);

    FingerGeometry g;
    // Both fingers share one stroke solution mirrored across the centerline,
    // so symmetric scenarios stay symmetric to the last bit.
    g.carriage = {side * (0.5 * opening - along), spec.carriage_height + transverse};

    const double sp_ = std::sin(tilt), cp_ = std::cos(tilt);
    const Vec2 dir_prox{-side * sp_, -cp_};
    g.joint = g.carriage + spec.proximal_len * dir_prox;

    const double bend = tilt + psi;
    const double sd = std::sin(bend), cd = std::cos(bend);
    const Vec2 dir_dist{-side * sd, -cd};
    g.tip = g.joint + spec.distal_len * dir_dist;

    g.segments[0] = {g.carriage, g.joint};
    g.segments[1] = {g.joint, g.tip};
    g.orientation = -side * bend;
    return g;
  }

  double clearance(const FingerGeometry& g, const ObjectProfile* object) const {
    if (object == nullptr) return kFree;
    double d = kFree;
    for (const auto& [a, b] : g.segments) {
      d = std::min(d, segment_clearance(a, b, *object).distance);
    }
    return d;
  }
};

struct ChannelAdvance {
  double moved = 0.0;
  bool contact_stop = false;
  std::optional<double> onset;  // fraction of budget at pad onset
};

// Moves one motion channel by up to `budget`, bisecting to the bare-contact
// stop (clearance 0) and, when requested, to the pad onset (clearance = pad).
ChannelAdvance advance_channel(const std::function<double(double)>& clearance_at,
                               double budget, bool track_onset, double pad) {
  ChannelAdvance out;
  if (budget <= 0.0) return out;

  const double d_end = clearance_at(budget);
  if (d_end == kFree) {
    out.moved = budget;
    return out;
  }

  if (track_onset && d_end <= pad && clearance_at(0.0) > pad) {
    double lo = 0.0, hi = budget;
    while (hi - lo > kBisectTol) {
      const double mid = 0.5 * (lo + hi);
      (clearance_at(mid) <= pad ? hi : lo) = mid;
    }
    out.onset = hi;
  }

  if (d_end >= 0.0) {
    out.moved = budget;
    return out;
  }
  double lo = 0.0, hi = budget;
  while (hi - lo > kBisectTol) {
    const double mid = 0.5 * (lo + hi);
    (clearance_at(mid) >= 0.0 ? lo : hi) = mid;
  }
  out.moved = lo;  // last state with nonnegative clearance
  out.contact_stop = true;
  return out;
}

double derived_psi(const GripperSpec& spec, double cam_angle) {
  return spec.gear_ratio * std::max(0.0, cam_angle - spec.idle_stroke);
}

bool finger_has_contact(const std::vector<ContactPoint>& contacts, int finger,
                        Phalange phalange) {
  for (const ContactPoint& c : contacts) {
    if (c.finger == finger && c.phalange == phalange) return true;
  }
  return false;
}

bool grip_arrested(const GripperState& state, int finger) {
  const FingerState& fin = state.fingers[static_cast<std::size_t>(finger)];
  const bool tip_grip = fin.translation_blocked &&
                        finger_has_contact(state.contacts, finger, Phalange::fingertip);
  const bool prox_contact =
      finger_has_contact(state.contacts, finger, Phalange::proximal);
  const bool fully = fin.translation_blocked && fin.distal_blocked &&
                     (fin.tilt_blocked || !prox_contact);
  return tip_grip || fully;
}

}  // namespace

std::vector<ContactPoint> detect_contacts(const GripperState& state,
                                          const ObjectProfile& object, double pad,
                                          double tip_zone) {
  object.validate();
  std::vector<ContactPoint> contacts;
  for (int f = 0; f < 2; ++f) {
    const FingerState& fin = state.fingers[static_cast<std::size_t>(f)];
    for (int s = 0; s < 2; ++s) {
      const auto& [a, b] = fin.segments[static_cast<std::size_t>(s)];
      if (a == b) continue;
      const SegmentClearance c = segment_clearance(a, b, object);
      if (c.distance > pad) continue;
      ContactPoint cp;
      cp.position = c.closest;
      cp.finger = f;
      if (s == 0) {
        cp.phalange = Phalange::proximal;
      } else {
        const double to_tip = geom::norm(c.closest - b);
        cp.phalange = to_tip <= tip_zone ? Phalange::fingertip : Phalange::distal;
      }
      cp.penetration = std::clamp(pad - c.distance, 0.0, pad);
      contacts.push_back(cp);
    }
  }
  return contacts;
}

GripperState initial_state(const GripperSpec& spec, double opening) {
  spec.validate();
  if (!(opening > 0.0) || opening > spec.max_opening) {
    throw SimulationError("unreachable object: opening outside (0, max_opening]");
  }
  GripperState state;
  state.opening = opening;
  const StepContext ctx(spec, opening);
  for (int f = 0; f < 2; ++f) {
    FingerState& fin = state.fingers[static_cast<std::size_t>(f)];
    const FingerGeometry g = ctx.geometry(f, 0.0, 0.0, 0.0);
    fin.segments = g.segments;
    fin.fingertip = geom::make_pose(g.tip, g.orientation);
  }
  return state;
}

GripperState step(const GripperState& state, const GripperSpec& spec,
                  const ObjectProfile* object, double dphi) {
  if (!(dphi > 0.0) || dphi > 0.01 + 1e-15) {
    throw SimulationError("invalid step: dphi must lie in (0, 0.01] rad");
  }
  if (object != nullptr) object->validate();

  const StepContext ctx(spec, state.opening);
  GripperState next = state;
  next.drive = state.drive + dphi;

  const double span = spec.sp.drive_max - spec.sp.drive_min;

  for (int f = 0; f < 2; ++f) {
    FingerState& fin = next.fingers[static_cast<std::size_t>(f)];

    // 1) Linear stroke: the carriage translates until a phalange is stopped
    //    by the object or the drive range runs out.
    if (!fin.translation_blocked && fin.translation_angle < span) {
      const double budget = std::min(dphi, span - fin.translation_angle);
      const auto clearance_at = [&](double lam) {
        return ctx.clearance(
            ctx.geometry(f, fin.translation_angle + lam, fin.psi, fin.tilt), object);
      };
      const ChannelAdvance adv =
          advance_channel(clearance_at, budget, !fin.first_contact_drive.has_value(),
                          spec.pad);
      if (adv.onset) fin.first_contact_drive = state.drive + *adv.onset;
      fin.translation_angle += adv.moved;
      if (adv.contact_stop) fin.translation_blocked = true;
    }

    // 2) Cam and distal phalange. The cam always turns through the idle
    //    stroke; past engagement it drives the distal rotation and stalls
    //    whenever that rotation is blocked, which keeps
    //    psi = gear * max(0, cam - idle) exact at accepted states.
    double remaining = dphi;
    if (fin.cam_angle < spec.idle_stroke) {
      const double to_idle = spec.idle_stroke - fin.cam_angle;
      if (remaining >= to_idle) {
        fin.cam_angle = spec.idle_stroke;  // engagement boundary hit exactly
        remaining -= to_idle;
      } else {
        fin.cam_angle += remaining;
        remaining = 0.0;
      }
    }
    if (remaining > 0.0 && !fin.distal_blocked) {
      const double consumed_before = dphi - remaining;
      const double cam_cap = spec.idle_stroke + spec.psi_max / spec.gear_ratio;
      const double budget = std::min(remaining, cam_cap - fin.cam_angle);
      if (budget <= 0.0) {
        fin.distal_blocked = true;  // structural distal limit
      } else {
        const auto clearance_at = [&](double lam) {
          return ctx.clearance(ctx.geometry(f, fin.translation_angle,
                                            derived_psi(spec, fin.cam_angle + lam),
                                            fin.tilt),
                               object);
        };
        const ChannelAdvance adv = advance_channel(
            clearance_at, budget, !fin.first_contact_drive.has_value(), spec.pad);
        if (adv.onset) {
          fin.first_contact_drive = state.drive + consumed_before + *adv.onset;
        }
        fin.cam_angle += adv.moved;
        if (adv.contact_stop || budget < remaining) fin.distal_blocked = true;
      }
    }
    fin.psi = derived_psi(spec, fin.cam_angle);

    // 3) Conforming proximal tilt: once the proximal phalange itself is the
    //    arrested contact and the drive keeps going past engagement, the
    //    finger rolls about the carriage pin until stopped.
    if (object != nullptr && fin.translation_blocked &&
        fin.cam_angle >= spec.idle_stroke && fin.distal_blocked &&
        !fin.tilt_blocked) {
      const FingerGeometry g =
          ctx.geometry(f, fin.translation_angle, fin.psi, fin.tilt);
      const double prox_clear =
          segment_clearance(g.segments[0].first, g.segments[0].second, *object)
              .distance;
      if (prox_clear <= spec.pad) {
        const auto clearance_at = [&](double lam) {
          return ctx.clearance(
              ctx.geometry(f, fin.translation_angle, fin.psi, fin.tilt + lam), object);
        };
        const ChannelAdvance adv =
            advance_channel(clearance_at, dphi, false, spec.pad);
        fin.tilt += adv.moved;
        if (adv.contact_stop) fin.tilt_blocked = true;
      }
    }

    const FingerGeometry g = ctx.geometry(f, fin.translation_angle, fin.psi, fin.tilt);
    fin.segments = g.segments;
    fin.fingertip = geom::make_pose(g.tip, g.orientation);
  }

  next.contacts = object != nullptr
                      ? detect_contacts(next, *object, spec.pad, spec.fingertip_zone)
                      : std::vector<ContactPoint>{};
  next.mode = (next.fingers[0].psi == 0.0 && next.fingers[1].psi == 0.0)
                  ? GraspMode::parallel_pinch
                  : GraspMode::adaptive_envelope;
  return next;
}

GraspResult run_grasp(const GripperSpec& spec, const GraspScenario& scenario,
                      std::vector<GripperState>* history) {
  spec.validate();
  scenario.object.validate();

  // Reachability: the object must overlap the vertical band the phalanges
  // sweep; anything below the fingertips or above the carriages cannot be
  // touched by any drive angle.
  if (scenario.object.max_y() < spec.tip_height() - spec.pad ||
      scenario.object.min_y() > spec.carriage_height + spec.pad) {
    throw SimulationError("unreachable object: outside the finger sweep band");
  }

  GripperState state = initial_state(spec, scenario.opening);
  for (const FingerState& fin : state.fingers) {
    for (const auto& [a, b] : fin.segments) {
      if (segment_clearance(a, b, scenario.object).distance <= 0.0) {
        throw SimulationError("unreachable object: does not fit between open fingers");
      }
    }
  }

  GraspResult result;
  if (history != nullptr) history->push_back(state);
  while (state.drive < spec.max_drive - 1e-12) {
    if (grip_arrested(state, 0) && grip_arrested(state, 1)) break;
    const double dstep = std::min(spec.step_size, spec.max_drive - state.drive);
    state = step(state, spec, &scenario.object, dstep);
    ++result.steps;
    if (history != nullptr) history->push_back(state);
  }

  const bool tip0 = finger_has_contact(state.contacts, 0, Phalange::fingertip);
  const bool tip1 = finger_has_contact(state.contacts, 1, Phalange::fingertip);
  bool non_tip = false;
  for (const ContactPoint& c : state.contacts) {
    non_tip = non_tip || c.phalange != Phalange::fingertip;
  }

  result.contact_count = static_cast<int>(state.contacts.size());
  if (result.contact_count >= 3 && non_tip) {
    result.classification = GraspClass::envelope;
  } else if (tip0 && tip1) {
    result.classification = GraspClass::pinch;
  } else {
    result.classification = GraspClass::failure;
  }
  result.mode = state.mode;
  result.object_displacement = 0.0;  // object is fixed during closure
  result.final_state = std::move(state);
  return result;
}

std::vector<std::pair<double, double>> fingertip_height_profile(
    const GripperSpec& spec, double drive0, double drive1, std::size_t n) {
  spec.validate();
  if (n == 0) {
    throw SimulationError("fingertip_height_profile: need at least one sample");
  }
  if (drive0 < 0.0 || drive1 < 0.0 ||
      std::max(drive0, drive1) > spec.idle_stroke + 1e-12) {
    throw SimulationError("adaptive phase entered: sweep must stay within the idle stroke");
  }
  const StepContext ctx(spec, spec.max_opening);
  std::vector<std::pair<double, double>> out;
  const std::size_t count = drive0 == drive1 ? 1 : n;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1
                         ? drive0
                         : drive0 + (drive1 - drive0) * static_cast<double>(i) /
                                        static_cast<double>(count - 1);
    out.emplace_back(t, ctx.geometry(0, t, 0.0, 0.0).tip.y);
  }
  return out;
}

}  // namespace spd::grasp
