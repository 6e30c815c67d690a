#ifndef SPD_GRASP_HPP
#define SPD_GRASP_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spd/geom.hpp"
#include "spd/linkage.hpp"

namespace spd::grasp {

using geom::Pose2;
using geom::Vec2;

// World frame: tabletop at y = 0, palm centerline along the y axis. Each
// finger hangs from a carriage that the reduced linkage translates
// horizontally, so fingertip height is invariant during the parallel phase.

/// Grasp target cross-section: a circle or a strictly convex CCW polygon.
struct ObjectProfile {
  enum class Shape { circle, polygon };

  Shape shape = Shape::circle;
  Vec2 center{};           // circle only
  double radius = 0.0;     // circle only
  std::vector<Vec2> vertices;  // polygon only, CCW, strictly convex

  static ObjectProfile make_circle(Vec2 center, double radius);
  static ObjectProfile make_polygon(std::vector<Vec2> vertices);

  void validate() const;  // throws "malformed object"
  double min_y() const;
  double max_y() const;
};

/// Signed distance from a segment to the object surface (negative inside),
/// with the closest point on the segment and its parameter t in [0, 1].
struct SegmentClearance {
  double distance = 0.0;
  Vec2 closest{};
  double t = 0.0;
};

SegmentClearance segment_clearance(Vec2 a, Vec2 b, const ObjectProfile& object);

enum class Phalange { proximal, distal, fingertip };
enum class GraspMode { parallel_pinch, adaptive_envelope };
enum class GraspClass { pinch, envelope, failure };

const char* to_string(GraspMode mode);
const char* to_string(GraspClass c);
const char* to_string(Phalange p);

struct ContactPoint {
  Vec2 position{};
  int finger = 0;  // 0 = left, 1 = right
  Phalange phalange = Phalange::proximal;
  double penetration = 0.0;  // pad engagement depth, clamped to [0, pad]
};

struct FingerState {
  double cam_angle = 0.0;          // accumulated cam rotation
  double translation_angle = 0.0;  // drive consumed by the linear stroke
  double psi = 0.0;                // distal rotation = gear * max(0, cam - idle)
  double tilt = 0.0;               // proximal conforming rotation
  bool translation_blocked = false;
  bool distal_blocked = false;
  bool tilt_blocked = false;
  std::optional<double> first_contact_drive;  // total drive angle at pad onset
  Pose2 fingertip{};
  std::array<std::pair<Vec2, Vec2>, 2> segments{};  // [proximal, distal]
};

struct GripperState {
  double drive = 0.0;
  std::array<FingerState, 2> fingers{};
  GraspMode mode = GraspMode::parallel_pinch;
  std::vector<ContactPoint> contacts;
  double opening = 0.0;  // rest fingertip gap the rollout started from
};

/// Two mirror-image fingers on a shared drive. Per-finger geometry hangs a
/// proximal and a distal phalange from the linkage output carriage.
struct GripperSpec {
  double palm_width = 120.0;
  double carriage_height = 73.0;
  double proximal_len = 40.0;
  double distal_len = 23.0;
  double idle_stroke = M_PI / 2.0;  // cam rotation before engagement
  double gear_ratio = 1.0;          // distal rotation per cam rotation past idle
  double max_drive = 2.7;
  double pad = 2.0;                 // fingertip pad thickness, mm
  double fingertip_zone = 0.5;      // contact-to-tip distance classed as fingertip, mm
  double max_opening = 100.0;
  double psi_max = M_PI / 2.0;      // structural distal rotation limit
  double step_size = 0.005;         // rollout drive step, rad
  bool independent_drive = false;   // both ramps are identical quasi-statically
  linkage::SpLinkageSpec sp{};
  linkage::DpmSpec dpm{};

  void validate() const;
  double tip_height() const { return carriage_height - proximal_len - distal_len; }
};

struct GraspScenario {
  ObjectProfile object;
  double opening = 40.0;  // rest fingertip gap, mm
};

struct GraspResult {
  GripperState final_state;
  GraspMode mode = GraspMode::parallel_pinch;
  int contact_count = 0;
  GraspClass classification = GraspClass::failure;
  double object_displacement = 0.0;  // object is fixed during closure
  std::size_t steps = 0;
};

/// Rest state at the given fingertip opening.
GripperState initial_state(const GripperSpec& spec, double opening);

/// Advances the drive by dphi (0 < dphi <= 0.01 rad). Channels move in order
/// translation -> distal -> proximal tilt, each bisected to its contact stop
/// within 1e-6 rad; the cam stalls when its downstream channel is blocked so
/// psi = gear * max(0, cam - idle) holds at every accepted state.
/// `object` may be null for free-space rollouts.
GripperState step(const GripperState& state, const GripperSpec& spec,
                  const ObjectProfile* object, double dphi);

/// Pad contacts (surface distance <= pad) for every phalange segment. Distal
/// contacts within `tip_zone` of the tip end are classed as fingertip.
std::vector<ContactPoint> detect_contacts(const GripperState& state,
                                          const ObjectProfile& object, double pad,
                                          double tip_zone = 0.5);

/// Quasi-static rollout: steps until both fingers are grip-arrested or the
/// drive limit is reached, then classifies the outcome. When `history` is
/// given it receives every accepted state including the initial one.
GraspResult run_grasp(const GripperSpec& spec, const GraspScenario& scenario,
                      std::vector<GripperState>* history = nullptr);

/// Fingertip height samples over a free-space parallel-phase sweep.
/// Throws "adaptive phase entered" when the sweep crosses the idle stroke.
std::vector<std::pair<double, double>> fingertip_height_profile(
    const GripperSpec& spec, double drive0, double drive1, std::size_t n);

}  // namespace spd::grasp

#endif  // SPD_GRASP_HPP
