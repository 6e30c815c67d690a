#ifndef SPD_LINKAGE_HPP
#define SPD_LINKAGE_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "spd/geom.hpp"

namespace spd::linkage {

using geom::LineFit;
using geom::Pose2;
using geom::Vec2;

// ---------------------------------------------------------------------------
// Classical inversor cell
// ---------------------------------------------------------------------------

/// Eight-bar straight-line cell. The crank pivot sits at crank-length from
/// the fixed pivot (|E - A| = r), which is what makes the output node trace
/// an exact line: the crank circle passes through the inversion center.
struct PeaucellierSpec {
  Vec2 fixed_pivot_e{0.0, 0.0};
  Vec2 crank_pivot_a{60.0, 0.0};
  double crank_len = 60.0;   // |AB|
  double long_len = 100.0;   // |EC1| = |EC2|
  double short_len = 55.0;   // |BC1| = |BC2| = |DC1| = |DC2|

  /// Inversor constant k^2 = long^2 - short^2 (mm^2).
  double inversor_k2() const { return long_len * long_len - short_len * short_len; }

  /// Throws KinematicsError when the cell condition or length ordering fails.
  void validate() const;
};

enum class Branch { upper, lower };

/// Assembled cell at one crank angle. `branch` records which kite intersection
/// was labelled C1 (upper = positive cross-product side of ray E->B).
struct PeaucellierConfig {
  double crank_angle = 0.0;
  Vec2 b, c1, c2, d, f;  // f = midpoint of C1C2
  Branch branch = Branch::upper;
};

/// Forward kinematics of the cell at crank angle `alpha`.
/// Throws "inversor singularity" when B lands on E and "assembly failure"
/// when the kite circles cannot intersect.
PeaucellierConfig peaucellier_fk(const PeaucellierSpec& spec, double alpha,
                                 Branch branch = Branch::upper);

/// Both sides of the inversor identity: lhs = k^2, rhs = |DE| * |BE|.
struct InversorInvariant {
  double lhs = 0.0;       // mm^2
  double rhs = 0.0;       // mm^2
  double residual = 0.0;  // |lhs - rhs|, mm^2
};

InversorInvariant inversor_invariant(const PeaucellierConfig& config,
                                     const PeaucellierSpec& spec);

/// The analytic output line of the cell: perpendicular to ray E->A at signed
/// distance k^2 / (2 r) from E.
struct AnalyticLine {
  Vec2 point;
  Vec2 direction;  // unit
};

AnalyticLine peaucellier_output_line(const PeaucellierSpec& spec);

// ---------------------------------------------------------------------------
// Reduced five-component cell (ternary rail + slotted guides)
// ---------------------------------------------------------------------------

/// Five-component reduction of the cell: the collinear node triple D-B-E is
/// merged into one rigid ternary rail. The rail slides through fixed guide
/// pins at the classical B and E positions (spaced `station_spacing_be` along
/// `slider_axis` from the base origin), carries output node D at
/// `station_spacing_bd` beyond station B, and is driven by a crank through a
/// two-bar chain l2-l3 whose elbow angle is held by the tension spring
/// (spring attachment at the link midpoints, so the held crank-tip-to-rail
/// chord is exactly 2 * tension_spring_rest).
///
/// All coordinates are in the base frame; `base` maps them to the world.
struct SpLinkageSpec {
  Pose2 base{};
  double station_spacing_be = 20.0;  // d_BE, guide pin spacing along the axis
  double station_spacing_bd = 25.0;  // d_BD, node D beyond station B
  double link_l2_len = 40.0;
  double link_l3_len = 40.0;
  Vec2 slider_axis{0.0, 1.0};        // unit, base frame
  double drive_radius = 15.0;
  Vec2 crank_pivot{-40.0, -30.0};    // base frame
  double rail_pin_offset = 0.0;      // drive-pin station along the rail, from station E
  double tension_spring_rest = 25.0;
  double tension_spring_stiffness = 1.2;  // N/mm; rest-position selector only
  double drive_min = -2.0;               // documented drive range
  double drive_max = 0.7;

  /// Chord |crank tip - rail pin| held by the sprung elbow.
  double effective_coupler_len() const { return 2.0 * tension_spring_rest; }
  /// Drive angle of the documented rest configuration.
  double rest_angle() const { return drive_min; }

  void validate() const;
};

/// Solved closure at one drive angle. Node positions are in the world frame;
/// slide_b / slide_e are the displacements of the guide pins along the rail,
/// measured from their material stations (equal for a rigid rail).
struct SpConfig {
  double drive_angle = 0.0;
  Vec2 crank_tip, elbow, rail_pin;
  Vec2 station_b, station_e, node_d;
  double slide_b = 0.0;
  double slide_e = 0.0;
  double rail_tilt = 0.0;  // rad, rail axis vs slider_axis
  double residual = 0.0;   // max constraint violation, mm
  int iterations = 0;
};

/// Damped-Newton closure solver with continuation: each solve starts from the
/// previous solution (or the documented rest pose for the first call), which
/// pins the assembly branch across a sweep.
class SpSolver {
 public:
  explicit SpSolver(const SpLinkageSpec& spec);

  /// Solves the loop-closure system at drive angle `phi`.
  /// Throws "assembly failure at phi=..." on non-convergence and
  /// "near-singular configuration" when cond(J) > 1e12.
  SpConfig solve(double phi);

  /// Drops the continuation state; the next solve reseeds from rest.
  void reset() { has_prev_ = false; }

  static constexpr double kTolerance = 1e-10;  // mm
  static constexpr int kMaxIterations = 200;
  static constexpr double kMaxCondition = 1e12;

 private:
  SpLinkageSpec spec_;
  std::array<double, 5> x_{};  // rail point (2), rail tilt, elbow (2); base frame
  bool has_prev_ = false;

  std::array<double, 5> rest_seed(double phi) const;
};

/// One-shot closure solve (fresh solver seeded at the rest pose).
SpConfig sp_fk(const SpLinkageSpec& spec, double phi);

// ---------------------------------------------------------------------------
// Double parallelogram (orientation lock)
// ---------------------------------------------------------------------------

struct DpmLoop {
  double long_side = 40.0;
  double short_side = 16.0;
};

/// Two identical parallelogram loops in series. Opposite sides are equal by
/// construction (only one length is stored per pair), which is the condition
/// that cancels all rotation between base and fingertip.
struct DpmSpec {
  DpmLoop loop1{};
  DpmLoop loop2{};
  Pose2 base{};
  Vec2 fingertip_offset{0.0, -10.0};

  void validate() const;
};

/// Fingertip pose for the two loop crank angles (measured in the base frame
/// from the +x axis). Orientation equals the base orientation exactly; the
/// position is the vector sum of the two loop translations plus the offset.
/// Throws "parallelogram flip singularity" at |angle| >= pi/2.
Pose2 dpm_fingertip(const DpmSpec& spec, double angle1, double angle2);

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

struct TraceSample {
  double drive = 0.0;  // rad
  std::map<std::string, Vec2> nodes;
  Pose2 fingertip{};
  double residual = 0.0;
};

/// Ordered sweep samples. Drive inputs must be strictly monotonic.
struct Trace {
  std::vector<TraceSample> samples;

  void append(TraceSample sample);  // enforces monotonicity
  std::size_t size() const { return samples.size(); }
};

/// Sweeps the classical cell over [alpha0, alpha1] with `n` samples
/// (n >= 2, endpoints included). Every sample must assemble.
Trace peaucellier_sweep(const PeaucellierSpec& spec, double alpha0, double alpha1,
                        std::size_t n, Branch branch = Branch::upper);

/// Sweeps the reduced cell over [phi0, phi1] with `n` samples using one
/// continuation solver.
Trace sp_sweep(const SpLinkageSpec& spec, double phi0, double phi1, std::size_t n);

/// Straightness of one node across a trace (total-least-squares fit).
/// Requires >= 10 samples; throws "unknown node" for absent node names.
LineFit straightness(const Trace& trace, const std::string& node);

}  // namespace spd::linkage

#endif  // SPD_LINKAGE_HPP
