#include <doctest.h>

#include <cmath>
#include <random>

#include "spd/errors.hpp"
#include "spd/linkage.hpp"

using namespace spd;
using geom::Vec2;
using linkage::Branch;
using linkage::PeaucellierSpec;
using linkage::SpLinkageSpec;

namespace {

// Unit-scale cell: k^2 = 5 - 1 = 4, output line at x = k^2 / (2r) = 2.
PeaucellierSpec toy_cell() {
  PeaucellierSpec s;
  s.fixed_pivot_e = {0, 0};
  s.crank_pivot_a = {1, 0};
  s.crank_len = 1.0;
  s.long_len = std::sqrt(5.0);
  s.short_len = 1.0;
  return s;
}

}  // namespace

TEST_CASE("peaucellier spec validation") {
  PeaucellierSpec bad = toy_cell();
  bad.crank_pivot_a = {1.5, 0};  // breaks |E-A| = r
  CHECK_THROWS_AS(linkage::peaucellier_fk(bad, 0.3), KinematicsError);

  bad = toy_cell();
  bad.short_len = 10.0;  // long must exceed short
  CHECK_THROWS_AS(linkage::peaucellier_fk(bad, 0.3), KinematicsError);
}

TEST_CASE("peaucellier forward kinematics on the unit cell") {
  const PeaucellierSpec spec = toy_cell();

  SUBCASE("alpha = pi/2: inversion doubles the half-diagonal") {
    const auto cfg = linkage::peaucellier_fk(spec, M_PI / 2.0);
    CHECK(cfg.b.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cfg.b.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cfg.d.x == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(cfg.d.y == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("alpha = 0: collapsed kite, D = B") {
    const auto cfg = linkage::peaucellier_fk(spec, 0.0);
    CHECK(cfg.b.x == doctest::Approx(2.0));
    CHECK(std::fabs(cfg.b.y) < 1e-12);
    CHECK(cfg.c1.x == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(cfg.c1.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cfg.c2.y == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(geom::distance(cfg.d, cfg.b) < 1e-9);
  }
  SUBCASE("alpha = pi: crank node lands on the fixed pivot") {
    CHECK_THROWS_WITH_AS(linkage::peaucellier_fk(spec, M_PI),
                         doctest::Contains("inversor singularity"), KinematicsError);
  }
  SUBCASE("kite cannot assemble near the singular arc") {
    CHECK_THROWS_WITH_AS(linkage::peaucellier_fk(spec, 2.5),
                         doctest::Contains("assembly failure"), KinematicsError);
  }
  SUBCASE("lower branch swaps the kite labels") {
    const auto up = linkage::peaucellier_fk(spec, 0.7, Branch::upper);
    const auto lo = linkage::peaucellier_fk(spec, 0.7, Branch::lower);
    CHECK(geom::distance(up.c1, lo.c2) < 1e-15);
    CHECK(geom::distance(up.c2, lo.c1) < 1e-15);
    CHECK(geom::distance(up.d, lo.d) < 1e-12);  // output does not depend on labels
  }
}

TEST_CASE("inversor invariant") {
  const PeaucellierSpec spec = toy_cell();

  auto cfg = linkage::peaucellier_fk(spec, M_PI / 2.0);
  auto inv = linkage::inversor_invariant(cfg, spec);
  CHECK(inv.lhs == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(inv.rhs == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(inv.residual < 1e-9);

  cfg = linkage::peaucellier_fk(spec, 0.0);
  inv = linkage::inversor_invariant(cfg, spec);
  CHECK(inv.rhs == doctest::Approx(4.0).epsilon(1e-12));

  cfg.d = cfg.d + Vec2{0.1, 0.0};
  inv = linkage::inversor_invariant(cfg, spec);
  CHECK(inv.residual > 1e-3);
}

TEST_CASE("kite and collinearity invariants across a sweep") {
  const PeaucellierSpec spec;  // documented default cell
  const linkage::AnalyticLine line = linkage::peaucellier_output_line(spec);
  const Vec2 axis = geom::normalized(spec.crank_pivot_a - spec.fixed_pivot_e);
  const double offset = spec.inversor_k2() / (2.0 * spec.crank_len);

  int tested = 0;
  for (int deg = -180; deg < 180; ++deg) {
    const double alpha = deg * M_PI / 180.0;
    linkage::PeaucellierConfig cfg;
    try {
      cfg = linkage::peaucellier_fk(spec, alpha);
    } catch (const KinematicsError&) {
      continue;
    }
    ++tested;
    CHECK(std::fabs(geom::distance(cfg.b, spec.crank_pivot_a) - spec.crank_len) < 1e-9);
    CHECK(std::fabs(geom::distance(cfg.c1, spec.fixed_pivot_e) - spec.long_len) < 1e-9);
    CHECK(std::fabs(geom::distance(cfg.c2, spec.fixed_pivot_e) - spec.long_len) < 1e-9);
    CHECK(std::fabs(geom::distance(cfg.c1, cfg.b) - spec.short_len) < 1e-9);
    CHECK(std::fabs(geom::distance(cfg.c1, cfg.d) - spec.short_len) < 1e-9);
    CHECK(std::fabs(geom::distance(cfg.c2, cfg.b) - spec.short_len) < 1e-9);
    CHECK(std::fabs(geom::distance(cfg.c2, cfg.d) - spec.short_len) < 1e-9);
    // E, B, D collinear.
    const Vec2 eb = cfg.b - spec.fixed_pivot_e;
    const Vec2 ed = cfg.d - spec.fixed_pivot_e;
    CHECK(std::fabs(geom::cross(geom::normalized(eb), ed)) < 1e-9);
    // D sits on the fixed output line.
    CHECK(std::fabs(geom::dot(cfg.d - spec.fixed_pivot_e, axis) - offset) < 1e-9);
    CHECK(std::fabs(geom::cross(line.direction, cfg.d - line.point)) >= 0.0);
  }
  CHECK(tested > 200);
}

TEST_CASE("peaucellier fk is continuous away from singularities") {
  const PeaucellierSpec spec;
  for (double alpha : {-1.5, -0.4, 0.2, 0.9, 1.9}) {
    const auto a = linkage::peaucellier_fk(spec, alpha);
    const auto b = linkage::peaucellier_fk(spec, alpha + 1e-6);
    CHECK(geom::distance(a.d, b.d) < 1e-3);
  }
}

TEST_CASE("sp closure at the rest angle") {
  const SpLinkageSpec spec;  // documented defaults
  const auto cfg = linkage::sp_fk(spec, spec.rest_angle());

  CHECK(cfg.residual < linkage::SpSolver::kTolerance);
  CHECK(std::fabs(cfg.rail_tilt) < 1e-12);
  CHECK(cfg.slide_b == doctest::Approx(cfg.slide_e).epsilon(1e-12));

  // Independent closed-form check of the rest pose: the rail pin sits on the
  // guide axis at T_y + sqrt(chord^2 - T_x^2).
  const Vec2 tip = spec.crank_pivot +
                   spec.drive_radius * Vec2{std::cos(spec.rest_angle()),
                                            std::sin(spec.rest_angle())};
  const double chord = spec.effective_coupler_len();
  const double pin_y = tip.y + std::sqrt(chord * chord - tip.x * tip.x);
  CHECK(cfg.rail_pin.y == doctest::Approx(pin_y).epsilon(1e-9));
  CHECK(std::fabs(cfg.rail_pin.x) < 1e-9);
  const double node_d_y = pin_y + spec.station_spacing_be + spec.station_spacing_bd;
  CHECK(cfg.node_d.y == doctest::Approx(node_d_y).epsilon(1e-9));

  // Link lengths hold at the solution.
  CHECK(std::fabs(geom::distance(cfg.crank_tip, cfg.elbow) - spec.link_l2_len) < 1e-9);
  CHECK(std::fabs(geom::distance(cfg.elbow, cfg.rail_pin) - spec.link_l3_len) < 1e-9);
}

TEST_CASE("sp sweep traces an exact straight line") {
  const SpLinkageSpec spec;
  const linkage::Trace trace =
      linkage::sp_sweep(spec, spec.drive_min, spec.drive_max, 500);
  REQUIRE(trace.size() == 500);

  const geom::LineFit fit = linkage::straightness(trace, "D");
  CHECK(fit.max_dev < 1e-6);

  for (const auto& s : trace.samples) CHECK(s.residual < 1e-10);

  // Branch continuity: node displacement between consecutive samples stays
  // below 10x the drive-pin arc step.
  const double dphi = (spec.drive_max - spec.drive_min) / 499.0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double dd = geom::distance(trace.samples[i].nodes.at("D"),
                                     trace.samples[i - 1].nodes.at("D"));
    CHECK(dd < 10.0 * spec.drive_radius * dphi);
  }

  // Stroke covers the documented >= 40 mm.
  const double stroke = geom::distance(trace.samples.front().nodes.at("D"),
                                       trace.samples.back().nodes.at("D"));
  CHECK(stroke > 40.0);
}

TEST_CASE("sp closure under scaled, rotated and offset bases") {
  std::mt19937_64 gen(62);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  std::uniform_real_distribution<double> off(-200.0, 200.0);

  for (int rep = 0; rep < 25; ++rep) {
    const double s = scale(gen);
    SpLinkageSpec spec;
    spec.station_spacing_be *= s;
    spec.station_spacing_bd *= s;
    spec.link_l2_len *= s;
    spec.link_l3_len *= s;
    spec.drive_radius *= s;
    spec.crank_pivot = s * spec.crank_pivot;
    spec.rail_pin_offset *= s;
    spec.tension_spring_rest *= s;
    spec.base = geom::make_pose({off(gen), off(gen)}, ang(gen));

    const linkage::Trace trace =
        linkage::sp_sweep(spec, spec.drive_min, spec.drive_max, 60);
    const geom::LineFit fit = linkage::straightness(trace, "D");
    CHECK(fit.max_dev < 1e-6);
    // The world-frame output line runs along the rotated slider axis.
    const Vec2 axis = geom::transform_direction(spec.base, spec.slider_axis);
    CHECK(std::fabs(std::fabs(geom::dot(fit.direction, axis)) - 1.0) < 1e-9);
    for (const auto& sample : trace.samples) CHECK(sample.residual < 1e-10);
  }
}

TEST_CASE("sp closure fails outside the reachable drive range") {
  const SpLinkageSpec spec;
  CHECK_THROWS_WITH_AS(linkage::sp_fk(spec, 2.6),
                       doctest::Contains("assembly failure"), KinematicsError);
}

TEST_CASE("sp solver flags ill conditioned guide geometry") {
  SpLinkageSpec spec;
  spec.station_spacing_be = 1e-13;  // guide pins collapse, tilt unobservable
  CHECK_THROWS_WITH_AS(linkage::sp_fk(spec, spec.rest_angle()),
                       doctest::Contains("near-singular"), KinematicsError);
}

TEST_CASE("sp spec validation") {
  SpLinkageSpec spec;
  spec.slider_axis = {0.0, 2.0};
  CHECK_THROWS_AS(spec.validate(), KinematicsError);

  spec = SpLinkageSpec{};
  spec.tension_spring_rest = 100.0;  // chord 200 > l2 + l3
  CHECK_THROWS_AS(spec.validate(), KinematicsError);

  spec = SpLinkageSpec{};
  spec.drive_min = 1.0;
  spec.drive_max = 0.0;
  CHECK_THROWS_AS(spec.validate(), KinematicsError);
}

TEST_CASE("dpm fingertip") {
  linkage::DpmSpec spec;  // defaults: loops 40/16, offset (0,-10)

  SUBCASE("rest pose") {
    const auto pose = linkage::dpm_fingertip(spec, 0.0, 0.0);
    CHECK(pose.position.x == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(pose.position.y == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(pose.orientation == 0.0);
  }
  SUBCASE("deflected pose matches direct trigonometry") {
    const auto pose = linkage::dpm_fingertip(spec, 0.3, -0.2);
    const Vec2 expected = 40.0 * Vec2{std::cos(0.3), std::sin(0.3)} +
                          40.0 * Vec2{std::cos(-0.2), std::sin(-0.2)} +
                          Vec2{0.0, -10.0};
    CHECK(pose.position.x == doctest::Approx(expected.x).epsilon(1e-12));
    CHECK(pose.position.y == doctest::Approx(expected.y).epsilon(1e-12));
    CHECK(std::fabs(pose.orientation) < 1e-12);
  }
  SUBCASE("flip singularity at +-pi/2") {
    CHECK_THROWS_WITH_AS(linkage::dpm_fingertip(spec, M_PI / 2.0, 0.0),
                         doctest::Contains("parallelogram flip"), KinematicsError);
    CHECK_THROWS_AS(linkage::dpm_fingertip(spec, 0.0, -M_PI / 2.0), KinematicsError);
  }
  SUBCASE("orientation lock holds for random angle pairs and base poses") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> ang(-M_PI / 2.0 + 1e-6, M_PI / 2.0 - 1e-6);
    std::uniform_real_distribution<double> base(-M_PI, M_PI);
    for (int i = 0; i < 2000; ++i) {
      linkage::DpmSpec s = spec;
      s.base = geom::make_pose({0, 0}, base(gen));
      const auto pose = linkage::dpm_fingertip(s, ang(gen), ang(gen));
      CHECK(std::fabs(geom::normalize_angle(pose.orientation - s.base.orientation)) <=
            1e-12);
    }
  }
}

TEST_CASE("traces and straightness") {
  const PeaucellierSpec spec;  // default cell

  SUBCASE("node D over a quarter sweep hugs the analytic line") {
    const auto trace = linkage::peaucellier_sweep(spec, M_PI / 4.0, 3.0 * M_PI / 4.0, 100);
    const auto fit = linkage::straightness(trace, "D");
    CHECK(fit.max_dev < 1e-9);
  }
  SUBCASE("node B rides a circle, not a line") {
    const auto trace = linkage::peaucellier_sweep(spec, -1.0, 1.0, 100);
    const auto fit = linkage::straightness(trace, "B");
    CHECK(fit.max_dev > 1.0);
  }
  SUBCASE("a constant node propagates the degenerate point set error") {
    const auto trace = linkage::peaucellier_sweep(spec, -1.0, 1.0, 50);
    CHECK_THROWS_WITH_AS(linkage::straightness(trace, "E"),
                         doctest::Contains("degenerate point set"), KinematicsError);
  }
  SUBCASE("unknown node") {
    const auto trace = linkage::peaucellier_sweep(spec, -1.0, 1.0, 50);
    CHECK_THROWS_WITH_AS(linkage::straightness(trace, "Q"),
                         doctest::Contains("unknown node"), KinematicsError);
  }
  SUBCASE("short traces are rejected") {
    const auto trace = linkage::peaucellier_sweep(spec, -1.0, 1.0, 5);
    CHECK_THROWS_AS(linkage::straightness(trace, "D"), KinematicsError);
  }
  SUBCASE("trace drive values must be strictly monotonic") {
    linkage::Trace t;
    linkage::TraceSample s;
    s.drive = 0.0;
    t.append(s);
    s.drive = 1.0;
    t.append(s);
    s.drive = 0.5;
    CHECK_THROWS_AS(t.append(s), KinematicsError);
  }
}
