#include "spd/linkage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spd/errors.hpp"

namespace spd::linkage {

namespace {

constexpr double kGeomTol = 1e-9;

std::string format_angle(double a) {
  std::ostringstream os;
  os.precision(12);
  os << a;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Classical cell
// ---------------------------------------------------------------------------

void PeaucellierSpec::validate() const {
  if (!(crank_len > 0.0) || !(short_len > 0.0) || !(long_len > short_len)) {
    throw KinematicsError("peaucellier spec: lengths must satisfy long > short > 0 and crank > 0");
  }
  const double pivot_gap = geom::distance(fixed_pivot_e, crank_pivot_a);
  if (std::fabs(pivot_gap - crank_len) > kGeomTol) {
    throw KinematicsError(
        "peaucellier spec: crank pivot must sit at crank-length from the fixed pivot "
        "(cell condition |E-A| = r)");
  }
}

PeaucellierConfig peaucellier_fk(const PeaucellierSpec& spec, double alpha, Branch branch) {
  spec.validate();

  PeaucellierConfig cfg;
  cfg.crank_angle = alpha;
  cfg.branch = branch;
  cfg.b = spec.crank_pivot_a + spec.crank_len * Vec2{std::cos(alpha), std::sin(alpha)};

  const Vec2 eb = cfg.b - spec.fixed_pivot_e;
  if (geom::norm(eb) < kGeomTol) {
    throw KinematicsError("inversor singularity: crank node coincides with the fixed pivot");
  }

  const geom::CircleIntersections kite =
      geom::try_circle_intersect(spec.fixed_pivot_e, spec.long_len, cfg.b, spec.short_len);
  if (kite.count == 0) {
    throw KinematicsError("assembly failure: kite circles do not intersect at alpha=" +
                          format_angle(alpha));
  }

  if (kite.count == 1) {
    // Fully stretched / folded kite: both kite joints coincide and D is the
    // reflection of B through that single point along line E-B.
    cfg.c1 = kite.points[0];
    cfg.c2 = kite.points[0];
    cfg.d = 2.0 * cfg.c1 - cfg.b;
  } else {
    cfg.c1 = branch == Branch::upper ? kite.points[0] : kite.points[1];
    cfg.c2 = branch == Branch::upper ? kite.points[1] : kite.points[0];
    // D mirrors B across the kite chord C1C2; this keeps the kite symmetry
    // exact in floating point.
    const Vec2 u = geom::normalized(cfg.c2 - cfg.c1);
    const Vec2 m = cfg.c1 + geom::dot(cfg.b - cfg.c1, u) * u;
    cfg.d = 2.0 * m - cfg.b;
  }
  cfg.f = 0.5 * (cfg.c1 + cfg.c2);
  return cfg;
}

InversorInvariant inversor_invariant(const PeaucellierConfig& config,
                                     const PeaucellierSpec& spec) {
  InversorInvariant out;
  out.lhs = spec.inversor_k2();
  out.rhs = geom::distance(config.d, spec.fixed_pivot_e) *
            geom::distance(config.b, spec.fixed_pivot_e);
  out.residual = std::fabs(out.lhs - out.rhs);
  return out;
}

AnalyticLine peaucellier_output_line(const PeaucellierSpec& spec) {
  spec.validate();
  const Vec2 u = geom::normalized(spec.crank_pivot_a - spec.fixed_pivot_e);
  const double offset = spec.inversor_k2() / (2.0 * spec.crank_len);
  return AnalyticLine{spec.fixed_pivot_e + offset * u, geom::perp(u)};
}

// ---------------------------------------------------------------------------
// Reduced cell
// ---------------------------------------------------------------------------

void SpLinkageSpec::validate() const {
  const bool lengths_ok = station_spacing_be > 0.0 && station_spacing_bd > 0.0 &&
                          link_l2_len > 0.0 && link_l3_len > 0.0 && drive_radius > 0.0 &&
                          tension_spring_rest > 0.0 && tension_spring_stiffness > 0.0;
  if (!lengths_ok) {
    throw KinematicsError("sp spec: all lengths must be positive and finite");
  }
  if (std::fabs(geom::norm(slider_axis) - 1.0) > kGeomTol) {
    throw KinematicsError("sp spec: slider_axis must be unit length");
  }
  const double chord = effective_coupler_len();
  if (chord > link_l2_len + link_l3_len || chord < std::fabs(link_l2_len - link_l3_len)) {
    throw KinematicsError(
        "sp spec: tension spring rest length incompatible with link lengths l2, l3");
  }
  if (!(drive_min < drive_max)) {
    throw KinematicsError("sp spec: drive range must satisfy drive_min < drive_max");
  }
}

namespace {

struct SpProblem {
  const SpLinkageSpec& spec;
  Vec2 crank_tip;  // base frame, fixed during one solve

  Vec2 guide_e() const { return {0.0, 0.0}; }
  Vec2 guide_b() const { return spec.station_spacing_be * spec.slider_axis; }

  // Residual vector. Unknowns: rail reference point p (= station E material
  // point), rail tilt tau, elbow point C. All residuals are in millimetres.
  std::array<double, 5> residuals(const std::array<double, 5>& x) const {
    const Vec2 p{x[0], x[1]};
    const double tau = x[2];
    const Vec2 c{x[3], x[4]};
    const Vec2 d = geom::rotated(spec.slider_axis, tau);
    const Vec2 pm = p + spec.rail_pin_offset * d;
    return {
        geom::cross(d, guide_e() - p),                             // pin E on rail axis
        geom::cross(d, guide_b() - p),                             // pin B on rail axis
        geom::distance(crank_tip, c) - spec.link_l2_len,           // link l2
        geom::distance(c, pm) - spec.link_l3_len,                  // link l3
        geom::distance(crank_tip, pm) - spec.effective_coupler_len()  // sprung elbow chord
    };
  }

  std::array<std::array<double, 5>, 5> jacobian(const std::array<double, 5>& x) const {
    const Vec2 p{x[0], x[1]};
    const double tau = x[2];
    const Vec2 c{x[3], x[4]};
    const Vec2 d = geom::rotated(spec.slider_axis, tau);
    const Vec2 dd = geom::perp(d);  // d(dir)/d(tau)
    const Vec2 pm = p + spec.rail_pin_offset * d;
    const Vec2 dpm_dtau = spec.rail_pin_offset * dd;

    std::array<std::array<double, 5>, 5> j{};

    // g1, g2: cross(d, Q - p)
    const Vec2 qe = guide_e(), qb = guide_b();
    j[0] = {d.y, -d.x, geom::cross(dd, qe - p), 0.0, 0.0};
    j[1] = {d.y, -d.x, geom::cross(dd, qb - p), 0.0, 0.0};

    // g3 = |T - C| - l2
    const double tc = std::max(geom::distance(crank_tip, c), 1e-12);
    const Vec2 u3 = (c - crank_tip) / tc;
    j[2] = {0.0, 0.0, 0.0, u3.x, u3.y};

    // g4 = |C - Pm| - l3
    const double cp = std::max(geom::distance(c, pm), 1e-12);
    const Vec2 u4 = (c - pm) / cp;
    j[3] = {-u4.x, -u4.y, -geom::dot(u4, dpm_dtau), u4.x, u4.y};

    // g5 = |T - Pm| - chord
    const double tp = std::max(geom::distance(crank_tip, pm), 1e-12);
    const Vec2 u5 = (pm - crank_tip) / tp;
    j[4] = {u5.x, u5.y, geom::dot(u5, dpm_dtau), 0.0, 0.0};

    return j;
  }
};

double max_abs(const std::array<double, 5>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::fabs(e));
  return m;
}

// Solves a 5x5 linear system in place (partial pivoting). Returns false when
// the matrix is numerically singular.
bool solve5(std::array<std::array<double, 5>, 5> a, std::array<double, 5> b,
            std::array<double, 5>& out) {
  constexpr int n = 5;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (std::fabs(a[pivot][col]) < 1e-14) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= a[r][k] * out[k];
    out[r] = s / a[r][r];
  }
  return true;
}

// 2-norm condition number estimate via cyclic Jacobi on J^T J.
double condition_number(const std::array<std::array<double, 5>, 5>& j) {
  constexpr int n = 5;
  std::array<std::array<double, 5>, 5> a{};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += j[k][r] * j[k][c];
      a[r][c] = s;
    }
  }
  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  double lo = a[0][0], hi = a[0][0];
  for (int k = 1; k < n; ++k) {
    lo = std::min(lo, a[k][k]);
    hi = std::max(hi, a[k][k]);
  }
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(hi / lo);
}

}  // namespace

SpSolver::SpSolver(const SpLinkageSpec& spec) : spec_(spec) { spec_.validate(); }

std::array<double, 5> SpSolver::rest_seed(double phi) const {
  const Vec2 a = spec_.slider_axis;
  const Vec2 n = geom::perp(a);
  const Vec2 tip =
      spec_.crank_pivot + spec_.drive_radius * Vec2{std::cos(phi), std::sin(phi)};

  // Closed-form construction on the zero-tilt manifold, upper slider branch.
  const double along = geom::dot(tip, a);
  const double off = geom::dot(tip, n);
  const double chord = spec_.effective_coupler_len();
  const double disc = chord * chord - off * off;
  if (disc < 0.0) {
    throw KinematicsError("assembly failure at phi=" + format_angle(phi) +
                          ": drive crank cannot reach the rail");
  }
  const double pin_coord = along + std::sqrt(disc);
  const Vec2 pm = pin_coord * a;
  const Vec2 p = pm - spec_.rail_pin_offset * a;

  const geom::CircleIntersections elbow =
      geom::try_circle_intersect(tip, spec_.link_l2_len, pm, spec_.link_l3_len);
  if (elbow.count == 0) {
    throw KinematicsError("assembly failure at phi=" + format_angle(phi) +
                          ": coupler links cannot close");
  }
  const Vec2 c = elbow.points[0];  // positive-cross elbow side, held thereafter
  return {p.x, p.y, 0.0, c.x, c.y};
}

SpConfig SpSolver::solve(double phi) {
  SpProblem prob{spec_, spec_.crank_pivot +
                            spec_.drive_radius * Vec2{std::cos(phi), std::sin(phi)}};

  std::array<double, 5> x = has_prev_ ? x_ : rest_seed(phi);
  std::array<double, 5> g = prob.residuals(x);
  double g_norm = max_abs(g);

  int iter = 0;
  while (g_norm >= kTolerance && iter < kMaxIterations) {
    const auto j = prob.jacobian(x);
    std::array<double, 5> neg_g{};
    for (int k = 0; k < 5; ++k) neg_g[k] = -g[k];
    std::array<double, 5> delta{};
    if (!solve5(j, neg_g, delta)) {
      throw KinematicsError("near-singular configuration at phi=" + format_angle(phi));
    }

    // Backtracking damping: accept the first step that reduces the residual.
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      std::array<double, 5> trial = x;
      for (int k = 0; k < 5; ++k) trial[k] += lambda * delta[k];
      const auto trial_g = prob.residuals(trial);
      const double trial_norm = max_abs(trial_g);
      if (trial_norm < g_norm) {
        x = trial;
        g = trial_g;
        g_norm = trial_norm;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++iter;
    if (!accepted) {
      throw KinematicsError("assembly failure at phi=" + format_angle(phi) +
                            ": closure iteration stalled");
    }
  }
  if (g_norm >= kTolerance) {
    throw KinematicsError("assembly failure at phi=" + format_angle(phi) +
                          ": no convergence in 200 iterations");
  }

  const double cond = condition_number(prob.jacobian(x));
  if (cond > kMaxCondition) {
    throw KinematicsError("near-singular configuration at phi=" + format_angle(phi));
  }

  x_ = x;
  has_prev_ = true;

  const Vec2 p{x[0], x[1]};
  const double tau = x[2];
  const Vec2 c{x[3], x[4]};
  const Vec2 d = geom::rotated(spec_.slider_axis, tau);

  SpConfig cfg;
  cfg.drive_angle = phi;
  cfg.rail_tilt = tau;
  cfg.residual = g_norm;
  cfg.iterations = iter;

  const Vec2 station_b_local = p + spec_.station_spacing_be * d;
  const Vec2 node_d_local =
      p + (spec_.station_spacing_be + spec_.station_spacing_bd) * d;
  cfg.slide_e = geom::dot(prob.guide_e() - p, d);
  cfg.slide_b = geom::dot(prob.guide_b() - station_b_local, d);

  cfg.crank_tip = geom::transform_point(spec_.base, prob.crank_tip);
  cfg.elbow = geom::transform_point(spec_.base, c);
  cfg.rail_pin = geom::transform_point(spec_.base, p + spec_.rail_pin_offset * d);
  cfg.station_e = geom::transform_point(spec_.base, p);
  cfg.station_b = geom::transform_point(spec_.base, station_b_local);
  cfg.node_d = geom::transform_point(spec_.base, node_d_local);
  return cfg;
}

SpConfig sp_fk(const SpLinkageSpec& spec, double phi) {
  SpSolver solver(spec);
  return solver.solve(phi);
}

// ---------------------------------------------------------------------------
// Double parallelogram
// ---------------------------------------------------------------------------

void DpmSpec::validate() const {
  const bool ok = loop1.long_side > 0.0 && loop1.short_side > 0.0 &&
                  loop2.long_side > 0.0 && loop2.short_side > 0.0;
  if (!ok) {
    throw KinematicsError("dpm spec: parallelogram sides must be positive");
  }
}

Pose2 dpm_fingertip(const DpmSpec& spec, double angle1, double angle2) {
  spec.validate();
  if (std::fabs(angle1) >= M_PI / 2.0 || std::fabs(angle2) >= M_PI / 2.0) {
    throw KinematicsError("parallelogram flip singularity");
  }
  // Each loop translates its coupler on a circle of radius long_side while the
  // coupler stays parallel to the base link; serial loops add translations and
  // transmit zero net rotation.
  const Vec2 local = spec.loop1.long_side * Vec2{std::cos(angle1), std::sin(angle1)} +
                     spec.loop2.long_side * Vec2{std::cos(angle2), std::sin(angle2)} +
                     spec.fingertip_offset;
  return geom::make_pose(geom::transform_point(spec.base, local), spec.base.orientation);
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

void Trace::append(TraceSample sample) {
  if (!samples.empty()) {
    const double prev = samples.back().drive;
    if (sample.drive == prev) {
      throw KinematicsError("trace drive inputs must be strictly monotonic");
    }
    if (samples.size() >= 2) {
      const double prev2 = samples[samples.size() - 2].drive;
      if ((sample.drive > prev) != (prev > prev2)) {
        throw KinematicsError("trace drive inputs must be strictly monotonic");
      }
    }
  }
  samples.push_back(std::move(sample));
}

Trace peaucellier_sweep(const PeaucellierSpec& spec, double alpha0, double alpha1,
                        std::size_t n, Branch branch) {
  if (n < 2 || alpha0 == alpha1) {
    throw KinematicsError("peaucellier_sweep: need n >= 2 distinct sweep angles");
  }
  Trace trace;
  const double step = (alpha1 - alpha0) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double alpha = alpha0 + step * static_cast<double>(i);
    const PeaucellierConfig cfg = peaucellier_fk(spec, alpha, branch);
    const InversorInvariant inv = inversor_invariant(cfg, spec);
    TraceSample s;
    s.drive = alpha;
    s.nodes = {{"A", spec.crank_pivot_a}, {"B", cfg.b},  {"C1", cfg.c1}, {"C2", cfg.c2},
               {"D", cfg.d},              {"E", spec.fixed_pivot_e}, {"F", cfg.f}};
    s.fingertip = geom::make_pose(cfg.d, 0.0);
    s.residual = inv.residual / spec.inversor_k2();
    trace.append(std::move(s));
  }
  return trace;
}

Trace sp_sweep(const SpLinkageSpec& spec, double phi0, double phi1, std::size_t n) {
  if (n < 2 || phi0 == phi1) {
    throw KinematicsError("sp_sweep: need n >= 2 distinct sweep angles");
  }
  Trace trace;
  SpSolver solver(spec);
  const double step = (phi1 - phi0) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = phi0 + step * static_cast<double>(i);
    const SpConfig cfg = solver.solve(phi);
    TraceSample s;
    s.drive = phi;
    s.nodes = {{"B", cfg.station_b},   {"D", cfg.node_d}, {"E", cfg.station_e},
               {"crank_tip", cfg.crank_tip}, {"elbow", cfg.elbow},
               {"rail_pin", cfg.rail_pin}};
    s.fingertip = geom::make_pose(cfg.node_d, spec.base.orientation + cfg.rail_tilt);
    s.residual = cfg.residual;
    trace.append(std::move(s));
  }
  return trace;
}

LineFit straightness(const Trace& trace, const std::string& node) {
  if (trace.size() < 10) {
    throw KinematicsError("straightness: trace needs at least 10 samples");
  }
  std::vector<Vec2> pts;
  pts.reserve(trace.size());
  for (const TraceSample& s : trace.samples) {
    const auto it = s.nodes.find(node);
    if (it == s.nodes.end()) {
      throw KinematicsError("unknown node: " + node);
    }
    pts.push_back(it->second);
  }
  return geom::fit_line(pts);
}

}  // namespace spd::linkage
