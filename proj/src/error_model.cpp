#include "spd/error_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "spd/errors.hpp"

namespace spd::error_model {

namespace {

constexpr double kRegimeSplit = 5.0 * M_PI / 180.0;  // 0.0872664625997...

// Stream tags within one theta grid point.
enum StreamTag : std::uint64_t {
  kTagDeltaLen = 0,
  kTagClearance = 1,
  kTagMu = 2,
  kTagNoise = 3,
};

std::uint64_t stream_id(std::size_t theta_index, StreamTag tag) {
  return static_cast<std::uint64_t>(theta_index) * 4ULL + tag;
}

}  // namespace

void ErrorParams::validate() const {
  if (!(link_len > 0.0) || clearance < 0.0 || friction_mu < 0.0 || noise_amp < 0.0) {
    throw KinematicsError("invalid geometry: error parameters out of range");
  }
}

void ParamDistributions::validate() const {
  if (delta_len.std < 0.0 || clearance.std < 0.0 || friction_mu.std < 0.0) {
    throw KinematicsError("invalid distribution: negative standard deviation");
  }
}

double x_real(double link_len, double delta_len, double theta) {
  const double effective = link_len + delta_len;
  if (!(effective > 0.0)) {
    throw KinematicsError("invalid geometry: nonpositive effective link length");
  }
  return effective * (1.0 - std::cos(theta));
}

double geo_error(double theta, double link_len, double delta_len, double ideal_y) {
  if (!(link_len > 0.0)) {
    throw KinematicsError("invalid geometry: nonpositive link length");
  }
  return 0.3 * std::sin(2.0 * theta) + (delta_len / link_len) * ideal_y;
}

double friction_error(double theta) {
  if (theta < 0.0) {
    throw KinematicsError("invalid geometry: negative joint angle");
  }
  return 0.1 * theta;
}

double clearance_error(double clearance, double theta) {
  if (clearance < 0.0 || theta < 0.0) {
    throw KinematicsError("invalid geometry: negative clearance or angle");
  }
  return 0.05 * clearance * theta * theta;
}

double random_error(rng::NormalStream& stream, double amp) {
  return amp * stream.next();
}

ErrorBreakdown total_y_error(const ErrorParams& params, double theta, double ideal_y,
                             rng::NormalStream& stream) {
  params.validate();
  ErrorBreakdown b;
  b.theta = theta;
  b.geo = geo_error(theta, params.link_len, params.delta_len, ideal_y);
  b.friction = friction_error(theta);
  b.clearance = clearance_error(params.clearance, theta);
  b.random = random_error(stream, params.noise_amp);
  // Fixed summation order keeps golden files bit-reproducible.
  b.total = ((b.geo + b.friction) + b.clearance) + b.random;
  return b;
}

double deterministic_total(double theta, double ideal_y, double link_len,
                           double delta_len, double clearance, double friction_mu) {
  (void)friction_mu;  // the friction term 0.1*theta carries no mu dependence
  const double geo = geo_error(theta, link_len, delta_len, ideal_y);
  const double friction = friction_error(theta);
  // Clearances are physical gaps; drawn or finite-difference values below
  // zero clamp to a closed joint.
  const double clr = clearance_error(std::max(0.0, clearance), theta);
  return (geo + friction) + clr;
}

std::vector<ThetaStats> monte_carlo(const ErrorParams& params,
                                    const ParamDistributions& dists,
                                    const std::vector<double>& thetas,
                                    const std::vector<double>& ideal_ys,
                                    std::size_t n_samples, std::uint64_t seed,
                                    unsigned threads) {
  params.validate();
  dists.validate();
  if (thetas.empty()) {
    throw KinematicsError("monte_carlo: empty theta grid");
  }
  if (thetas.size() != ideal_ys.size()) {
    throw KinematicsError("monte_carlo: theta and ideal_y grids must align");
  }
  if (n_samples < 100) {
    throw KinematicsError("monte_carlo: at least 100 samples required");
  }

  std::vector<ThetaStats> out(thetas.size());

  const auto eval_point = [&](std::size_t i) {
    const double theta = thetas[i];
    const double ideal_y = ideal_ys[i];
    // Welford accumulation: sequential in sample order, and exactly zero
    // variance when every draw collapses to the same total.
    double mean = 0.0, m2 = 0.0;
    std::vector<double> abs_totals(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
      const double dl = dists.delta_len.mean +
                        dists.delta_len.std *
                            rng::standard_normal(seed, stream_id(i, kTagDeltaLen), k);
      double c = dists.clearance.mean +
                 dists.clearance.std *
                     rng::standard_normal(seed, stream_id(i, kTagClearance), k);
      // mu is drawn to keep the stream layout stable, but the deterministic
      // terms carry no mu dependence.
      (void)(dists.friction_mu.mean +
             dists.friction_mu.std *
                 rng::standard_normal(seed, stream_id(i, kTagMu), k));
      if (c < 0.0) c = 0.0;  // clearances are physical gaps
      const double z = rng::standard_normal(seed, stream_id(i, kTagNoise), k);

      const double geo = geo_error(theta, params.link_len, dl, ideal_y);
      const double friction = friction_error(theta);
      const double clr = clearance_error(c, theta);
      const double random = params.noise_amp * z;
      const double total = ((geo + friction) + clr) + random;

      const double delta = total - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (total - mean);
      abs_totals[k] = std::fabs(total);
    }
    const double n = static_cast<double>(n_samples);
    const double var = std::max(0.0, m2 / (n - 1.0));
    // p95 as the ceil(0.95 n)-th order statistic of |total|.
    const std::size_t idx =
        static_cast<std::size_t>(std::ceil(0.95 * n)) - 1;
    std::nth_element(abs_totals.begin(),
                     abs_totals.begin() + static_cast<std::ptrdiff_t>(idx),
                     abs_totals.end());
    out[i] = ThetaStats{theta, mean, std::sqrt(var), abs_totals[idx]};
  };

  const unsigned worker_count =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(thetas.size())));
  if (worker_count == 1) {
    for (std::size_t i = 0; i < thetas.size(); ++i) eval_point(i);
  } else {
    // Grid points are independent and each is evaluated in sample order, so
    // the result does not depend on how they are distributed over workers.
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (unsigned w = 0; w < worker_count; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < thetas.size(); i += worker_count) eval_point(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

SensitivityResult sensitivity(const ErrorParams& params, const ParamDistributions& dists,
                              double theta, double ideal_y) {
  params.validate();
  dists.validate();

  const std::array<double, 3> means{dists.delta_len.mean, dists.clearance.mean,
                                    dists.friction_mu.mean};
  const std::array<double, 3> sigmas{dists.delta_len.std, dists.clearance.std,
                                     dists.friction_mu.std};

  const auto eval = [&](const std::array<double, 3>& p) {
    return deterministic_total(theta, ideal_y, params.link_len, p[0], p[1], p[2]);
  };

  SensitivityResult res;
  std::array<double, 3> weighted{};
  for (int i = 0; i < 3; ++i) {
    const double h = std::max(1e-6, 1e-4 * sigmas[static_cast<std::size_t>(i)]);
    std::array<double, 3> hi = means, lo = means;
    hi[static_cast<std::size_t>(i)] += h;
    lo[static_cast<std::size_t>(i)] -= h;
    res.abs_partials[static_cast<std::size_t>(i)] =
        std::fabs((eval(hi) - eval(lo)) / (2.0 * h));
    weighted[static_cast<std::size_t>(i)] =
        res.abs_partials[static_cast<std::size_t>(i)] * sigmas[static_cast<std::size_t>(i)];
  }

  const double denom = weighted[0] + weighted[1] + weighted[2];
  if (!(denom > 0.0)) {
    throw KinematicsError("insensitive point: all weighted partials vanish");
  }
  for (std::size_t i = 0; i < 3; ++i) res.coefficients[i] = weighted[i] / denom;

  res.ranking = {SensParam::delta_len, SensParam::clearance, SensParam::friction_mu};
  std::stable_sort(res.ranking.begin(), res.ranking.end(),
                   [&](SensParam a, SensParam b) {
                     return res.coefficients[static_cast<std::size_t>(a)] >
                            res.coefficients[static_cast<std::size_t>(b)];
                   });
  return res;
}

namespace {

double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

// Delta-method std of the deterministic total from the parameter tolerances.
double param_sigma(const ErrorParams& params, const ParamDistributions& dists,
                   double theta, double ideal_y) {
  const double d_dl = ideal_y / params.link_len;
  const double d_c = 0.05 * theta * theta;
  const double s1 = d_dl * dists.delta_len.std;
  const double s2 = d_c * dists.clearance.std;
  return std::sqrt(s1 * s1 + s2 * s2);
}

}  // namespace

RegimeReport regime_analysis(const ErrorParams& params, const ParamDistributions& dists,
                             const std::vector<double>& thetas,
                             const std::vector<double>& ideal_ys) {
  params.validate();
  dists.validate();
  if (thetas.size() != ideal_ys.size()) {
    throw KinematicsError("regime_analysis: theta and ideal_y grids must align");
  }

  std::vector<double> x_lo, y_lo, x_hi, y_hi;
  RegimeReport rep;
  rep.split_theta = kRegimeSplit;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double t = std::fabs(deterministic_total(thetas[i], ideal_ys[i],
                                                   params.link_len, params.delta_len,
                                                   params.clearance, params.friction_mu));
    const double sig = param_sigma(params, dists, thetas[i], ideal_ys[i]);
    if (thetas[i] < kRegimeSplit) {
      x_lo.push_back(thetas[i]);
      y_lo.push_back(t);
      rep.max_below = std::max(rep.max_below, t);
      rep.max_below_3sigma = std::max(rep.max_below_3sigma, t + 3.0 * sig);
    } else {
      x_hi.push_back(thetas[i]);
      y_hi.push_back(t);
      rep.max_above = std::max(rep.max_above, t);
      rep.max_above_3sigma = std::max(rep.max_above_3sigma, t + 3.0 * sig);
    }
  }
  if (x_lo.size() < 2 || x_hi.size() < 2) {
    throw KinematicsError("grid does not span regimes: need points on both sides of 5 deg");
  }
  rep.slope_below = least_squares_slope(x_lo, y_lo);
  rep.slope_above = least_squares_slope(x_hi, y_hi);
  rep.growth_ratio = rep.slope_above / rep.slope_below;
  return rep;
}

void HysteresisParams::validate() const {
  if (!(spring_stiffness > 0.0)) {
    throw KinematicsError("invalid stiffness: spring stiffness must be positive");
  }
  if (!(normal_force > 0.0) || velocity < 0.0 || friction_mu < 0.0) {
    throw KinematicsError("invalid geometry: hysteresis parameters out of range");
  }
}

double hysteresis_width(const HysteresisParams& h) {
  h.validate();
  return h.friction_mu * h.normal_force * h.velocity / h.spring_stiffness;
}

DecompositionReport decompose(const DecompositionInput& input) {
  const std::size_t n = input.thetas.size();
  if (n < 256) {
    throw KinematicsError("decompose: at least 256 grid samples required");
  }
  if (input.geo.size() != n) {
    throw KinematicsError("decompose: geo trace must align with the theta grid");
  }
  const double dt = input.thetas[1] - input.thetas[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (std::fabs((input.thetas[i] - input.thetas[i - 1]) - dt) > 1e-9) {
      throw KinematicsError("resampling required: theta grid is not uniform");
    }
  }

  DecompositionReport rep;
  rep.traces = input;
  rep.friction_band = hysteresis_width(input.hysteresis);

  // Discrete spectrum of the geo trace; DC excluded so trends cannot mask the
  // periodic component.
  double best_mag = -1.0;
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = 2.0 * M_PI * static_cast<double>(k) * static_cast<double>(j) /
                       static_cast<double>(n);
      re += input.geo[j] * std::cos(w);
      im -= input.geo[j] * std::sin(w);
    }
    const double mag = re * re + im * im;
    if (mag > best_mag) {
      best_mag = mag;
      best_k = k;
    }
  }
  rep.geo_dominant_freq =
      static_cast<double>(best_k) / (static_cast<double>(n) * dt);  // cycles per radian

  const auto [geo_min, geo_max] = std::minmax_element(input.geo.begin(), input.geo.end());
  rep.geo_amplitude = 0.5 * (*geo_max - *geo_min);

  // Third standardized moment of the clearance draws; a constant sample set
  // (zero spread) reports zero skew.
  const std::vector<double>& cs = input.clearance_samples;
  if (cs.size() >= 2) {
    const double m = std::accumulate(cs.begin(), cs.end(), 0.0) /
                     static_cast<double>(cs.size());
    double m2 = 0.0, m3 = 0.0;
    for (double v : cs) {
      const double d = v - m;
      m2 += d * d;
      m3 += d * d * d;
    }
    m2 /= static_cast<double>(cs.size());
    m3 /= static_cast<double>(cs.size());
    const double sd = std::sqrt(m2);
    rep.clearance_skewness = sd > 1e-15 ? m3 / (sd * sd * sd) : 0.0;
  }
  return rep;
}

}  // namespace spd::error_model
