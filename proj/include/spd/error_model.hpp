#ifndef SPD_ERROR_MODEL_HPP
#define SPD_ERROR_MODEL_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "spd/rng.hpp"

namespace spd::error_model {

/// Deterministic error-model parameters. Lengths in mm, angles in radians.
struct ErrorParams {
  double link_len = 100.0;       // L, nominal link length
  double delta_len = 0.15;       // manufacturing error
  double clearance = 0.12;       // joint clearance
  double friction_mu = 0.21;     // friction coefficient (dimensionless)
  double noise_amp = 0.2;        // random-error amplitude, mm
  std::uint64_t seed = 0;

  void validate() const;
};

struct Distribution {
  double mean = 0.0;
  double std = 0.0;
};

/// Tolerance distributions for the three drawn parameters.
/// Defaults: delta_len (0.15, 0.03), clearance (0.12, 0.05), mu (0.21, 0.03).
struct ParamDistributions {
  Distribution delta_len{0.15, 0.03};
  Distribution clearance{0.12, 0.05};
  Distribution friction_mu{0.21, 0.03};

  void validate() const;  // throws "invalid distribution" on negative std
};

/// Per-theta decomposition of the vertical error. `total` is the fixed-order
/// sum geo + friction + clearance + random, bitwise reproducible.
struct ErrorBreakdown {
  double theta = 0.0;
  double geo = 0.0;
  double friction = 0.0;
  double clearance = 0.0;
  double random = 0.0;
  double total = 0.0;
};

/// Actual displacement along the stroke axis under a length error:
/// (L + dL) * (1 - cos theta). Throws "invalid geometry" when L + dL <= 0.
double x_real(double link_len, double delta_len, double theta);

/// Geometric error: 0.3 * sin(2 theta) + (dL / L) * ideal_y.
/// Throws "invalid geometry" when L <= 0.
double geo_error(double theta, double link_len, double delta_len, double ideal_y);

/// Friction error: 0.1 * theta (theta >= 0).
double friction_error(double theta);

/// Clearance error: 0.05 * clearance * theta^2 (clearance >= 0, theta >= 0).
double clearance_error(double clearance, double theta);

/// Random error: amp * z with z a standard-normal draw from the stream.
double random_error(rng::NormalStream& stream, double amp = 0.2);

/// Full per-theta breakdown. `ideal_y` is the ideal fingertip displacement at
/// the same theta, supplied by the caller (typically linkage FK output).
ErrorBreakdown total_y_error(const ErrorParams& params, double theta, double ideal_y,
                             rng::NormalStream& stream);

/// Deterministic part of the breakdown for explicit parameter values
/// (random term zero). Used by sensitivity and regime analysis.
double deterministic_total(double theta, double ideal_y, double link_len,
                           double delta_len, double clearance, double friction_mu);

struct ThetaStats {
  double theta = 0.0;
  double mean = 0.0;  // mean of total, mm
  double std = 0.0;   // sample std of total, mm
  double p95 = 0.0;   // 95th percentile of |total|, mm
};

/// Monte Carlo tolerance propagation over a theta grid. Draws
/// (delta_len, clearance, mu) per `dists` and the random term per the noise
/// amplitude, with per-sample counter-based streams: the output is bit
/// identical for a given seed regardless of `threads`.
std::vector<ThetaStats> monte_carlo(const ErrorParams& params,
                                    const ParamDistributions& dists,
                                    const std::vector<double>& thetas,
                                    const std::vector<double>& ideal_ys,
                                    std::size_t n_samples, std::uint64_t seed,
                                    unsigned threads = 1);

enum class SensParam { delta_len = 0, clearance = 1, friction_mu = 2 };

struct SensitivityResult {
  std::array<double, 3> abs_partials{};   // |d total / d p_i| at the means
  std::array<double, 3> coefficients{};   // normalized, sum to 1
  std::array<SensParam, 3> ranking{};     // descending by coefficient
};

/// Jacobian sensitivity ranking: S_i = |dT/dp_i| sigma_i / sum_j |dT/dp_j|
/// sigma_j with central finite differences (step = max(1e-6, 1e-4 sigma_i)).
/// Throws "insensitive point" when every weighted partial vanishes.
SensitivityResult sensitivity(const ErrorParams& params, const ParamDistributions& dists,
                              double theta, double ideal_y);

struct RegimeReport {
  double split_theta = 0.0;        // rad; regime boundary
  double slope_below = 0.0;        // mm/rad, least-squares
  double slope_above = 0.0;        // mm/rad
  double growth_ratio = 0.0;       // slope_above / slope_below
  double max_below = 0.0;          // max deterministic |total| below the split
  double max_below_3sigma = 0.0;   // max |total| + 3 sigma (delta method), below split
  double max_above = 0.0;
  double max_above_3sigma = 0.0;
};

/// Piecewise slope analysis of the deterministic |total|(theta) around the
/// 5-degree boundary. The grid must cover both sides of the split.
RegimeReport regime_analysis(const ErrorParams& params, const ParamDistributions& dists,
                             const std::vector<double>& thetas,
                             const std::vector<double>& ideal_ys);

/// Coulomb-friction hysteresis parameters: band width = mu * N * v / k_s.
struct HysteresisParams {
  double friction_mu = 0.21;
  double normal_force = 10.0;   // N
  double velocity = 0.2;        // m/s
  double spring_stiffness = 2.8;  // N/mm, fitted default

  void validate() const;  // throws "invalid stiffness" for k_s <= 0
};

double hysteresis_width(const HysteresisParams& h);

struct DecompositionInput {
  std::vector<double> thetas;  // uniform grid, >= 256 samples
  std::vector<double> geo;
  std::vector<double> friction;
  std::vector<double> clearance;
  std::vector<double> random;
  std::vector<double> clearance_samples;  // Monte Carlo clearance-error draws
  HysteresisParams hysteresis{};
};

struct DecompositionReport {
  double geo_dominant_freq = 0.0;  // cycles per radian, discrete-spectrum peak
  double geo_amplitude = 0.0;      // half peak-to-peak, mm
  double clearance_skewness = 0.0; // third standardized moment
  double friction_band = 0.0;      // mm, via hysteresis_width
  DecompositionInput traces;       // echoed component traces
};

/// Separates the error components of a sweep: spectral peak and amplitude of
/// the geo trace, skewness of the clearance draw distribution, and the
/// friction hysteresis band. Throws "resampling required" for non-uniform
/// grids.
DecompositionReport decompose(const DecompositionInput& input);

}  // namespace spd::error_model

#endif  // SPD_ERROR_MODEL_HPP
