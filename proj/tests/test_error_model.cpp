#include <doctest.h>

#include <cmath>
#include <random>

#include "spd/error_model.hpp"
#include "spd/errors.hpp"
#include "spd/rng.hpp"

using namespace spd;
namespace em = spd::error_model;

namespace {

// Independent direct transcription of the displacement / error formulas,
// kept deliberately separate from the library implementation path.
double oracle_x_real(double L, double dL, double th) { return (L + dL) * (1.0 - std::cos(th)); }
double oracle_geo(double th, double L, double dL, double y) {
  return 0.3 * std::sin(2.0 * th) + ((L + dL) - L) / L * y;
}
double oracle_friction(double th) { return 0.1 * th; }
double oracle_clearance(double c, double th) { return 0.05 * c * th * th; }

// tan-form displacement of the default inversor cell along its output line,
// measured from the reference crank angle (k^2/(2r) = 58.125 mm).
double tan_ideal_y(double alpha_ref, double theta) {
  const double half = 58.125;
  return half * (std::tan((alpha_ref + theta) / 2.0) - std::tan(alpha_ref / 2.0));
}

}  // namespace

TEST_CASE("per-component error formulas") {
  SUBCASE("x_real") {
    CHECK(em::x_real(100.0, 0.15, 0.0) == 0.0);
    CHECK(em::x_real(100.0, 0.15, M_PI / 3.0) == doctest::Approx(50.075).epsilon(1e-9));
    CHECK_THROWS_WITH_AS(em::x_real(100.0, -100.0, 1.0),
                         doctest::Contains("invalid geometry"), KinematicsError);
  }
  SUBCASE("geo_error") {
    CHECK(em::geo_error(0.0, 100.0, 0.0, 123.0) == 0.0);
    CHECK(em::geo_error(M_PI / 4.0, 100.0, 0.15, 10.0) ==
          doctest::Approx(0.315).epsilon(1e-12));
    CHECK(std::fabs(em::geo_error(M_PI / 2.0, 100.0, 0.0, 0.0)) < 1e-15);
    CHECK_THROWS_AS(em::geo_error(0.1, 0.0, 0.0, 0.0), KinematicsError);
  }
  SUBCASE("friction_error") {
    CHECK(em::friction_error(0.0) == 0.0);
    CHECK(em::friction_error(0.5) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(em::friction_error(0.17453) == doctest::Approx(0.017453).epsilon(1e-12));
    CHECK_THROWS_AS(em::friction_error(-0.1), KinematicsError);
  }
  SUBCASE("clearance_error") {
    CHECK(em::clearance_error(0.12, 0.0) == 0.0);
    CHECK(em::clearance_error(0.12, 1.0) == doctest::Approx(0.006).epsilon(1e-15));
    CHECK(em::clearance_error(0.0, 2.0) == 0.0);
    CHECK_THROWS_AS(em::clearance_error(-0.1, 1.0), KinematicsError);
  }
  SUBCASE("clearance error is a pure quadratic in theta") {
    const double c = 0.31;
    const double k1 = em::clearance_error(c, 0.2) / (0.2 * 0.2);
    for (double th : {0.05, 0.4, 0.9, 1.7}) {
      CHECK(em::clearance_error(c, th) / (th * th) == doctest::Approx(k1).epsilon(1e-12));
    }
  }
}

TEST_CASE("deterministic formulas match the direct-evaluation oracle") {
  std::mt19937_64 gen(777);
  std::uniform_real_distribution<double> th(0.0, M_PI / 2.0);
  std::uniform_real_distribution<double> len(10.0, 500.0);
  std::uniform_real_distribution<double> dl(-0.5, 0.5);
  std::uniform_real_distribution<double> cl(0.0, 1.0);
  std::uniform_real_distribution<double> iy(-50.0, 50.0);

  for (int i = 0; i < 10000; ++i) {
    const double theta = th(gen), L = len(gen), dL = dl(gen), c = cl(gen), y = iy(gen);
    CHECK(std::fabs(em::x_real(L, dL, theta) - oracle_x_real(L, dL, theta)) < 1e-12);
    CHECK(std::fabs(em::geo_error(theta, L, dL, y) - oracle_geo(theta, L, dL, y)) < 1e-12);
    CHECK(std::fabs(em::friction_error(theta) - oracle_friction(theta)) < 1e-12);
    CHECK(std::fabs(em::clearance_error(c, theta) - oracle_clearance(c, theta)) < 1e-12);
  }
}

TEST_CASE("random_error statistics and determinism") {
  rng::NormalStream a{9, 0, 0};
  rng::NormalStream b{9, 0, 0};
  CHECK(em::random_error(a) == em::random_error(b));

  const std::size_t n = 200000;
  rng::NormalStream s{4242, 1, 0};
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = em::random_error(s);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt(sum_sq / static_cast<double>(n) - mean * mean);
  CHECK(std::fabs(mean) < 4.0 * 0.2 / std::sqrt(static_cast<double>(n)));
  CHECK(sd > 0.197);
  CHECK(sd < 0.203);
}

TEST_CASE("total_y_error breakdown") {
  em::ErrorParams params;  // defaults: L=100, dL=0.15, c=0.12, noise 0.2

  SUBCASE("all terms vanish at the origin") {
    em::ErrorParams p = params;
    p.delta_len = 0.0;
    p.noise_amp = 0.0;
    rng::NormalStream s{0, 0, 0};
    const auto b = em::total_y_error(p, 0.0, 0.0, s);
    CHECK(b.total == 0.0);
  }
  SUBCASE("10-degree example with the noise disabled") {
    em::ErrorParams p = params;
    p.noise_amp = 0.0;
    rng::NormalStream s{0, 0, 0};
    const double theta = 0.17453;
    const auto b = em::total_y_error(p, theta, 2.5, s);
    CHECK(b.friction == doctest::Approx(0.017453).epsilon(1e-12));
    CHECK(b.clearance == doctest::Approx(0.05 * 0.12 * theta * theta).epsilon(1e-12));
    CHECK(b.random == 0.0);
    CHECK(b.total == doctest::Approx(b.geo + 0.017453 + 0.00018276).epsilon(1e-6));
  }
  SUBCASE("total is the fixed-order sum, bitwise") {
    rng::NormalStream s{11, 3, 0};
    const auto b = em::total_y_error(params, 0.3, 7.0, s);
    CHECK(b.total == ((b.geo + b.friction) + b.clearance) + b.random);
  }
  SUBCASE("deterministic totals are nondecreasing on [0, pi/4] for dL*y >= 0") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> dl(0.0, 0.5);
    std::uniform_real_distribution<double> iy(0.0, 50.0);
    std::uniform_real_distribution<double> cl(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
      const double dL = dl(gen), y = iy(gen), c = cl(gen);
      double prev = -1.0;
      for (int i = 0; i <= 40; ++i) {
        const double th = M_PI / 4.0 * i / 40.0;
        const double t = std::fabs(em::deterministic_total(th, y, 100.0, dL, c, 0.21));
        CHECK(t >= prev - 1e-12);
        prev = t;
      }
    }
  }
}

TEST_CASE("monte carlo propagation") {
  em::ErrorParams params;
  const std::vector<double> thetas{0.0, 0.05, 0.1, 0.15, 0.2};
  std::vector<double> ideal_ys;
  for (double th : thetas) ideal_ys.push_back(tan_ideal_y(2.1, th));

  SUBCASE("degenerate distributions collapse to the deterministic value") {
    em::ErrorParams p = params;
    p.noise_amp = 0.0;
    em::ParamDistributions d;
    d.delta_len.std = 0.0;
    d.clearance.std = 0.0;
    d.friction_mu.std = 0.0;
    const auto stats = em::monte_carlo(p, d, thetas, ideal_ys, 200, 5);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      const double det = em::deterministic_total(thetas[i], ideal_ys[i], p.link_len,
                                                 d.delta_len.mean, d.clearance.mean,
                                                 d.friction_mu.mean);
      CHECK(stats[i].std == 0.0);
      CHECK(stats[i].mean == doctest::Approx(det).epsilon(1e-12));
    }
  }
  SUBCASE("only the random term survives at theta = 0") {
    em::ParamDistributions d;
    const std::vector<double> zero{0.0};
    const std::vector<double> zero_y{0.0};
    const auto stats = em::monte_carlo(params, d, zero, zero_y, 100000, 99);
    CHECK(std::fabs(stats[0].mean) < 4.0 * 0.2 / std::sqrt(1e5));
    CHECK(stats[0].std == doctest::Approx(0.2).epsilon(0.02));
  }
  SUBCASE("bit-identical across thread counts") {
    em::ParamDistributions d;
    const auto s1 = em::monte_carlo(params, d, thetas, ideal_ys, 2000, 31, 1);
    const auto s4 = em::monte_carlo(params, d, thetas, ideal_ys, 2000, 31, 4);
    REQUIRE(s1.size() == s4.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
      CHECK(s1[i].mean == s4[i].mean);
      CHECK(s1[i].std == s4[i].std);
      CHECK(s1[i].p95 == s4[i].p95);
    }
  }
  SUBCASE("per-point streams do not depend on the rest of the grid") {
    em::ParamDistributions d;
    const std::vector<double> grid_a{0.05, 0.1};
    const std::vector<double> grid_b{0.05, 0.15};
    const std::vector<double> ys_a{1.0, 2.0};
    const std::vector<double> ys_b{1.0, 3.0};
    const auto sa = em::monte_carlo(params, d, grid_a, ys_a, 500, 77);
    const auto sb = em::monte_carlo(params, d, grid_b, ys_b, 500, 77);
    // The shared first grid point sees identical draws in both runs.
    CHECK(sa[0].mean == sb[0].mean);
    CHECK(sa[0].std == sb[0].std);
    CHECK(sa[0].p95 == sb[0].p95);
    CHECK(sa[1].mean != sb[1].mean);
  }
  SUBCASE("input validation") {
    em::ParamDistributions d;
    d.clearance.std = -1.0;
    CHECK_THROWS_WITH_AS(em::monte_carlo(params, d, thetas, ideal_ys, 1000, 0),
                         doctest::Contains("invalid distribution"), KinematicsError);
    em::ParamDistributions ok;
    CHECK_THROWS_AS(em::monte_carlo(params, ok, thetas, ideal_ys, 50, 0),
                    KinematicsError);
    CHECK_THROWS_AS(em::monte_carlo(params, ok, {}, {}, 1000, 0), KinematicsError);
  }
}

TEST_CASE("sensitivity ranking") {
  em::ErrorParams params;
  em::ParamDistributions dists;

  SUBCASE("theta = 0 is an insensitive point") {
    CHECK_THROWS_WITH_AS(em::sensitivity(params, dists, 0.0, 0.0),
                         doctest::Contains("insensitive point"), KinematicsError);
  }
  SUBCASE("single active parameter takes the whole weight") {
    em::ParamDistributions d = dists;
    d.clearance.std = 0.0;
    d.friction_mu.std = 0.0;
    const auto res = em::sensitivity(params, d, 0.5, 10.0);
    CHECK(res.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.ranking[0] == em::SensParam::delta_len);
  }
  SUBCASE("default ordering is delta_len > clearance > mu") {
    const double theta = 0.17453;
    const auto res = em::sensitivity(params, dists, theta, tan_ideal_y(2.1, theta));
    CHECK(res.ranking[0] == em::SensParam::delta_len);
    CHECK(res.ranking[1] == em::SensParam::clearance);
    CHECK(res.ranking[2] == em::SensParam::friction_mu);
    CHECK(res.coefficients[0] > res.coefficients[1]);
    CHECK(res.coefficients[1] > res.coefficients[2]);
    CHECK(res.coefficients[0] + res.coefficients[1] + res.coefficients[2] ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("coefficients are invariant under uniform sigma rescaling") {
    const double theta = 0.3;
    const double y = tan_ideal_y(2.1, theta);
    const auto base = em::sensitivity(params, dists, theta, y);
    em::ParamDistributions scaled = dists;
    scaled.delta_len.std *= 3.7;
    scaled.clearance.std *= 3.7;
    scaled.friction_mu.std *= 3.7;
    const auto res = em::sensitivity(params, scaled, theta, y);
    for (int i = 0; i < 3; ++i) {
      CHECK(res.coefficients[static_cast<std::size_t>(i)] ==
            doctest::Approx(base.coefficients[static_cast<std::size_t>(i)])
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("regime analysis") {
  em::ErrorParams params;
  em::ParamDistributions dists;

  std::vector<double> thetas;
  for (int i = 0; i <= 100; ++i) thetas.push_back(0.2094 * i / 100.0);

  SUBCASE("purely linear model has ratio near one") {
    em::ErrorParams p = params;
    p.delta_len = 0.0;
    p.clearance = 0.0;
    std::vector<double> ys(thetas.size(), 0.0);
    const auto rep = em::regime_analysis(p, dists, thetas, ys);
    CHECK(rep.growth_ratio == doctest::Approx(1.0).epsilon(0.1));
  }
  SUBCASE("defaults show a faster growth past five degrees") {
    std::vector<double> ys;
    for (double th : thetas) ys.push_back(tan_ideal_y(2.1, th));
    const auto rep = em::regime_analysis(params, dists, thetas, ys);
    CHECK(rep.slope_above > rep.slope_below);
    CHECK(rep.growth_ratio > 1.0);
    CHECK(rep.max_below_3sigma >= rep.max_below);
  }
  SUBCASE("grid must span both regimes") {
    const std::vector<double> low{0.0, 0.01, 0.02, 0.03};
    const std::vector<double> ys(low.size(), 0.0);
    CHECK_THROWS_WITH_AS(em::regime_analysis(params, dists, low, ys),
                         doctest::Contains("grid does not span regimes"),
                         KinematicsError);
  }
}

TEST_CASE("hysteresis width") {
  em::HysteresisParams h;  // defaults 0.21, 10 N, 0.2 m/s, 2.8 N/mm
  CHECK(std::fabs(em::hysteresis_width(h) - 0.15) < 1e-12);

  h.velocity = 0.0;
  CHECK(em::hysteresis_width(h) == 0.0);

  h = em::HysteresisParams{};
  h.friction_mu = 0.0;
  CHECK(em::hysteresis_width(h) == 0.0);

  h = em::HysteresisParams{};
  h.spring_stiffness = 0.0;
  CHECK_THROWS_WITH_AS(em::hysteresis_width(h), doctest::Contains("invalid stiffness"),
                       KinematicsError);
}

TEST_CASE("decomposition") {
  SUBCASE("pure doubled-angle trace: peak at 1/pi cycles per radian") {
    em::DecompositionInput in;
    const std::size_t n = 512;
    for (std::size_t i = 0; i < n; ++i) {
      const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
      in.thetas.push_back(th);
      in.geo.push_back(0.3 * std::sin(2.0 * th));
    }
    const auto rep = em::decompose(in);
    CHECK(rep.geo_dominant_freq == doctest::Approx(1.0 / M_PI).epsilon(1e-12));
    CHECK(rep.geo_amplitude == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(rep.friction_band == doctest::Approx(0.15).epsilon(1e-12));
  }
  SUBCASE("constant clearance samples report zero skew") {
    em::DecompositionInput in;
    const std::size_t n = 256;
    for (std::size_t i = 0; i < n; ++i) {
      const double th = M_PI * static_cast<double>(i) / static_cast<double>(n);
      in.thetas.push_back(th);
      in.geo.push_back(std::sin(2.0 * th));
    }
    in.clearance_samples.assign(1000, 0.004);
    CHECK(em::decompose(in).clearance_skewness == 0.0);
  }
  SUBCASE("non-uniform grids are rejected") {
    em::DecompositionInput in;
    for (std::size_t i = 0; i < 300; ++i) {
      const double th = static_cast<double>(i) * 0.01;
      in.thetas.push_back(i > 150 ? th + 0.004 : th);
      in.geo.push_back(0.0);
    }
    CHECK_THROWS_WITH_AS(em::decompose(in), doctest::Contains("resampling required"),
                         KinematicsError);
  }
  SUBCASE("grids below 256 samples are rejected") {
    em::DecompositionInput in;
    for (std::size_t i = 0; i < 100; ++i) {
      in.thetas.push_back(static_cast<double>(i) * 0.01);
      in.geo.push_back(0.0);
    }
    CHECK_THROWS_AS(em::decompose(in), KinematicsError);
  }
}
