#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "modalgauge/errors.hpp"
#include "modalgauge/stats.hpp"
#include "support/oracles.hpp"

using namespace modalgauge;

TEST(Ranks, KnownValues) {
  EXPECT_EQ(rank_with_ties(std::vector<double>{10, 20, 30}), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(rank_with_ties(std::vector<double>{5, 5, 7}), (std::vector<double>{1.5, 1.5, 3}));
  EXPECT_THROW(rank_with_ties(std::vector<double>{1, NAN}), DataError);
}

TEST(Ranks, MatchCountingOracleWithPlantedTies) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(5 + rng() % 60);
    for (auto& x : v) x = double(rng() % 12) * 0.5;  // many duplicates
    EXPECT_EQ(rank_with_ties(v), oracle::ranks(v));
  }
}

TEST(Spearman, PerfectMonotone) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> up = {2, 4, 6, 8, 10};
  const std::vector<double> down = {10, 8, 6, 4, 2};
  EXPECT_EQ(spearman(x, up).rho, 1.0);
  EXPECT_EQ(spearman(x, down).rho, -1.0);
}

TEST(Spearman, ExactPValueAtNineIsTwoOverNineFactorial) {
  std::vector<double> x, y;
  for (int i = 0; i < 9; ++i) {
    x.push_back(i);
    y.push_back(std::exp(0.3 * i));
  }
  const auto r = spearman(x, y);
  EXPECT_EQ(r.method, PValueMethod::exact_permutation);
  EXPECT_EQ(r.p_value, 2.0 / 362880.0);
  EXPECT_LT(r.p_value, 1e-3);
}

TEST(Spearman, ExactPValueMatchesEnumerationOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 4 + trial % 5;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = double(rng() % 100);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + double(rng() % 60);
    const auto r = spearman(x, y);
    EXPECT_NEAR(r.rho, double(oracle::pearson(oracle::ranks(x), oracle::ranks(y))), 1e-12);
    EXPECT_NEAR(r.p_value, double(oracle::exact_spearman_p(x, y)), 1e-12) << "n=" << n;
  }
}

TEST(Spearman, SymmetricAndMonotoneInvariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(15), y(15);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = x[i] + g(rng);
    }
    const auto a = spearman(x, y);
    const auto b = spearman(y, x);
    EXPECT_EQ(a.rho, b.rho);
    EXPECT_EQ(a.p_value, b.p_value);
    std::vector<double> ex(x.size()), cube(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      ex[i] = std::exp(x[i]);
      cube[i] = y[i] * y[i] * y[i];
    }
    EXPECT_NEAR(spearman(ex, cube).rho, a.rho, 1e-12);
    EXPECT_LE(std::fabs(a.rho), 1.0);
    EXPECT_GE(a.p_value, 0.0);
    EXPECT_LE(a.p_value, 1.0);
    EXPECT_EQ(a.method, PValueMethod::t_approx);
  }
}

TEST(Spearman, ExactAndApproximateAgreeInMagnitude) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 40; ++trial) {
    std::vector<double> x(9), y(9);
    for (std::size_t i = 0; i < 9; ++i) {
      x[i] = g(rng);
      y[i] = 0.5 * x[i] + g(rng);
    }
    const auto exact = spearman(x, y, 9);
    if (std::fabs(exact.rho) > 0.8 || std::fabs(exact.rho) < 0.2) continue;
    const auto approx = spearman(x, y, 0);
    EXPECT_LT(std::fabs(std::log10(exact.p_value) - std::log10(approx.p_value)), 1.0);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Spearman, DegenerateInputs) {
  EXPECT_THROW(spearman(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 2, 3, 4}),
               DegenerateDataError);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DataError);
  EXPECT_THROW(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), DataError);
}

TEST(StudentT, ClosedForms) {
  for (std::uint64_t df : {1u, 2u, 7u, 50u}) EXPECT_DOUBLE_EQ(t_distribution_sf(0.0, df), 0.5);
  EXPECT_NEAR(t_distribution_sf(1.0, 1), 0.25, 1e-15);
  EXPECT_NEAR(t_distribution_sf(2.3646, 7), 0.025, 1e-5);
  EXPECT_THROW(t_distribution_sf(1.0, 0), ParameterError);
}

TEST(StudentT, MatchesHighPrecisionQuadrature) {
  // 50-digit quadrature of the density.
  struct Ref {
    double t;
    std::uint64_t df;
    double sf;
  };
  const Ref refs[] = {
      {-1.2, 1, 0.7788579383763044777428917},   {0.5, 1, 0.3524163823495667258245989},
      {1, 1, 0.25},                             {2.3646, 1, 0.1273540057875153640605072},
      {3.5, 1, 0.08858553278290474887587605},   {6, 1, 0.05256845671125342995077817},
      {-1.2, 7, 0.8654140315863967771961302},   {0.5, 7, 0.3162035678446421081739937},
      {1, 7, 0.1753083314101037632848452},      {2.3646, 7, 0.02500089184368217609994025},
      {3.5, 7, 0.004996520440942773631429789},  {6, 7, 0.000271129171001405053875033},
      {-1.2, 30, 0.8802348245551688023960763},  {0.5, 30, 0.3103615024425636429802001},
      {1, 30, 0.162654307713014945616887},      {2.3646, 30, 0.01235832034345730808227919},
      {3.5, 30, 0.0007384037188221265315961955}, {6, 30, 0.000000697138438360237135096476},
      {-1.2, 100, 0.8835127163908791574493897}, {0.5, 100, 0.3090867829154432859923726},
      {1, 100, 0.1598620778920616802001647},    {2.3646, 100, 0.009990237348845681713985974},
      {3.5, 100, 0.0003482138586781344599299737}, {6, 100, 1.58624575140142828978509e-8},
  };
  for (const auto& r : refs) {
    EXPECT_NEAR(t_distribution_sf(r.t, r.df), r.sf, 1e-10) << "t=" << r.t << " df=" << r.df;
  }
}

TEST(StudentT, QuantileInvertsSurvival) {
  for (std::uint64_t df : {1u, 7u, 30u}) {
    for (double p : {0.6, 0.9, 0.98, 0.999}) {
      const double q = t_distribution_quantile(p, df);
      EXPECT_NEAR(t_distribution_sf(q, df), 1.0 - p, 1e-12);
    }
  }
}

TEST(Ols, ExactLine) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {3, 5, 7, 9, 11};
  const auto f = ols_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  const auto b = predict_with_band(f, 2.5);
  EXPECT_NEAR(b.y_hat, 6.0, 1e-12);
  EXPECT_NEAR(b.upper - b.lower, 0.0, 1e-12);
}

TEST(Ols, DegenerateInputs) {
  EXPECT_THROW(ols_fit(std::vector<double>{1, 2, 3}, std::vector<double>{4, 4, 4}), DegenerateResponseError);
  EXPECT_THROW(ols_fit(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), DegenerateDataError);
  EXPECT_THROW(ols_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DataError);
}

TEST(Ols, PlantedParametersRecovered) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::uniform_real_distribution<double> u(0.1, 0.8);
  int within = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(9), y(9);
    for (std::size_t i = 0; i < 9; ++i) {
      x[i] = u(rng);
      y[i] = 1.4 * x[i] + 0.1 + noise(rng);
    }
    const auto f = ols_fit(x, y);
    if (std::fabs(f.slope - 1.4) <= 0.1 && std::fabs(f.intercept - 0.1) <= 0.1) ++within;
  }
  EXPECT_GE(within, 190);
}

TEST(Ols, SlopeSignFollowsCovarianceAndAffineEquivariance) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> x(12), y(12), ax(12);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < 12; ++i) {
      x[i] = g(rng);
      y[i] = (trial % 2 ? -0.7 : 0.7) * x[i] + g(rng);
      mx += x[i] / 12;
      my += y[i] / 12;
    }
    double cov = 0;
    for (std::size_t i = 0; i < 12; ++i) cov += (x[i] - mx) * (y[i] - my);
    const auto f = ols_fit(x, y);
    EXPECT_EQ(f.slope > 0, cov > 0);
    EXPECT_GE(f.r_squared, 0.0);
    EXPECT_LE(f.r_squared, 1.0);
    const double a = 3.5, b = -2.0;
    for (std::size_t i = 0; i < 12; ++i) ax[i] = a * x[i] + b;
    const auto g2 = ols_fit(ax, y);
    EXPECT_NEAR(g2.slope, f.slope / a, 1e-9);
    EXPECT_NEAR(g2.r_squared, f.r_squared, 1e-9);
    EXPECT_NEAR(g2.slope_p_value, f.slope_p_value, 1e-9);
  }
}

TEST(Ols, BandGeometry) {
  const std::vector<double> x = {0.1, 0.25, 0.3, 0.42, 0.5, 0.61, 0.7};
  const std::vector<double> y = {0.0, 0.2, 0.2, 0.41, 0.5, 0.65, 0.8};
  const auto f = ols_fit(x, y);
  const auto at_mean = predict_with_band(f, f.x_mean);
  for (double x0 : {0.1, 0.3, 0.45, 0.6, 0.7}) {
    const auto b = predict_with_band(f, x0);
    EXPECT_GE(b.upper - b.lower, at_mean.upper - at_mean.lower - 1e-15);
    EXPECT_LE(b.lower, b.y_hat);
    EXPECT_GE(b.upper, b.y_hat);
    EXPECT_FALSE(b.extrapolation);
  }
  EXPECT_TRUE(predict_with_band(f, 0.95).extrapolation);
  EXPECT_TRUE(predict_with_band(f, 0.0).extrapolation);
}

TEST(Ols, BandMatchesTextbookFormula) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  const std::vector<double> y = {1.1, 1.9, 3.2, 3.8, 5.3, 5.9};
  const auto f = ols_fit(x, y, 0.96);
  // Residual variance and the t quantile computed independently.
  const double n = 6, xm = 3.5, sxx = 17.5;
  double sxy = 0, ym = 0;
  for (double v : y) ym += v / n;
  for (std::size_t i = 0; i < 6; ++i) sxy += (x[i] - xm) * (y[i] - ym);
  const double slope = sxy / sxx, icpt = ym - slope * xm;
  double rss = 0;
  for (std::size_t i = 0; i < 6; ++i) rss += std::pow(y[i] - icpt - slope * x[i], 2);
  const double s2 = rss / (n - 2);
  const double tq = 2.998527873206612;  // t_{0.98, 4}
  const double x0 = 5.0;
  const double half = tq * std::sqrt(s2 * (1 / n + (x0 - xm) * (x0 - xm) / sxx));
  const auto b = predict_with_band(f, x0);
  EXPECT_NEAR(b.upper - b.y_hat, half, 1e-9);
  EXPECT_NEAR(f.slope_se, std::sqrt(s2 / sxx), 1e-12);
}

TEST(Ols, JsonRoundTrip) {
  const std::vector<double> x = {0.1, 0.25, 0.3, 0.42, 0.5};
  const std::vector<double> y = {0.0, 0.2, 0.25, 0.41, 0.5};
  auto f = ols_fit(x, y);
  f.measure_name = "iimm";
  f.target = "gain_over_zse";
  const auto back = fit_from_json(fit_to_json(f));
  EXPECT_EQ(back.slope, f.slope);
  EXPECT_EQ(back.intercept, f.intercept);
  EXPECT_EQ(back.residual_variance, f.residual_variance);
  EXPECT_EQ(back.measure_name, "iimm");
  EXPECT_EQ(fit_to_json(back), fit_to_json(f));
  EXPECT_THROW(fit_from_json("{\"slope\": 1}"), SchemaError);
}
