#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modalgauge {

enum class PValueMethod { exact_permutation, t_approx };

std::string_view to_string(PValueMethod method) noexcept;

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
  PValueMethod method = PValueMethod::t_approx;
};

/// 1-based average ranks; ties share the mean of the ranks they span.
std::vector<double> rank_with_ties(std::span<const double> values);

/// Upper tail P(T > t) of Student's t with `df` degrees of freedom, via the
/// regularized incomplete beta function.
double t_distribution_sf(double t, std::uint64_t df);

/// Value q with P(T <= q) = p.
double t_distribution_quantile(double p, std::uint64_t df);

/// Spearman's rho with a two-sided p-value. For n <= exact_threshold every
/// permutation of one rank vector is enumerated (n <= 12 supported);
/// above it the Student-t approximation with n−2 df is used.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           std::size_t exact_threshold = 9);

struct RegressionFit {
  std::string measure_name;
  std::string target;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_p_value = 1.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  std::size_t n = 0;
  double confidence_level = 0.96;
  double x_min = 0.0;
  double x_max = 0.0;
  // Sufficient statistics for the mean-response band.
  double x_mean = 0.0;
  double x_sxx = 0.0;
  double residual_variance = 0.0;
};

/// Closed-form simple least squares with t-based inference (n−2 df).
RegressionFit ols_fit(std::span<const double> x, std::span<const double> y,
                      double confidence_level = 0.96);

struct BandPrediction {
  double y_hat = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool extrapolation = false;
};

/// Point prediction with the confidence band of the mean response at
/// fit.confidence_level; flags x0 outside the training range.
BandPrediction predict_with_band(const RegressionFit& fit, double x0);

std::string fit_to_json(const RegressionFit& fit);
RegressionFit fit_from_json(std::string_view text);

}  // namespace modalgauge
