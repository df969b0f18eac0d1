#include "modalgauge/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "modalgauge/errors.hpp"

namespace modalgauge {

std::string_view to_string(PValueMethod method) noexcept {
  return method == PValueMethod::exact_permutation ? "exact_permutation" : "t_approx";
}

std::vector<double> rank_with_ties(std::span<const double> values) {
  if (values.empty()) throw DataError("cannot rank an empty array");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) throw DataError("NaN at index " + std::to_string(i));
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 share ranks i+1..j
    const double avg = (double(i + 1) + double(j)) / 2.0;
    for (std::size_t q = i; q < j; ++q) ranks[order[q]] = avg;
    i = j;
  }
  return ranks;
}

double t_distribution_sf(double t, std::uint64_t df) {
  if (df == 0) throw ParameterError("t distribution needs df >= 1");
  if (std::isnan(t)) throw ParameterError("t statistic is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double v = double(df);
  // P(T > |t|) = I_{v/(v+t²)}(v/2, 1/2) / 2
  const double x = v / (v + t * t);
  const double tail = 0.5 * boost::math::ibeta(v / 2.0, 0.5, x);
  return t >= 0 ? tail : 1.0 - tail;
}

double t_distribution_quantile(double p, std::uint64_t df) {
  if (df == 0) throw ParameterError("t distribution needs df >= 1");
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("quantile probability must be in (0, 1)");
  return boost::math::quantile(boost::math::students_t_distribution<double>(double(df)), p);
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                           std::size_t exact_threshold) {
  if (x.size() != y.size()) {
    throw DataError("spearman: length mismatch " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  const std::size_t n = x.size();
  if (n < 3) throw DataError("spearman needs at least 3 pairs, got " + std::to_string(n));
  if (exact_threshold > 12) throw ParameterError("exact permutation threshold above 12 is not supported");

  // Doubled, centered ranks are integers: 2r − (n+1). Products and sums are
  // then exact, so permutation statistics compare without tolerance.
  auto centered = [n](std::span<const double> v) {
    const auto r = rank_with_ties(v);
    std::vector<std::int64_t> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = std::llround(2.0 * r[i]) - std::int64_t(n + 1);
    return c;
  };
  const auto cx = centered(x);
  const auto cy = centered(y);
  auto dot = [n](const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  const std::int64_t sxx = dot(cx, cx);
  const std::int64_t syy = dot(cy, cy);
  if (sxx == 0) throw DegenerateDataError("spearman: x is constant, rho undefined");
  if (syy == 0) throw DegenerateDataError("spearman: y is constant, rho undefined");
  const std::int64_t sxy = dot(cx, cy);

  CorrelationResult r;
  r.n = n;
  r.rho = std::clamp(double(sxy) / std::sqrt(double(sxx) * double(syy)), -1.0, 1.0);

  if (n <= exact_threshold) {
    const std::int64_t observed = sxy < 0 ? -sxy : sxy;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::uint64_t extreme = 0;
    std::uint64_t total = 0;
    do {
      std::int64_t s = 0;
      for (std::size_t i = 0; i < n; ++i) s += cx[i] * cy[perm[i]];
      if ((s < 0 ? -s : s) >= observed) ++extreme;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
    r.p_value = double(extreme) / double(total);
    r.method = PValueMethod::exact_permutation;
  } else {
    const double denom = 1.0 - r.rho * r.rho;
    if (denom <= 0.0) {
      r.p_value = 0.0;
    } else {
      const double t = r.rho * std::sqrt(double(n - 2) / denom);
      r.p_value = std::min(1.0, 2.0 * t_distribution_sf(std::abs(t), n - 2));
    }
    r.method = PValueMethod::t_approx;
  }
  return r;
}

RegressionFit ols_fit(std::span<const double> x, std::span<const double> y, double confidence_level) {
  if (x.size() != y.size()) throw DataError("ols_fit: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw DataError("ols_fit needs at least 3 points, got " + std::to_string(n));
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw ParameterError("confidence level must be in (0, 1)");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw DataError("ols_fit: non-finite value at index " + std::to_string(i));
    }
  }
  const double nd = double(n);
  const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - x_mean;
    const double dy = y[i] - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DegenerateDataError("ols_fit: x is constant");
  if (syy == 0.0) throw DegenerateResponseError("ols_fit: y is constant, R² undefined");

  RegressionFit fit;
  fit.n = n;
  fit.confidence_level = confidence_level;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
  }
  fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  fit.residual_variance = ss_res / double(n - 2);
  fit.slope_se = std::sqrt(fit.residual_variance / sxx);
  fit.intercept_se = std::sqrt(fit.residual_variance * (1.0 / nd + x_mean * x_mean / sxx));
  if (fit.slope_se == 0.0) {
    fit.slope_p_value = 0.0;
  } else {
    const double t = fit.slope / fit.slope_se;
    fit.slope_p_value = std::min(1.0, 2.0 * t_distribution_sf(std::abs(t), n - 2));
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.x_min = *lo;
  fit.x_max = *hi;
  fit.x_mean = x_mean;
  fit.x_sxx = sxx;
  return fit;
}

BandPrediction predict_with_band(const RegressionFit& fit, double x0) {
  BandPrediction p;
  p.y_hat = fit.intercept + fit.slope * x0;
  const double tcrit = t_distribution_quantile(0.5 + fit.confidence_level / 2.0, fit.n - 2);
  const double dx = x0 - fit.x_mean;
  const double se = std::sqrt(fit.residual_variance * (1.0 / double(fit.n) + dx * dx / fit.x_sxx));
  p.lower = p.y_hat - tcrit * se;
  p.upper = p.y_hat + tcrit * se;
  p.extrapolation = x0 < fit.x_min || x0 > fit.x_max;
  return p;
}

std::string fit_to_json(const RegressionFit& fit) {
  nlohmann::ordered_json j;
  j["measure_name"] = fit.measure_name;
  j["target"] = fit.target;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  j["slope_p_value"] = fit.slope_p_value;
  j["slope_se"] = fit.slope_se;
  j["intercept_se"] = fit.intercept_se;
  j["n"] = fit.n;
  j["confidence_level"] = fit.confidence_level;
  j["x_min"] = fit.x_min;
  j["x_max"] = fit.x_max;
  j["x_mean"] = fit.x_mean;
  j["x_sxx"] = fit.x_sxx;
  j["residual_variance"] = fit.residual_variance;
  return j.dump(2) + "\n";
}

RegressionFit fit_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("fit file is not valid JSON: ") + e.what());
  }
  auto get = [&](const char* key, auto& out) {
    if (!j.contains(key)) throw SchemaError(std::string("fit file missing field '") + key + "'");
    try {
      j.at(key).get_to(out);
    } catch (const nlohmann::json::exception&) {
      throw SchemaError(std::string("fit file field '") + key + "' has the wrong type");
    }
  };
  RegressionFit fit;
  get("measure_name", fit.measure_name);
  if (j.contains("target")) get("target", fit.target);
  get("slope", fit.slope);
  get("intercept", fit.intercept);
  get("r_squared", fit.r_squared);
  get("slope_p_value", fit.slope_p_value);
  get("slope_se", fit.slope_se);
  get("intercept_se", fit.intercept_se);
  get("n", fit.n);
  get("confidence_level", fit.confidence_level);
  get("x_min", fit.x_min);
  get("x_max", fit.x_max);
  get("x_mean", fit.x_mean);
  get("x_sxx", fit.x_sxx);
  get("residual_variance", fit.residual_variance);
  if (fit.n < 3) throw SchemaError("fit file: n must be >= 3");
  if (!(fit.x_sxx > 0.0)) throw SchemaError("fit file: x_sxx must be positive");
  return fit;
}

}  // namespace modalgauge
