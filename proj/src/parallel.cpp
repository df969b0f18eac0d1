#include "modalgauge/parallel.hpp"

#include <algorithm>

namespace modalgauge::parallel {

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

double tree(const double* v, std::size_t n) noexcept {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return tree(v, half) + tree(v + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) noexcept {
  return tree(values.data(), values.size());
}

std::vector<double> pairwise_sum(const std::vector<std::vector<double>>& parts) {
  if (parts.empty()) return {};
  const std::size_t dim = parts.front().size();
  std::vector<double> out(dim);
  std::vector<double> column(parts.size());
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t p = 0; p < parts.size(); ++p) column[p] = parts[p][j];
    out[j] = pairwise_sum(column);
  }
  return out;
}

}  // namespace modalgauge::parallel
