#include "modalgauge/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "modalgauge/errors.hpp"
#include "modalgauge/parallel.hpp"
#include "modalgauge/random.hpp"

namespace modalgauge {

namespace {

constexpr double kDegenerate = 1e-12;

// Four fixed accumulators; the association is fixed so results are
// reproducible, but the loop pipelines far better than a single chain.
template <typename A, typename B>
double dot(std::span<const A> a, std::span<const B> b) noexcept {
  const std::size_t n = a.size();
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += double(a[j]) * double(b[j]);
    s1 += double(a[j + 1]) * double(b[j + 1]);
    s2 += double(a[j + 2]) * double(b[j + 2]);
    s3 += double(a[j + 3]) * double(b[j + 3]);
  }
  for (; j < n; ++j) s0 += double(a[j]) * double(b[j]);
  return (s0 + s1) + (s2 + s3);
}

template <typename A, typename B>
double squared_distance(std::span<const A> a, std::span<const B> b) noexcept {
  const std::size_t n = a.size();
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const double d0 = double(a[j]) - double(b[j]);
    const double d1 = double(a[j + 1]) - double(b[j + 1]);
    const double d2 = double(a[j + 2]) - double(b[j + 2]);
    const double d3 = double(a[j + 3]) - double(b[j + 3]);
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; j < n; ++j) {
    const double d = double(a[j]) - double(b[j]);
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

double norm_sq(std::span<const double> v) noexcept { return dot(v, v); }

std::vector<double> column_sum(const EmbeddingMatrix& m, unsigned threads) {
  std::vector<std::vector<double>> parts(parallel::block_count(m.rows()));
  parallel::for_blocks(m.rows(), threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    std::vector<double> acc(m.dim(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = m.row(i);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += row[j];
    }
    parts[b] = std::move(acc);
  });
  return parallel::pairwise_sum(parts);
}

double sum_of_squared_norms(const EmbeddingMatrix& m, unsigned threads) {
  return parallel::block_sum(m.rows(), threads, [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += dot(m.row(i), m.row(i));
    return s;
  });
}

std::vector<double> mean_of(const std::vector<double>& sum, std::size_t count) {
  std::vector<double> out(sum.size());
  for (std::size_t j = 0; j < sum.size(); ++j) out[j] = sum[j] / double(count);
  return out;
}

double mean_pairwise_similarity(const EmbeddingMatrix& m, unsigned threads, const char* what) {
  const std::size_t n = m.rows();
  if (n < 2) {
    throw InsufficientDataError(std::string(what) + " needs at least 2 rows, got " +
                                std::to_string(n));
  }
  const auto s = column_sum(m, threads);
  const double total = norm_sq(s) - sum_of_squared_norms(m, threads);
  return total / (double(n) * double(n - 1));
}

// Σ over points of the distance to a centroid (or its square).
double sum_distance_to(const EmbeddingMatrix& m, std::span<const double> c, bool squared,
                       unsigned threads) {
  return parallel::block_sum(m.rows(), threads, [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double d2 = squared_distance(m.row(i), c);
      s += squared ? d2 : std::sqrt(d2);
    }
    return s;
  });
}

double silhouette_value(double a, double b) noexcept {
  const double denom = std::max(a, b);
  if (denom <= kDegenerate) return 0.0;
  return (b - a) / denom;
}

// Rows of `m` at `idx` copied into a contiguous buffer.
std::vector<float> gather_rows(const EmbeddingMatrix& m, const std::vector<std::size_t>& idx) {
  std::vector<float> out;
  out.reserve(idx.size() * m.dim());
  for (auto i : idx) {
    const auto r = m.row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace

Centroids centroids(const TaskEmbeddings& t, const ComputeOptions& opts) {
  Centroids c;
  c.image = mean_of(column_sum(t.images(), opts.threads), t.n());
  c.text = mean_of(column_sum(t.texts(), opts.threads), t.k());
  c.global.resize(t.d());
  const double n = double(t.n());
  const double k = double(t.k());
  for (std::size_t j = 0; j < t.d(); ++j) {
    c.global[j] = (n * c.image[j] + k * c.text[j]) / (n + k);
  }
  return c;
}

double intra_images_measure(const TaskEmbeddings& t, const ComputeOptions& opts) {
  return mean_pairwise_similarity(t.images(), opts.threads, "intra_images_measure");
}

double intra_texts_measure(const TaskEmbeddings& t, const ComputeOptions& opts) {
  return mean_pairwise_similarity(t.texts(), opts.threads, "intra_texts_measure");
}

double correct_label_alignment(const TaskEmbeddings& t, const ComputeOptions& opts) {
  const auto& images = t.images();
  const auto& texts = t.texts();
  const auto& labels = t.labels();
  const double total = parallel::block_sum(t.n(), opts.threads, [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      s += dot(images.row(i), texts.row(static_cast<std::size_t>(labels[i])));
    }
    return s;
  });
  return total / double(t.n());
}

double inter_modal_measure(const TaskEmbeddings& t, const ComputeOptions& opts) {
  if (t.k() < 2) {
    throw InsufficientDataError("inter_modal_measure needs at least 2 classes, got " +
                                std::to_string(t.k()));
  }
  // (1/n) Σ_x Σ_{y' != y(x)} x^T y' = (s_I^T s_T)/n − correct alignment
  const auto s_images = column_sum(t.images(), opts.threads);
  const auto s_texts = column_sum(t.texts(), opts.threads);
  const double all_pairs = dot<double, double>(s_images, s_texts) / double(t.n());
  return (all_pairs - correct_label_alignment(t, opts)) / double(t.k() - 1);
}

double iimm(const TaskEmbeddings& t, const ComputeOptions& opts) {
  const double inter = inter_modal_measure(t, opts);
  const double intra = intra_images_measure(t, opts);
  return (inter + intra) / 2.0;
}

ModalityGap modality_gap(const TaskEmbeddings& t, const ComputeOptions& opts) {
  const auto c = centroids(t, opts);
  ModalityGap gap;
  gap.vector.resize(t.d());
  for (std::size_t j = 0; j < t.d(); ++j) gap.vector[j] = c.image[j] - c.text[j];
  gap.norm = std::sqrt(norm_sq(gap.vector));
  return gap;
}

// ---------------------------------------------------------------------------
// Silhouette

namespace {

SilhouetteResult silhouette_cosine(const TaskEmbeddings& t, unsigned threads) {
  const auto& images = t.images();
  const auto& texts = t.texts();
  const std::size_t n = t.n();
  const std::size_t k = t.k();
  const auto s_images = column_sum(images, threads);
  const auto s_texts = column_sum(texts, threads);

  // Cosine distance 1 − u^T v; sums over a cluster collapse to a dot with
  // the cluster's column sum. Self terms are removed exactly.
  std::vector<double> s(n + k);
  parallel::for_blocks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto x = images.row(i);
      const double a = n > 1 ? 1.0 - (dot<float, double>(x, s_images) - dot(x, x)) / double(n - 1) : 0.0;
      const double b = 1.0 - dot<float, double>(x, s_texts) / double(k);
      s[i] = silhouette_value(a, b);
    }
  });
  parallel::for_blocks(k, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto y = texts.row(i);
      const double a = k > 1 ? 1.0 - (dot<float, double>(y, s_texts) - dot(y, y)) / double(k - 1) : 0.0;
      const double b = 1.0 - dot<float, double>(y, s_images) / double(n);
      s[n + i] = silhouette_value(a, b);
    }
  });
  SilhouetteResult r;
  r.value = parallel::pairwise_sum(s) / double(n + k);
  r.images_used = n;
  r.singleton_images = n == 1;
  r.singleton_texts = k == 1;
  return r;
}

SilhouetteResult silhouette_euclidean(const TaskEmbeddings& t, std::optional<Subsample> subsample,
                                      unsigned threads) {
  const auto& texts = t.texts();
  const std::size_t dim = t.d();

  std::vector<float> sampled;
  std::span<const float> image_values = t.images().values();
  if (subsample && subsample->size > 0 && subsample->size < t.n()) {
    sampled = gather_rows(t.images(), sample_indices(t.n(), subsample->size, subsample->seed));
    image_values = sampled;
  }
  const std::size_t m = image_values.size() / dim;
  const std::size_t k = t.k();
  auto image_row = [&](std::size_t i) { return image_values.subspan(i * dim, dim); };

  auto mean_distance = [&](std::span<const float> p, auto&& row_of, std::size_t count,
                           std::size_t skip) {
    double s = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      if (j == skip) continue;
      s += std::sqrt(squared_distance(p, row_of(j)));
    }
    return s;
  };
  auto text_row = [&](std::size_t j) { return texts.row(j); };
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::vector<double> s(m + k);
  parallel::for_blocks(m, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto x = image_row(i);
      const double a = m > 1 ? mean_distance(x, image_row, m, i) / double(m - 1) : 0.0;
      const double b = mean_distance(x, text_row, k, kNone) / double(k);
      s[i] = silhouette_value(a, b);
    }
  }, 64);
  parallel::for_blocks(k, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto y = texts.row(i);
      const double a = k > 1 ? mean_distance(y, text_row, k, i) / double(k - 1) : 0.0;
      const double b = mean_distance(y, image_row, m, kNone) / double(m);
      s[m + i] = silhouette_value(a, b);
    }
  }, 64);

  SilhouetteResult r;
  r.value = parallel::pairwise_sum(s) / double(m + k);
  r.images_used = m;
  r.singleton_images = m == 1;
  r.singleton_texts = k == 1;
  return r;
}

}  // namespace

SilhouetteResult silhouette_detailed(const TaskEmbeddings& t, Metric metric,
                                     std::optional<Subsample> subsample, const ComputeOptions& opts) {
  if (metric == Metric::cosine) return silhouette_cosine(t, opts.threads);
  return silhouette_euclidean(t, subsample, opts.threads);
}

double silhouette(const TaskEmbeddings& t, Metric metric, std::optional<Subsample> subsample,
                  const ComputeOptions& opts) {
  return silhouette_detailed(t, metric, subsample, opts).value;
}

// ---------------------------------------------------------------------------
// Davies-Bouldin / Calinski-Harabasz

double davies_bouldin(const TaskEmbeddings& t, const ComputeOptions& opts) {
  const auto c = centroids(t, opts);
  std::vector<double> diff(t.d());
  for (std::size_t j = 0; j < t.d(); ++j) diff[j] = c.image[j] - c.text[j];
  const double separation = std::sqrt(norm_sq(diff));
  if (separation <= kDegenerate) {
    throw DegenerateGeometryError("davies_bouldin: image and text centroids coincide");
  }
  const double s_images = sum_distance_to(t.images(), c.image, false, opts.threads) / double(t.n());
  const double s_texts = sum_distance_to(t.texts(), c.text, false, opts.threads) / double(t.k());
  return (s_images + s_texts) / separation;
}

namespace {

struct ScatterSums {
  double intra = 0.0;  // Σ‖x − x̄‖² + Σ‖y − ȳ‖²
  double inter = 0.0;  // n‖x̄ − c̄‖² + k‖ȳ − c̄‖²
};

ScatterSums scatter_sums(const TaskEmbeddings& t, unsigned threads) {
  if (t.n() + t.k() < 3) {
    throw InsufficientDataError("calinski_harabasz needs at least 3 points in total");
  }
  const auto c = centroids(t, {threads});
  ScatterSums s;
  s.intra = sum_distance_to(t.images(), c.image, true, threads) +
            sum_distance_to(t.texts(), c.text, true, threads);
  s.inter = double(t.n()) * squared_distance<double, double>(c.image, c.global) +
            double(t.k()) * squared_distance<double, double>(c.text, c.global);
  return s;
}

}  // namespace

double calinski_harabasz(const TaskEmbeddings& t, const ComputeOptions& opts) {
  const auto s = scatter_sums(t, opts.threads);
  if (s.inter <= kDegenerate) {
    throw DegenerateGeometryError("calinski_harabasz: between-cluster scatter is zero");
  }
  const double total = double(t.n() + t.k());
  return s.intra / (s.inter / (total - 2.0));
}

double calinski_harabasz_standard(const TaskEmbeddings& t, const ComputeOptions& opts) {
  const auto s = scatter_sums(t, opts.threads);
  if (s.intra <= kDegenerate) {
    throw DegenerateGeometryError("calinski_harabasz_standard: within-cluster scatter is zero");
  }
  const double total = double(t.n() + t.k());
  return s.inter * (total - 2.0) / s.intra;
}

// ---------------------------------------------------------------------------
// Clustering entropy

BandwidthRule BandwidthRule::parse(std::string_view text) {
  if (text == "scott") return scott();
  if (text == "silverman") return silverman();
  double h = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), h);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParameterError("bandwidth must be 'scott', 'silverman' or a number, got '" +
                         std::string(text) + "'");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ParameterError("fixed KDE bandwidth must be positive, got " + std::string(text));
  }
  return fixed(h);
}

std::string BandwidthRule::to_string() const {
  switch (kind) {
    case Kind::scott: return "scott";
    case Kind::silverman: return "silverman";
    case Kind::fixed: {
      std::ostringstream os;
      os.precision(17);
      os << "fixed(" << h << ")";
      return os.str();
    }
  }
  return "?";
}

double kde_entropy(std::span<const float> rows, std::size_t dim, const BandwidthRule& rule,
                   const ComputeOptions& opts) {
  if (dim == 0 || rows.size() % dim != 0) throw ParameterError("kde_entropy: bad row layout");
  const std::size_t m = rows.size() / dim;
  auto row = [&](std::size_t i) { return rows.subspan(i * dim, dim); };
  if (rule.kind == BandwidthRule::Kind::fixed && !(rule.h > 0.0)) {
    throw ParameterError("fixed KDE bandwidth must be positive");
  }

  bool distinct = false;
  for (std::size_t i = 1; i < m && !distinct; ++i) {
    distinct = !std::equal(row(i).begin(), row(i).end(), row(0).begin());
  }
  if (!distinct) {
    throw SingularBandwidthError("kde_entropy: cluster needs at least 2 distinct points");
  }

  std::vector<double> h(dim);
  if (rule.kind == BandwidthRule::Kind::fixed) {
    std::fill(h.begin(), h.end(), rule.h);
  } else {
    const double md = double(m);
    const double dd = double(dim);
    const double factor = rule.kind == BandwidthRule::Kind::scott
                              ? std::pow(md, -1.0 / (dd + 4.0))
                              : std::pow(md * (dd + 2.0) / 4.0, -1.0 / (dd + 4.0));
    for (std::size_t j = 0; j < dim; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) mean += row(i)[j];
      mean /= md;
      double var = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double dlt = row(i)[j] - mean;
        var += dlt * dlt;
      }
      var /= (md - 1.0);
      h[j] = factor * std::sqrt(var);
      if (h[j] <= kDegenerate) {
        throw SingularBandwidthError("kde_entropy: zero variance in dimension " + std::to_string(j));
      }
    }
  }

  std::vector<double> inv_h(dim);
  double log_norm = -std::log(double(m));
  for (std::size_t j = 0; j < dim; ++j) {
    inv_h[j] = 1.0 / h[j];
    log_norm -= std::log(h[j]) + 0.5 * std::log(2.0 * std::numbers::pi);
  }

  // log p̂(x_i) = log_norm + logsumexp_j(−½ Σ_l ((x_il − x_jl)/h_l)²)
  std::vector<double> log_density(m);
  parallel::for_blocks(m, opts.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> exponents(m);
    for (std::size_t i = begin; i < end; ++i) {
      const auto xi = row(i);
      double peak = -INFINITY;
      for (std::size_t q = 0; q < m; ++q) {
        const auto xq = row(q);
        double s = 0.0;
        for (std::size_t l = 0; l < dim; ++l) {
          const double z = (double(xi[l]) - double(xq[l])) * inv_h[l];
          s += z * z;
        }
        exponents[q] = -0.5 * s;
        peak = std::max(peak, exponents[q]);
      }
      double acc = 0.0;
      for (std::size_t q = 0; q < m; ++q) acc += std::exp(exponents[q] - peak);
      log_density[i] = log_norm + peak + std::log(acc);
    }
  }, 64);
  return -parallel::pairwise_sum(log_density) / double(m);
}

double weighted_cluster_entropy(double h_images, std::size_t n_images, double h_texts,
                                std::size_t n_texts) noexcept {
  const double total = double(n_images + n_texts);
  return h_images * (double(n_images) / total) + h_texts * (double(n_texts) / total);
}

double clustering_entropy(const TaskEmbeddings& t, const EntropyOptions& entropy,
                          const ComputeOptions& opts) {
  if (entropy.sample_cap < 2) throw ParameterError("entropy sample cap must be >= 2");
  auto cluster = [&](const EmbeddingMatrix& m, std::uint64_t stream) {
    if (m.rows() <= entropy.sample_cap) {
      return kde_entropy(m.values(), m.dim(), entropy.bandwidth, opts);
    }
    const auto idx = sample_indices(m.rows(), entropy.sample_cap, mix_seed(entropy.seed, stream));
    return kde_entropy(gather_rows(m, idx), m.dim(), entropy.bandwidth, opts);
  };
  const double h_images = cluster(t.images(), 1);
  const double h_texts = cluster(t.texts(), 2);
  return weighted_cluster_entropy(h_images, t.n(), h_texts, t.k());
}

// ---------------------------------------------------------------------------
// Suite

const std::vector<std::string>& measure_names() {
  static const std::vector<std::string> names = {
      std::string(measure::iimm),
      std::string(measure::inter_modal),
      std::string(measure::intra_images),
      std::string(measure::intra_texts),
      std::string(measure::correct_label_alignment),
      std::string(measure::modality_gap),
      std::string(measure::silhouette_cosine),
      std::string(measure::silhouette_euclidean),
      std::string(measure::davies_bouldin),
      std::string(measure::calinski_harabasz),
      std::string(measure::calinski_harabasz_standard),
      std::string(measure::clustering_entropy),
  };
  return names;
}

std::vector<std::string> parse_measure_list(std::string_view list) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  const auto& known = measure_names();
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    auto item = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "all") {
      for (const auto& name : known) {
        if (seen.insert(name).second) out.push_back(name);
      }
    } else if (!item.empty()) {
      if (std::find(known.begin(), known.end(), item) == known.end()) {
        throw NameError("unknown measure '" + std::string(item) + "'");
      }
      if (seen.insert(std::string(item)).second) out.emplace_back(item);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw NameError("empty measure selection");
  return out;
}

std::optional<double> MeasureReport::value(std::string_view name) const {
  for (const auto& [key, v] : values) {
    if (key == name) return v;
  }
  return std::nullopt;
}

bool MeasureReport::failed() const {
  return std::any_of(metadata.begin(), metadata.end(),
                     [](const auto& kv) { return kv.first.rfind("error.", 0) == 0; });
}

MeasureReport measure_suite(const TaskEmbeddings& t, std::span<const std::string> selection,
                            const MeasureOptions& options) {
  if (selection.empty()) throw NameError("empty measure selection");
  const auto& known = measure_names();
  for (const auto& name : selection) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw NameError("unknown measure '" + name + "'");
    }
  }

  MeasureReport report;
  report.task_id = t.task_id();
  report.model_id = t.model_id();
  report.metadata["n"] = std::to_string(t.n());
  report.metadata["k"] = std::to_string(t.k());
  report.metadata["d"] = std::to_string(t.d());

  const auto& compute = options.compute;
  // IIMM is stored from the same component values the report shows.
  std::optional<double> inter;
  std::optional<double> intra;
  auto get_inter = [&] {
    if (!inter) inter = inter_modal_measure(t, compute);
    return *inter;
  };
  auto get_intra = [&] {
    if (!intra) intra = intra_images_measure(t, compute);
    return *intra;
  };

  std::set<std::string> done;
  for (const auto& name : selection) {
    if (!done.insert(name).second) continue;
    try {
      double v = 0.0;
      if (name == measure::iimm) {
        v = (get_inter() + get_intra()) / 2.0;
      } else if (name == measure::inter_modal) {
        v = get_inter();
      } else if (name == measure::intra_images) {
        v = get_intra();
      } else if (name == measure::intra_texts) {
        v = intra_texts_measure(t, compute);
      } else if (name == measure::correct_label_alignment) {
        v = correct_label_alignment(t, compute);
      } else if (name == measure::modality_gap) {
        v = modality_gap(t, compute).norm;
      } else if (name == measure::silhouette_cosine) {
        const auto r = silhouette_detailed(t, Metric::cosine, {}, compute);
        v = r.value;
        report.metadata["silhouette_cosine.metric"] = "cosine";
        if (r.singleton_images || r.singleton_texts) {
          report.metadata["silhouette_cosine.singleton_cluster"] = "a(x)=0";
        }
      } else if (name == measure::silhouette_euclidean) {
        std::optional<Subsample> sub;
        if (options.silhouette_sample > 0 && options.silhouette_sample < t.n()) {
          sub = Subsample{options.silhouette_sample, mix_seed(options.seed, 0)};
        }
        const auto r = silhouette_detailed(t, Metric::euclidean, sub, compute);
        v = r.value;
        report.metadata["silhouette_euclidean.metric"] = "euclidean";
        report.metadata["silhouette_euclidean.images_used"] = std::to_string(r.images_used);
        if (sub) report.metadata["silhouette_euclidean.subsample_seed"] = std::to_string(options.seed);
        if (r.singleton_images || r.singleton_texts) {
          report.metadata["silhouette_euclidean.singleton_cluster"] = "a(x)=0";
        }
      } else if (name == measure::davies_bouldin) {
        v = davies_bouldin(t, compute);
      } else if (name == measure::calinski_harabasz) {
        v = calinski_harabasz(t, compute);
      } else if (name == measure::calinski_harabasz_standard) {
        v = calinski_harabasz_standard(t, compute);
      } else if (name == measure::clustering_entropy) {
        EntropyOptions e{options.entropy_bandwidth, options.entropy_sample_cap, options.seed};
        v = clustering_entropy(t, e, compute);
        report.metadata["clustering_entropy.bandwidth"] = e.bandwidth.to_string();
        report.metadata["clustering_entropy.sample_cap"] = std::to_string(e.sample_cap);
        if (t.n() > e.sample_cap || t.k() > e.sample_cap) {
          report.metadata["clustering_entropy.subsample_seed"] = std::to_string(options.seed);
        }
      }
      if (!std::isfinite(v)) throw DegenerateGeometryError(name + " is not finite");
      report.values.emplace_back(name, v);
    } catch (const Error& e) {
      report.metadata["error." + name] = e.what();
    }
  }
  return report;
}

}  // namespace modalgauge
