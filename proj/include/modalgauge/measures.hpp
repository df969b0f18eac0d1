#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modalgauge/embed_io.hpp"

namespace modalgauge {

/// Threading knob shared by all measures. Values do not depend on it.
struct ComputeOptions {
  unsigned threads = 0;  // 0 = all logical cores
};

struct Centroids {
  std::vector<double> image;   // x̄
  std::vector<double> text;    // ȳ
  std::vector<double> global;  // c̄ = (n·x̄ + k·ȳ)/(n+k)
};

Centroids centroids(const TaskEmbeddings& t, const ComputeOptions& opts = {});

/// Mean cosine similarity over unordered image pairs,
/// (‖Σx‖² − Σ‖x‖²)/(n(n−1)). Needs n >= 2.
double intra_images_measure(const TaskEmbeddings& t, const ComputeOptions& opts = {});

/// Same closed form on the class-text matrix. Needs k >= 2.
double intra_texts_measure(const TaskEmbeddings& t, const ComputeOptions& opts = {});

/// Mean similarity of each image to the k−1 labels it does not carry.
/// Needs k >= 2.
double inter_modal_measure(const TaskEmbeddings& t, const ComputeOptions& opts = {});

/// (inter_modal + intra_images) / 2.
double iimm(const TaskEmbeddings& t, const ComputeOptions& opts = {});

/// Mean x^T y(x) over images.
double correct_label_alignment(const TaskEmbeddings& t, const ComputeOptions& opts = {});

struct ModalityGap {
  std::vector<double> vector;  // x̄ − ȳ
  double norm = 0.0;
};

ModalityGap modality_gap(const TaskEmbeddings& t, const ComputeOptions& opts = {});

enum class Metric { cosine, euclidean };

/// Uniform sample of image rows, drawn without replacement.
struct Subsample {
  std::size_t size = 0;
  std::uint64_t seed = 0;
};

struct SilhouetteResult {
  double value = 0.0;
  std::size_t images_used = 0;
  bool singleton_images = false;  // a(x) taken as 0
  bool singleton_texts = false;
};

/// Two-cluster silhouette (images vs texts) averaged over all points.
/// The cosine path is linear time; the Euclidean path is an exact blocked
/// O((n+k)²) pass, optionally over a seeded subsample of image rows.
SilhouetteResult silhouette_detailed(const TaskEmbeddings& t, Metric metric,
                                     std::optional<Subsample> subsample = {},
                                     const ComputeOptions& opts = {});

double silhouette(const TaskEmbeddings& t, Metric metric,
                  std::optional<Subsample> subsample = {}, const ComputeOptions& opts = {});

/// (S_I + S_T) / ‖x̄ − ȳ‖ with S the mean distance to the own centroid.
double davies_bouldin(const TaskEmbeddings& t, const ComputeOptions& opts = {});

/// IntraSS / (InterSS / (N − 2)), the orientation used by the IIMM
/// comparison tables (within-over-between).
double calinski_harabasz(const TaskEmbeddings& t, const ComputeOptions& opts = {});

/// Conventional between-over-within orientation, InterSS·(N − 2) / IntraSS.
double calinski_harabasz_standard(const TaskEmbeddings& t, const ComputeOptions& opts = {});

struct BandwidthRule {
  enum class Kind { scott, silverman, fixed };
  Kind kind = Kind::scott;
  double h = 0.0;  // only for Kind::fixed

  static BandwidthRule scott() { return {Kind::scott, 0.0}; }
  static BandwidthRule silverman() { return {Kind::silverman, 0.0}; }
  static BandwidthRule fixed(double h) { return {Kind::fixed, h}; }

  /// "scott", "silverman" or a positive number (fixed bandwidth).
  static BandwidthRule parse(std::string_view text);
  std::string to_string() const;
};

struct EntropyOptions {
  BandwidthRule bandwidth = BandwidthRule::scott();
  std::size_t sample_cap = 2000;
  std::uint64_t seed = 0;
};

/// Resubstitution entropy −(1/m) Σ log p̂(x_i) of a point set under a
/// Gaussian KDE with diagonal bandwidth.
double kde_entropy(std::span<const float> rows, std::size_t dim, const BandwidthRule& bandwidth,
                   const ComputeOptions& opts = {});

double weighted_cluster_entropy(double h_images, std::size_t n_images, double h_texts,
                                std::size_t n_texts) noexcept;

/// Size-weighted mean of the per-modality KDE entropies. Clusters above
/// sample_cap are subsampled (seeded).
double clustering_entropy(const TaskEmbeddings& t, const EntropyOptions& entropy = {},
                          const ComputeOptions& opts = {});

// ---------------------------------------------------------------------------
// Measure suite

namespace measure {
inline constexpr std::string_view iimm = "iimm";
inline constexpr std::string_view inter_modal = "inter_modal";
inline constexpr std::string_view intra_images = "intra_images";
inline constexpr std::string_view intra_texts = "intra_texts";
inline constexpr std::string_view correct_label_alignment = "correct_label_alignment";
inline constexpr std::string_view modality_gap = "modality_gap";
inline constexpr std::string_view silhouette_cosine = "silhouette_cosine";
inline constexpr std::string_view silhouette_euclidean = "silhouette_euclidean";
inline constexpr std::string_view davies_bouldin = "davies_bouldin";
inline constexpr std::string_view calinski_harabasz = "calinski_harabasz";
inline constexpr std::string_view calinski_harabasz_standard = "calinski_harabasz_standard";
inline constexpr std::string_view clustering_entropy = "clustering_entropy";
}  // namespace measure

/// Every measure name, in canonical report order.
const std::vector<std::string>& measure_names();

/// Splits a comma-separated list; "all" expands to every measure. Throws
/// NameError naming the first unknown entry.
std::vector<std::string> parse_measure_list(std::string_view list);

struct MeasureOptions {
  ComputeOptions compute;
  std::uint64_t seed = 0;
  /// Image-row sample size for the Euclidean silhouette; 0 = exact.
  std::size_t silhouette_sample = 0;
  BandwidthRule entropy_bandwidth = BandwidthRule::scott();
  std::size_t entropy_sample_cap = 2000;
};

struct MeasureReport {
  std::string task_id;
  std::string model_id;
  std::vector<std::pair<std::string, double>> values;  // selection order
  std::map<std::string, std::string> metadata;          // failures under "error.<name>"

  std::optional<double> value(std::string_view name) const;
  bool failed() const;
};

/// Computes each selected measure; a failing measure is recorded in the
/// metadata and does not stop the others.
MeasureReport measure_suite(const TaskEmbeddings& t, std::span<const std::string> selection,
                            const MeasureOptions& options = {});

}  // namespace modalgauge
