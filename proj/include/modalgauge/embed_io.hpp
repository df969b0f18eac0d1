#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace modalgauge {

/// Row-major n x d matrix of 32-bit floats. Construction rejects empty
/// shapes (rows >= 1, dim >= 2) and non-finite entries; instances are
/// immutable afterwards.
class EmbeddingMatrix {
public:
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const float> values() const noexcept { return values_; }

  /// Largest |‖row‖ - 1| over all rows.
  double max_norm_deviation() const;

private:
  std::size_t rows_;
  std::size_t dim_;
  std::vector<float> values_;
};

/// Class index per image. Range checks happen in TaskEmbeddings, where the
/// class count is known.
class LabelVector {
public:
  explicit LabelVector(std::vector<std::int64_t> entries) : entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }
  std::int64_t operator[](std::size_t i) const noexcept { return entries_[i]; }
  std::span<const std::int64_t> entries() const noexcept { return entries_; }

private:
  std::vector<std::int64_t> entries_;
};

/// Image embeddings I (n x d), class-text embeddings T (k x d) and the
/// label map y(x) for one (model, task) pair.
class TaskEmbeddings {
public:
  TaskEmbeddings(EmbeddingMatrix images, EmbeddingMatrix texts, LabelVector labels,
                 std::string task_id, std::string model_id);

  const EmbeddingMatrix& images() const noexcept { return images_; }
  const EmbeddingMatrix& texts() const noexcept { return texts_; }
  const LabelVector& labels() const noexcept { return labels_; }
  const std::string& task_id() const noexcept { return task_id_; }
  const std::string& model_id() const noexcept { return model_id_; }

  std::size_t n() const noexcept { return images_.rows(); }
  std::size_t k() const noexcept { return texts_.rows(); }
  std::size_t d() const noexcept { return images_.dim(); }

  /// Class indices that no image refers to.
  std::vector<std::int64_t> empty_classes() const;

private:
  EmbeddingMatrix images_;
  EmbeddingMatrix texts_;
  LabelVector labels_;
  std::string task_id_;
  std::string model_id_;
};

struct Checksums {
  std::string images;
  std::string texts;
  std::string labels;
};

/// JSON descriptor binding the three array files of a task. Paths are
/// resolved relative to the manifest's directory.
struct Manifest {
  std::string task_id;
  std::string model_id;
  std::filesystem::path image_path;
  std::filesystem::path text_path;
  std::filesystem::path label_path;
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  std::uint64_t d = 0;
  bool normalized = false;
  std::optional<Checksums> checksum;
  std::optional<std::string> prompt_template;
};

Manifest parse_manifest(std::string_view json_text);
std::string manifest_to_json(const Manifest& manifest);

std::variant<EmbeddingMatrix, LabelVector> load_array(const std::filesystem::path& path);
EmbeddingMatrix load_matrix(const std::filesystem::path& path);
LabelVector load_labels(const std::filesystem::path& path);

void save_matrix(const std::filesystem::path& path, const EmbeddingMatrix& m);
void save_labels(const std::filesystem::path& path, const LabelVector& labels);

/// Scales every row to unit Euclidean norm (computed in double).
/// Throws DegenerateRowError naming the first all-zero row.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

struct LoadOptions {
  /// Accepted |‖row‖ - 1| for inputs whose manifest says normalized=true.
  double norm_tolerance = 1e-3;
};

/// Loads and cross-validates a task. Non-fatal findings (missing checksums,
/// empty classes) are appended to `warnings` when given.
TaskEmbeddings load_task(const std::filesystem::path& manifest_path,
                         const LoadOptions& options = {},
                         std::vector<std::string>* warnings = nullptr);

/// Writes images.npy, texts.npy, labels.npy and manifest.json into `dir`
/// with checksums; returns the manifest path.
std::filesystem::path save_task(const std::filesystem::path& dir, const TaskEmbeddings& task,
                                bool with_checksums = true);

}  // namespace modalgauge
