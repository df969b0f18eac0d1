#include "modalgauge/embed_io.hpp"

#include <cmath>
#include <cstring>
#include <json.hpp>

#include "modalgauge/errors.hpp"
#include "modalgauge/fileutil.hpp"
#include "modalgauge/npy.hpp"

namespace modalgauge {

using nlohmann::json;

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (rows_ < 1) throw FormatError("embedding matrix needs at least one row");
  if (dim_ < 2) throw FormatError("embedding dimension must be >= 2, got " + std::to_string(dim_));
  if (values_.size() != rows_ * dim_) {
    throw FormatError("embedding matrix holds " + std::to_string(values_.size()) +
                      " values, shape needs " + std::to_string(rows_ * dim_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw FormatError("non-finite embedding value at row " + std::to_string(i / dim_) +
                        ", column " + std::to_string(i % dim_));
    }
  }
}

double EmbeddingMatrix::max_norm_deviation() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double sq = 0.0;
    for (float v : row(i)) sq += double(v) * double(v);
    worst = std::max(worst, std::abs(std::sqrt(sq) - 1.0));
  }
  return worst;
}

TaskEmbeddings::TaskEmbeddings(EmbeddingMatrix images, EmbeddingMatrix texts, LabelVector labels,
                               std::string task_id, std::string model_id)
    : images_(std::move(images)),
      texts_(std::move(texts)),
      labels_(std::move(labels)),
      task_id_(std::move(task_id)),
      model_id_(std::move(model_id)) {
  if (images_.dim() != texts_.dim()) {
    throw IntegrityError("image dim " + std::to_string(images_.dim()) + " != text dim " +
                         std::to_string(texts_.dim()));
  }
  if (labels_.size() != images_.rows()) {
    throw IntegrityError("label count " + std::to_string(labels_.size()) +
                         " != image count " + std::to_string(images_.rows()));
  }
  const auto k = static_cast<std::int64_t>(texts_.rows());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= k) {
      throw LabelError("label " + std::to_string(labels_[i]) + " at image " + std::to_string(i) +
                       " outside class range [0, " + std::to_string(k) + ")");
    }
  }
}

std::vector<std::int64_t> TaskEmbeddings::empty_classes() const {
  std::vector<bool> seen(k(), false);
  for (auto l : labels_.entries()) seen[static_cast<std::size_t>(l)] = true;
  std::vector<std::int64_t> out;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) out.push_back(static_cast<std::int64_t>(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ManifestError(std::string("manifest missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ManifestError(std::string("manifest field '") + key + "' has the wrong type");
  }
}

}  // namespace

Manifest parse_manifest(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ManifestError("manifest must be a JSON object");

  Manifest m;
  m.task_id = required<std::string>(j, "task_id");
  m.model_id = required<std::string>(j, "model_id");
  m.image_path = required<std::string>(j, "image_path");
  m.text_path = required<std::string>(j, "text_path");
  m.label_path = required<std::string>(j, "label_path");
  m.n = required<std::uint64_t>(j, "n");
  m.k = required<std::uint64_t>(j, "k");
  m.d = required<std::uint64_t>(j, "d");
  m.normalized = required<bool>(j, "normalized");
  if (j.contains("checksum") && !j["checksum"].is_null()) {
    const auto& c = j["checksum"];
    if (!c.is_object()) throw ManifestError("manifest field 'checksum' must be an object");
    m.checksum = Checksums{required<std::string>(c, "images"), required<std::string>(c, "texts"),
                           required<std::string>(c, "labels")};
  }
  if (j.contains("prompt_template") && j["prompt_template"].is_string()) {
    m.prompt_template = j["prompt_template"].get<std::string>();
  }
  return m;
}

std::string manifest_to_json(const Manifest& m) {
  json j = {{"task_id", m.task_id},
            {"model_id", m.model_id},
            {"image_path", m.image_path.generic_string()},
            {"text_path", m.text_path.generic_string()},
            {"label_path", m.label_path.generic_string()},
            {"n", m.n},
            {"k", m.k},
            {"d", m.d},
            {"normalized", m.normalized}};
  if (m.checksum) {
    j["checksum"] = {{"images", m.checksum->images},
                     {"texts", m.checksum->texts},
                     {"labels", m.checksum->labels}};
  }
  if (m.prompt_template) j["prompt_template"] = *m.prompt_template;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Arrays

namespace {

std::variant<EmbeddingMatrix, LabelVector> from_npy(const npy::Array& a,
                                                    const std::filesystem::path& path) {
  const auto& shape = a.header.shape;
  if (a.header.dtype == npy::Dtype::i8) {
    if (shape.size() != 1) {
      throw FormatError(path.string() + ": label arrays must be 1-D");
    }
    std::vector<std::int64_t> entries(shape[0]);
    std::memcpy(entries.data(), a.payload.data(), a.payload.size());
    return LabelVector(std::move(entries));
  }
  if (shape.size() != 2) {
    throw FormatError(path.string() + ": embedding arrays must be 2-D");
  }
  const auto count = static_cast<std::size_t>(shape[0] * shape[1]);
  std::vector<float> values(count);
  if (a.header.dtype == npy::Dtype::f4) {
    std::memcpy(values.data(), a.payload.data(), a.payload.size());
  } else {
    std::vector<double> wide(count);
    std::memcpy(wide.data(), a.payload.data(), a.payload.size());
    for (std::size_t i = 0; i < count; ++i) values[i] = static_cast<float>(wide[i]);
  }
  try {
    return EmbeddingMatrix(shape[0], shape[1], std::move(values));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::variant<EmbeddingMatrix, LabelVector> load_array(const std::filesystem::path& path) {
  return from_npy(npy::read_file(path), path);
}

EmbeddingMatrix load_matrix(const std::filesystem::path& path) {
  auto v = load_array(path);
  if (auto* m = std::get_if<EmbeddingMatrix>(&v)) return std::move(*m);
  throw DtypeError(path.string() + ": expected a float matrix, found integer labels");
}

LabelVector load_labels(const std::filesystem::path& path) {
  auto v = load_array(path);
  if (auto* l = std::get_if<LabelVector>(&v)) return std::move(*l);
  throw DtypeError(path.string() + ": expected <i8 labels, found a float matrix");
}

void save_matrix(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  npy::write_f4(path, m.values(), m.rows(), m.dim());
}

void save_labels(const std::filesystem::path& path, const LabelVector& labels) {
  npy::write_i8(path, labels.entries());
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  std::vector<float> out(m.values().begin(), m.values().end());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    double sq = 0.0;
    for (float v : row) sq += double(v) * double(v);
    if (sq == 0.0) {
      throw DegenerateRowError(i, "cannot normalize all-zero row " + std::to_string(i));
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t j = 0; j < m.dim(); ++j) {
      out[i * m.dim() + j] = static_cast<float>(double(row[j]) * inv);
    }
  }
  return EmbeddingMatrix(m.rows(), m.dim(), std::move(out));
}

// ---------------------------------------------------------------------------
// Tasks

namespace {

struct LoadedFile {
  npy::Array array;
  std::string sha256;
};

LoadedFile read_checked(const std::filesystem::path& path, const std::string* expected_sha) {
  auto bytes = read_binary(path);
  LoadedFile f;
  if (expected_sha) {
    f.sha256 = sha256_hex(bytes);
    if (f.sha256 != *expected_sha) {
      throw IntegrityError(path.string() + ": checksum mismatch (manifest " + *expected_sha +
                           ", file " + f.sha256 + ")");
    }
  }
  try {
    f.array = npy::decode(std::move(bytes));
  } catch (const TruncationError& e) {
    throw TruncationError(path.string() + ": " + e.what());
  } catch (const DtypeError& e) {
    throw DtypeError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return f;
}

void expect_count(const char* what, std::uint64_t declared, std::uint64_t actual,
                  const std::filesystem::path& path) {
  if (declared != actual) {
    throw IntegrityError(path.string() + ": manifest declares " + what + "=" +
                         std::to_string(declared) + " but file has " + std::to_string(actual));
  }
}

}  // namespace

TaskEmbeddings load_task(const std::filesystem::path& manifest_path, const LoadOptions& options,
                         std::vector<std::string>* warnings) {
  const auto manifest = parse_manifest(read_text(manifest_path));
  const auto base = manifest_path.parent_path();
  const auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : base / p; };
  const auto image_path = resolve(manifest.image_path);
  const auto text_path = resolve(manifest.text_path);
  const auto label_path = resolve(manifest.label_path);

  if (!manifest.checksum && warnings) {
    warnings->push_back(manifest.task_id + ": manifest has no checksums; integrity not verified");
  }
  const auto* sums = manifest.checksum ? &*manifest.checksum : nullptr;
  auto image_file = read_checked(image_path, sums ? &sums->images : nullptr);
  auto text_file = read_checked(text_path, sums ? &sums->texts : nullptr);
  auto label_file = read_checked(label_path, sums ? &sums->labels : nullptr);

  auto consume = [](LoadedFile& f, const std::filesystem::path& p) {
    auto v = from_npy(f.array, p);
    f.array.payload = {};
    return v;
  };
  auto images_v = consume(image_file, image_path);
  auto texts_v = consume(text_file, text_path);
  auto labels_v = consume(label_file, label_path);
  auto* images = std::get_if<EmbeddingMatrix>(&images_v);
  auto* texts = std::get_if<EmbeddingMatrix>(&texts_v);
  auto* labels = std::get_if<LabelVector>(&labels_v);
  if (!images) throw DtypeError(image_path.string() + ": expected a float matrix");
  if (!texts) throw DtypeError(text_path.string() + ": expected a float matrix");
  if (!labels) throw DtypeError(label_path.string() + ": expected <i8 labels");

  expect_count("n", manifest.n, images->rows(), image_path);
  expect_count("d", manifest.d, images->dim(), image_path);
  expect_count("k", manifest.k, texts->rows(), text_path);
  expect_count("d", manifest.d, texts->dim(), text_path);
  expect_count("n", manifest.n, labels->size(), label_path);

  if (manifest.normalized) {
    for (const auto* m : {images, texts}) {
      const double dev = m->max_norm_deviation();
      if (dev > options.norm_tolerance) {
        throw NormalizationError(manifest.task_id + ": manifest says normalized but a row norm is off by " +
                                 std::to_string(dev) + " (tolerance " +
                                 std::to_string(options.norm_tolerance) + ")");
      }
    }
  }

  TaskEmbeddings task(manifest.normalized ? std::move(*images) : normalize_rows(*images),
                      manifest.normalized ? std::move(*texts) : normalize_rows(*texts),
                      std::move(*labels), manifest.task_id, manifest.model_id);
  if (warnings) {
    const auto empty = task.empty_classes();
    if (!empty.empty()) {
      warnings->push_back(task.task_id() + ": " + std::to_string(empty.size()) +
                          " class(es) have no images (first: " + std::to_string(empty.front()) + ")");
    }
  }
  return task;
}

std::filesystem::path save_task(const std::filesystem::path& dir, const TaskEmbeddings& task,
                                bool with_checksums) {
  std::filesystem::create_directories(dir);
  Manifest m;
  m.task_id = task.task_id();
  m.model_id = task.model_id();
  m.image_path = "images.npy";
  m.text_path = "texts.npy";
  m.label_path = "labels.npy";
  m.n = task.n();
  m.k = task.k();
  m.d = task.d();
  m.normalized = task.images().max_norm_deviation() <= LoadOptions{}.norm_tolerance &&
                 task.texts().max_norm_deviation() <= LoadOptions{}.norm_tolerance;
  save_matrix(dir / m.image_path, task.images());
  save_matrix(dir / m.text_path, task.texts());
  save_labels(dir / m.label_path, task.labels());
  if (with_checksums) {
    m.checksum = Checksums{sha256_file(dir / m.image_path), sha256_file(dir / m.text_path),
                           sha256_file(dir / m.label_path)};
  }
  const auto path = dir / "manifest.json";
  write_atomic(path, manifest_to_json(m));
  return path;
}

}  // namespace modalgauge
