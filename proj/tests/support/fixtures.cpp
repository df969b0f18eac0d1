#include "support/fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace fixtures {

namespace {

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<double> unit(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (auto& x : v) x /= s;
  return v;
}

std::vector<float> finish(const std::vector<double>& v, bool normalize) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = normalize ? std::sqrt(s) : 1.0;
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / s);
  return out;
}

}  // namespace

modalgauge::TaskEmbeddings make_task(const SynthSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  const auto g = unit(gaussian_vector(rng, spec.d));
  const auto o_i = unit(gaussian_vector(rng, spec.d));
  const auto o_t = unit(gaussian_vector(rng, spec.d));
  std::vector<std::vector<double>> u(spec.k);
  for (auto& c : u) c = unit(gaussian_vector(rng, spec.d));

  std::vector<float> texts;
  texts.reserve(spec.k * spec.d);
  for (std::size_t c = 0; c < spec.k; ++c) {
    const auto z = gaussian_vector(rng, spec.d);
    std::vector<double> v(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) {
      v[j] = spec.shared * g[j] + spec.spread * u[c][j] +
             spec.text_noise * z[j] / std::sqrt(double(spec.d)) + spec.gap * o_t[j];
    }
    const auto f = finish(v, spec.normalize);
    texts.insert(texts.end(), f.begin(), f.end());
  }

  std::vector<float> images;
  images.reserve(spec.n * spec.d);
  std::vector<std::int64_t> labels(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    // Every class gets at least one image when n >= k.
    const std::size_t c = i < spec.k ? i : std::uniform_int_distribution<std::size_t>(0, spec.k - 1)(rng);
    labels[i] = static_cast<std::int64_t>(c);
    const auto z = gaussian_vector(rng, spec.d);
    std::vector<double> v(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) {
      v[j] = spec.shared * g[j] + spec.spread * u[c][j] +
             spec.noise * z[j] / std::sqrt(double(spec.d)) + spec.gap * o_i[j];
    }
    const auto f = finish(v, spec.normalize);
    images.insert(images.end(), f.begin(), f.end());
  }
  return modalgauge::TaskEmbeddings(
      modalgauge::EmbeddingMatrix(spec.n, spec.d, std::move(images)),
      modalgauge::EmbeddingMatrix(spec.k, spec.d, std::move(texts)),
      modalgauge::LabelVector(std::move(labels)), spec.task_id, spec.model_id);
}

modalgauge::TaskEmbeddings random_task(std::mt19937_64& rng, std::size_t max_n, std::size_t max_k,
                                       std::size_t max_d) {
  SynthSpec s;
  s.k = std::uniform_int_distribution<std::size_t>(2, max_k)(rng);
  s.n = std::uniform_int_distribution<std::size_t>(std::max<std::size_t>(2, s.k), max_n)(rng);
  s.d = std::uniform_int_distribution<std::size_t>(2, max_d)(rng);
  std::uniform_real_distribution<double> r(0.0, 1.5);
  s.shared = r(rng);
  s.spread = r(rng);
  s.noise = r(rng) * 2.0 + 0.05;
  s.text_noise = r(rng);
  s.gap = r(rng);
  s.seed = rng();
  return make_task(s);
}

modalgauge::TaskEmbeddings from_rows(const std::vector<std::vector<float>>& images,
                                     const std::vector<std::vector<float>>& texts,
                                     const std::vector<std::int64_t>& labels) {
  const std::size_t d = images.at(0).size();
  std::vector<float> iv, tv;
  for (const auto& r : images) iv.insert(iv.end(), r.begin(), r.end());
  for (const auto& r : texts) tv.insert(tv.end(), r.begin(), r.end());
  return modalgauge::TaskEmbeddings(modalgauge::EmbeddingMatrix(images.size(), d, std::move(iv)),
                                    modalgauge::EmbeddingMatrix(texts.size(), texts.at(0).size(), std::move(tv)),
                                    modalgauge::LabelVector(labels), "t", "m");
}

std::vector<double> random_orthogonal(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> rows;
  while (rows.size() < d) {
    auto v = gaussian_vector(rng, d);
    for (const auto& r : rows) {
      double p = 0.0;
      for (std::size_t j = 0; j < d; ++j) p += v[j] * r[j];
      for (std::size_t j = 0; j < d; ++j) v[j] -= p * r[j];
    }
    // Second pass keeps the basis orthogonal to double precision.
    for (const auto& r : rows) {
      double p = 0.0;
      for (std::size_t j = 0; j < d; ++j) p += v[j] * r[j];
      for (std::size_t j = 0; j < d; ++j) v[j] -= p * r[j];
    }
    rows.push_back(unit(std::move(v)));
  }
  std::vector<double> q;
  for (const auto& r : rows) q.insert(q.end(), r.begin(), r.end());
  return q;
}

namespace {

modalgauge::EmbeddingMatrix rotate_matrix(const modalgauge::EmbeddingMatrix& m,
                                          const std::vector<double>& q) {
  const std::size_t d = m.dim();
  std::vector<float> out(m.rows() * d);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < d; ++b) s += q[a * d + b] * r[b];
      out[i * d + a] = static_cast<float>(s);
    }
  }
  return modalgauge::EmbeddingMatrix(m.rows(), d, std::move(out));
}

}  // namespace

modalgauge::TaskEmbeddings rotate(const modalgauge::TaskEmbeddings& t, const std::vector<double>& q) {
  return modalgauge::TaskEmbeddings(rotate_matrix(t.images(), q), rotate_matrix(t.texts(), q),
                                    t.labels(), t.task_id(), t.model_id());
}

modalgauge::TaskEmbeddings permute_images(const modalgauge::TaskEmbeddings& t, std::uint64_t seed) {
  std::vector<std::size_t> order(t.n());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t d = t.d();
  std::vector<float> values;
  std::vector<std::int64_t> labels;
  for (std::size_t i : order) {
    const auto r = t.images().row(i);
    values.insert(values.end(), r.begin(), r.end());
    labels.push_back(t.labels()[i]);
  }
  return modalgauge::TaskEmbeddings(modalgauge::EmbeddingMatrix(t.n(), d, std::move(values)),
                                    t.texts(), modalgauge::LabelVector(std::move(labels)),
                                    t.task_id(), t.model_id());
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    auto p = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    if (std::filesystem::create_directory(p)) {
      path_ = p;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace fixtures
