#pragma once

// Synthetic tasks and small helpers shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "modalgauge/embed_io.hpp"

namespace fixtures {

// Image i of class c is normalize(shared·g + spread·u_c + noise·z_i + gap·o_I),
// text c is normalize(shared·g + spread·u_c + text_noise·z_c + gap·o_T), with
// g, u_c, o_I, o_T, z random Gaussian directions. Raising `shared` raises
// every cosine similarity and hence IIMM.
struct SynthSpec {
  std::size_t n = 200;
  std::size_t k = 10;
  std::size_t d = 16;
  double shared = 0.5;
  double spread = 1.0;
  double noise = 0.6;
  double text_noise = 0.2;
  double gap = 0.5;
  std::uint64_t seed = 1;
  bool normalize = true;
  std::string task_id = "synthetic";
  std::string model_id = "model";
};

modalgauge::TaskEmbeddings make_task(const SynthSpec& spec);

// Random instance with every shape parameter drawn from the given bounds.
modalgauge::TaskEmbeddings random_task(std::mt19937_64& rng, std::size_t max_n, std::size_t max_k,
                                       std::size_t max_d);

modalgauge::TaskEmbeddings from_rows(const std::vector<std::vector<float>>& images,
                                     const std::vector<std::vector<float>>& texts,
                                     const std::vector<std::int64_t>& labels);

// Haar-ish random orthogonal matrix (Gram-Schmidt on a Gaussian matrix), row-major.
std::vector<double> random_orthogonal(std::size_t d, std::uint64_t seed);

modalgauge::TaskEmbeddings rotate(const modalgauge::TaskEmbeddings& t, const std::vector<double>& q);

// Shuffles image rows and their labels together.
modalgauge::TaskEmbeddings permute_images(const modalgauge::TaskEmbeddings& t, std::uint64_t seed);

// Unique temporary directory, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag = "mg");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);
void spit(const std::filesystem::path& path, const std::string& text);

}  // namespace fixtures
