#pragma once

// Synthetic transfer experiment: tasks whose fine-tuning gain is planted
// as a linear function of their IIMM, written to disk the way the CLI
// expects them.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fixtures {

struct PlantedTask {
  std::string task;
  std::filesystem::path manifest;
  double iimm = 0.0;        // measured on the stored embeddings
  double true_gain = 0.0;   // slope·iimm + intercept
  double observed_gain = 0.0;
};

struct PlantedSuite {
  std::vector<PlantedTask> tasks;
  std::filesystem::path outcomes;  // long-format CSV, in-domain and OOD rows
};

struct PlantedSpec {
  std::size_t tasks = 9;
  double slope = 1.4;
  double intercept = -0.2;
  double noise = 0.02;
  std::size_t n = 300;
  std::size_t k = 10;
  std::size_t d = 32;
  std::uint64_t seed = 0;
  std::string model_id = "synthetic-model";
  std::string prefix = "task";
};

// Shared-direction weights are spread so that IIMM covers roughly 0.2..0.7.
PlantedSuite make_planted_suite(const std::filesystem::path& dir, const PlantedSpec& spec);

// Runs the command line in-process; returns the exit code and captures streams.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace fixtures
