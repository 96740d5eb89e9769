#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ikd/covariance.hpp"
#include "ikd/kernels.hpp"
#include "ikd/types.hpp"

namespace ikd::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumerical = 4,
};

struct KernelOptions {
  std::string family = "se";  // se | rq | gamma-exp | matern
  double alpha = 1.0;
  double gamma = 1.0;
  double nu = 1.5;

  KernelSpec spec() const;
};

struct ReduceSettings {
  std::string method = "ikd";  // ikd | pca
  Index M = 2;
  KernelOptions kernel;
  std::string strategy = "none";
  double s0_rel = 0.01;
  std::string sigma2_stat = "mean";  // mean | median
};

struct ReduceResult {
  LatentMatrix Z;
  Vector eigenvalues;
  Index reference = -1;  // -1 for pca
  Index discarded_negative = 0;
  bool rank_deficient = false;
  bool near_degenerate = false;
  double wall_time_s = 0.0;
};

/// Runs the configured reduction on X and times it.
ReduceResult reduce_matrix(const ObservationMatrix& X, const ReduceSettings& settings);

struct GenerateConfig {
  std::string mapping = "gp";
  Index T = 300;
  std::optional<Index> M;
  Index N = 100;
  std::optional<double> noise;
  double sigma2 = 1.0;
  double lengthscale = 3.0;
  double amplitude = 20.0;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
};

struct ReduceConfig {
  std::filesystem::path input;
  ReduceSettings settings;
  std::filesystem::path out = ".";
};

struct EvalConfig {
  std::filesystem::path latent;
  std::optional<std::filesystem::path> truth;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> timing;
  std::string metric = "r2";  // r2 | knn
  std::vector<int> k = {5, 10, 20};
  int folds = 5;
  std::uint64_t seed = 0;
  std::string method = "ikd";
  std::string dataset = "custom";
  std::optional<Index> N;
  int trial = 0;
  std::filesystem::path report = "report.csv";
};

struct BenchConfig {
  std::vector<std::string> mappings = {"gp"};
  std::vector<Index> N_values = {10, 20, 50, 100};
  int trials = 10;
  std::vector<std::string> methods = {"ikd", "pca"};
  Index T = 300;
  std::optional<Index> M;
  KernelOptions kernel;
  std::string strategy = "none";
  double s0_rel = 0.01;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
};

/// One evaluated (mapping, method, N, trial) cell of a sweep.
struct BenchRow {
  std::string method;
  std::string dataset;
  Index N = 0;
  Index M = 0;
  int trial = 0;
  std::string metric = "r2";
  std::optional<double> value;  // empty when the cell failed
  std::string status = "ok";
  double wall_time_s = 0.0;
};

struct BenchSummary {
  std::string method;
  std::string dataset;
  Index N = 0;
  Index M = 0;
  int ok = 0;
  int failed = 0;
  double mean = 0.0;
  double sd = 0.0;
  double mean_time_s = 0.0;
};

/// Runs the sweep in memory. Trial t of every cell uses seed + t.
std::vector<BenchRow> run_bench_sweep(const BenchConfig& config);
std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);

// Each command writes its outputs under the configured directory and throws
// ikd::Error on failure. `run_config` is the serialised command line, stored
// as run.toml next to the outputs.
void run_generate(const GenerateConfig& config, const std::string& run_config = {});
void run_reduce(const ReduceConfig& config, const std::string& run_config = {});
void run_eval(const EvalConfig& config);
void run_bench(const BenchConfig& config, const std::string& run_config = {});

/// Parses argv, dispatches, and maps failures onto ExitCode values.
int run_cli(int argc, const char* const* argv);

}  // namespace ikd::cli
