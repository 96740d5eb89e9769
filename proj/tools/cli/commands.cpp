#include "commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <tuple>

#include "csv_io.hpp"
#include "ikd/decomposition.hpp"
#include "ikd/error.hpp"
#include "ikd/eval.hpp"
#include "ikd/synthgen.hpp"

namespace ikd::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

DiagonalStatistic parse_stat(const std::string& name) {
  if (name == "mean") return DiagonalStatistic::kMean;
  if (name == "median") return DiagonalStatistic::kMedian;
  throw Error(ErrorKind::kConfig, "unknown sigma2 statistic '" + name + "' (mean|median)");
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json kernel_to_json(const KernelOptions& k) {
  json j{{"family", k.family}};
  if (k.family == "rq") j["alpha"] = k.alpha;
  if (k.family == "gamma-exp") j["gamma"] = k.gamma;
  if (k.family == "matern") j["nu"] = k.nu;
  return j;
}

void maybe_write_run_config(const fs::path& dir, const std::string& run_config) {
  if (!run_config.empty()) write_text(dir / "run.toml", run_config);
}

GeneratorParams generator_params(const GenerateConfig& c) {
  GeneratorParams p = GeneratorParams::defaults_for(parse_mapping(c.mapping));
  p.T = c.T;
  p.N = c.N;
  if (c.M) p.M = *c.M;
  if (c.noise) p.noise_sd = *c.noise;
  p.sigma2 = c.sigma2;
  p.lengthscale = c.lengthscale;
  p.amplitude = c.amplitude;
  return p;
}

double read_wall_time(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kData, "cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in).at("wall_time_s").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kData, path.string() + ": " + e.what());
  }
}

void append_report_rows(const fs::path& path, const std::vector<std::string>& rows) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::kData, "cannot open '" + path.string() + "' for appending");
  if (fresh) out << "method,dataset,N,M,trial,metric,value,wall_time\n";
  for (const auto& r : rows) out << r << '\n';
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

KernelSpec KernelOptions::spec() const {
  KernelSpec s;
  if (family == "se") {
    s.family = SquaredExponential{};
  } else if (family == "rq") {
    s.family = RationalQuadratic{alpha};
  } else if (family == "gamma-exp") {
    s.family = GammaExponential{gamma};
  } else if (family == "matern") {
    s.family = Matern{nu};
  } else {
    throw Error(ErrorKind::kConfig,
                "unknown kernel '" + family + "' (se|rq|gamma-exp|matern)");
  }
  s.validate();
  return s;
}

ReduceResult reduce_matrix(const ObservationMatrix& X, const ReduceSettings& settings) {
  ReduceResult result;
  const auto start = std::chrono::steady_clock::now();
  if (settings.method == "ikd") {
    IkdOptions options;
    options.strategy = parse_strategy(settings.strategy);
    options.s0_rel = settings.s0_rel;
    options.diagonal = parse_stat(settings.sigma2_stat);
    LatentEstimate est = inverse_kernel_decomposition(X, settings.kernel.spec(), settings.M, options);
    result.Z = std::move(est.Z);
    result.eigenvalues = std::move(est.eigenvalues);
    result.reference = est.reference;
    result.discarded_negative = est.discarded_negative;
    result.rank_deficient = est.rank_deficient;
    result.near_degenerate = est.near_degenerate;
  } else if (settings.method == "pca") {
    PcaResult pca = pca_baseline(X, settings.M);
    result.Z = std::move(pca.scores);
    result.eigenvalues = std::move(pca.explained_variance);
  } else {
    throw Error(ErrorKind::kConfig, "unknown method '" + settings.method + "' (ikd|pca)");
  }
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void run_generate(const GenerateConfig& config, const std::string& run_config) {
  const GeneratorParams p = generator_params(config);
  const SyntheticDataset ds = generate_dataset(p, config.seed);
  write_matrix(config.out / "X.csv", ds.X);
  write_matrix(config.out / "Z_true.csv", ds.Z_true);
  json meta{{"mapping", mapping_name(p.mapping)},
            {"seed", config.seed},
            {"T", p.T},
            {"M", p.M},
            {"N", p.N},
            {"noise_sd", p.noise_sd}};
  if (p.mapping == Mapping::kGp) {
    meta["sigma2"] = p.sigma2;
    meta["lengthscale"] = p.lengthscale;
  }
  if (p.mapping == Mapping::kBump) meta["amplitude"] = p.amplitude;
  write_text(config.out / "meta.json", meta.dump(2) + "\n");
  maybe_write_run_config(config.out, run_config);
  std::cout << "wrote " << (config.out / "X.csv").string() << " (" << ds.X.rows() << "x"
            << ds.X.cols() << ") and " << (config.out / "Z_true.csv").string() << "\n";
}

void run_reduce(const ReduceConfig& config, const std::string& run_config) {
  const Matrix X = read_matrix(config.input);
  const ReduceResult r = reduce_matrix(X, config.settings);
  write_matrix(config.out / "Z_est.csv", r.Z);
  const auto& s = config.settings;
  json diag{{"method", s.method},
            {"M", s.M},
            {"T", X.rows()},
            {"N", X.cols()},
            {"eigenvalues", vector_to_json(r.eigenvalues)}};
  if (s.method == "ikd") {
    diag["kernel"] = kernel_to_json(s.kernel);
    diag["strategy"] = s.strategy;
    diag["s0_rel"] = s.s0_rel;
    diag["sigma2_stat"] = s.sigma2_stat;
    diag["reference"] = r.reference;
    diag["discarded_negative"] = r.discarded_negative;
    diag["rank_deficient"] = r.rank_deficient;
    diag["near_degenerate"] = r.near_degenerate;
  }
  write_text(config.out / "diagnostics.json", diag.dump(2) + "\n");
  // Wall time is a measurement, so it lives apart from the reproducible outputs.
  write_text(config.out / "timing.json", json{{"wall_time_s", r.wall_time_s}}.dump(2) + "\n");
  maybe_write_run_config(config.out, run_config);
  std::cout << s.method << ": " << X.rows() << "x" << X.cols() << " -> " << r.Z.rows() << "x"
            << r.Z.cols() << " in " << r.wall_time_s << " s";
  if (r.rank_deficient) std::cout << " (warning: fewer than M positive eigenvalues)";
  std::cout << "\n";
}

void run_eval(const EvalConfig& config) {
  const Matrix Z = read_matrix(config.latent);
  const std::string N = config.N ? std::to_string(*config.N) : "";
  const std::string wall = config.timing ? format_double(read_wall_time(*config.timing)) : "";
  const std::string prefix = csv_field(config.method) + "," + csv_field(config.dataset) + "," +
                             N + "," + std::to_string(Z.cols()) + "," +
                             std::to_string(config.trial) + ",";
  std::vector<std::string> rows;
  if (config.metric == "r2") {
    if (!config.truth) throw Error(ErrorKind::kConfig, "eval --metric r2 requires --truth");
    const Matrix truth = read_matrix(*config.truth);
    if (truth.rows() != Z.rows()) {
      std::ostringstream os;
      os << "eval: latent has " << Z.rows() << " rows but truth has " << truth.rows();
      throw Error(ErrorKind::kData, os.str());
    }
    const AlignmentReport rep = affine_align(Z, truth);
    rows.push_back(prefix + "r2," + format_double(rep.r2_mean) + "," + wall);
    std::cout << "r2 = " << rep.r2_mean;
    if (rep.rank_deficient) std::cout << " (warning: rank-deficient estimate)";
    std::cout << "\n";
  } else if (config.metric == "knn") {
    if (!config.labels) throw Error(ErrorKind::kConfig, "eval --metric knn requires --labels");
    const std::vector<int> labels = read_labels(*config.labels);
    if (static_cast<Index>(labels.size()) != Z.rows()) {
      std::ostringstream os;
      os << "eval: latent has " << Z.rows() << " rows but " << labels.size() << " labels";
      throw Error(ErrorKind::kData, os.str());
    }
    for (int k : config.k) {
      const double acc = knn_cv(Z, labels, k, config.folds, config.seed);
      rows.push_back(prefix + "knn" + std::to_string(k) + "," + format_double(acc) + "," + wall);
      std::cout << "knn k=" << k << " accuracy = " << acc << "\n";
    }
  } else {
    throw Error(ErrorKind::kConfig, "unknown metric '" + config.metric + "' (r2|knn)");
  }
  append_report_rows(config.report, rows);
}

std::vector<BenchRow> run_bench_sweep(const BenchConfig& config) {
  if (config.trials < 1) throw Error(ErrorKind::kConfig, "bench: trials must be >= 1");
  if (config.N_values.empty() || config.mappings.empty() || config.methods.empty()) {
    throw Error(ErrorKind::kConfig, "bench: mappings, N list and methods must be non-empty");
  }
  for (const auto& m : config.methods) {
    if (m != "ikd" && m != "pca") throw Error(ErrorKind::kConfig, "bench: unknown method " + m);
  }
  std::vector<GeneratorParams> mappings;
  for (const auto& name : config.mappings) {
    GeneratorParams p = GeneratorParams::defaults_for(parse_mapping(name));
    p.T = config.T;
    if (config.M) p.M = *config.M;
    mappings.push_back(p);
  }
  config.kernel.spec();
  parse_strategy(config.strategy);

  std::vector<BenchRow> rows;
  for (GeneratorParams p : mappings) {
    for (Index N : config.N_values) {
      p.N = N;
      for (int trial = 0; trial < config.trials; ++trial) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(trial);
        std::optional<SyntheticDataset> ds;
        std::string gen_error;
        try {
          ds = generate_dataset(p, seed);
        } catch (const Error& e) {
          gen_error = std::string("generate failed: ") + e.what();
        }
        for (const auto& method : config.methods) {
          BenchRow row;
          row.method = method;
          row.dataset = mapping_name(p.mapping);
          row.N = N;
          row.M = p.M;
          row.trial = trial;
          if (!ds) {
            row.status = gen_error;
            rows.push_back(row);
            continue;
          }
          ReduceSettings s;
          s.method = method;
          s.M = p.M;
          s.kernel = config.kernel;
          s.strategy = config.strategy;
          s.s0_rel = config.s0_rel;
          try {
            const ReduceResult r = reduce_matrix(ds->X, s);
            row.wall_time_s = r.wall_time_s;
            row.value = affine_align(r.Z, ds->Z_true).r2_mean;
          } catch (const Error& e) {
            row.status = e.what();
          }
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
  // Keyed on first appearance so the summary follows sweep order.
  std::vector<BenchSummary> out;
  std::map<std::tuple<std::string, std::string, Index>, std::size_t> slot;
  std::vector<std::vector<double>> values;
  std::vector<double> time_sum;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.dataset, r.method, r.N);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      out.push_back(BenchSummary{r.method, r.dataset, r.N, r.M});
      values.emplace_back();
      time_sum.push_back(0.0);
    }
    BenchSummary& s = out[it->second];
    if (r.value) {
      values[it->second].push_back(*r.value);
      time_sum[it->second] += r.wall_time_s;
      ++s.ok;
    } else {
      ++s.failed;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    if (v.empty()) continue;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    out[i].mean = mean;
    out[i].sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    out[i].mean_time_s = time_sum[i] / static_cast<double>(v.size());
  }
  return out;
}

void run_bench(const BenchConfig& config, const std::string& run_config) {
  const std::vector<BenchRow> rows = run_bench_sweep(config);
  const std::vector<BenchSummary> summary = summarize(rows);

  std::ostringstream report;
  std::ostringstream timing;
  report << "method,dataset,N,M,trial,metric,value,status\n";
  timing << "method,dataset,N,M,trial,wall_time_s\n";
  for (const auto& r : rows) {
    const std::string key = r.method + "," + r.dataset + "," + std::to_string(r.N) + "," +
                            std::to_string(r.M) + "," + std::to_string(r.trial);
    report << key << "," << r.metric << "," << (r.value ? format_double(*r.value) : "") << ","
           << csv_field(r.status) << "\n";
    timing << key << "," << format_double(r.wall_time_s) << "\n";
  }
  std::ostringstream sum;
  sum << "method,dataset,N,M,trials_ok,trials_failed,r2_mean,r2_sd\n";
  std::ostringstream time_sum;
  time_sum << "method,dataset,N,M,mean_wall_time_s\n";
  for (const auto& s : summary) {
    const std::string key =
        s.method + "," + s.dataset + "," + std::to_string(s.N) + "," + std::to_string(s.M);
    sum << key << "," << s.ok << "," << s.failed << ","
        << (s.ok > 0 ? format_double(s.mean) : "") << "," << (s.ok > 0 ? format_double(s.sd) : "")
        << "\n";
    time_sum << key << "," << format_double(s.mean_time_s) << "\n";
    std::cout << s.dataset << " " << s.method << " N=" << s.N << ": r2 " << s.mean << " +/- "
              << s.sd << " (" << s.ok << " ok, " << s.failed << " failed, " << s.mean_time_s
              << " s/run)\n";
  }
  write_text(config.out / "report.csv", report.str());
  write_text(config.out / "summary.csv", sum.str());
  write_text(config.out / "timing.csv", timing.str());
  write_text(config.out / "timing_summary.csv", time_sum.str());
  maybe_write_run_config(config.out, run_config);
}

namespace {

void add_kernel_options(CLI::App* cmd, KernelOptions& k) {
  cmd->add_option("--kernel", k.family, "Kernel family")
      ->check(CLI::IsMember({"se", "rq", "gamma-exp", "matern"}))
      ->capture_default_str();
  cmd->add_option("--alpha", k.alpha, "Rational quadratic alpha")->capture_default_str();
  cmd->add_option("--gamma", k.gamma, "Gamma-exponential gamma in (0, 2]")->capture_default_str();
  cmd->add_option("--nu", k.nu, "Matern smoothness")->capture_default_str();
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kConfig:
      return kExitConfig;
    case ErrorKind::kData:
      return kExitData;
    default:
      return kExitNumerical;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Inverse kernel decomposition: synthetic data, reduction, evaluation, sweeps"};
  app.set_config("--config", "", "Read options from a TOML run config (e.g. a saved run.toml)");
  app.require_subcommand(1);

  GenerateConfig gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  generate->add_option("--mapping", gen.mapping, "gp | sinusoid | bump")
      ->check(CLI::IsMember({"gp", "sinusoid", "bump"}))
      ->capture_default_str();
  generate->add_option("--T", gen.T, "Number of points")->capture_default_str();
  generate->add_option("--M", gen.M, "Latent dimension (default per mapping)");
  generate->add_option("--N", gen.N, "Observation dimension")->capture_default_str();
  generate->add_option("--noise", gen.noise, "Noise standard deviation (default per mapping)");
  generate->add_option("--sigma2", gen.sigma2, "GP marginal variance")->capture_default_str();
  generate->add_option("--lengthscale", gen.lengthscale, "GP length-scale")->capture_default_str();
  generate->add_option("--amplitude", gen.amplitude, "Bump amplitude")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate->add_option("--out", gen.out, "Output directory")
      ->envname("IKD_OUTPUT_DIR")
      ->capture_default_str();

  ReduceConfig red;
  auto* reduce = app.add_subcommand("reduce", "Reduce X.csv to an M-dimensional latent");
  reduce->add_option("--input", red.input, "Observation CSV (T rows, N columns)")->required();
  reduce->add_option("--method", red.settings.method, "ikd | pca")
      ->check(CLI::IsMember({"ikd", "pca"}))
      ->capture_default_str();
  reduce->add_option("--M", red.settings.M, "Latent dimension")->capture_default_str();
  add_kernel_options(reduce, red.settings.kernel);
  reduce->add_option("--strategy", red.settings.strategy, "none | geodesic | blockwise")
      ->check(CLI::IsMember({"none", "geodesic", "blockwise"}))
      ->capture_default_str();
  reduce->add_option("--s0-rel", red.settings.s0_rel, "Covariance threshold s0 / sigma2_hat")
      ->capture_default_str();
  reduce->add_option("--sigma2-stat", red.settings.sigma2_stat, "mean | median of diag(S)")
      ->check(CLI::IsMember({"mean", "median"}))
      ->capture_default_str();
  reduce->add_option("--out", red.out, "Output directory")
      ->envname("IKD_OUTPUT_DIR")
      ->capture_default_str();

  EvalConfig ev;
  auto* eval = app.add_subcommand("eval", "Score a latent estimate and append report rows");
  eval->add_option("--latent", ev.latent, "Estimated latent CSV")->required();
  eval->add_option("--truth", ev.truth, "True latent CSV (for r2)");
  eval->add_option("--labels", ev.labels, "Integer labels, one per line (for knn)");
  eval->add_option("--timing", ev.timing, "timing.json from reduce, copied into the row");
  eval->add_option("--metric", ev.metric, "r2 | knn")
      ->check(CLI::IsMember({"r2", "knn"}))
      ->capture_default_str();
  eval->add_option("--k", ev.k, "Neighbour counts for knn")->delimiter(',')->capture_default_str();
  eval->add_option("--folds", ev.folds, "Cross-validation folds")->capture_default_str();
  eval->add_option("--seed", ev.seed, "Fold assignment seed")->capture_default_str();
  eval->add_option("--method", ev.method, "Method name for the report row")->capture_default_str();
  eval->add_option("--dataset", ev.dataset, "Dataset name for the report row")
      ->capture_default_str();
  eval->add_option("--N", ev.N, "Observation dimension for the report row");
  eval->add_option("--trial", ev.trial, "Trial index for the report row")->capture_default_str();
  eval->add_option("--report", ev.report, "Report CSV to append to")->capture_default_str();

  BenchConfig bc;
  auto* bench = app.add_subcommand("bench", "Sweep generate -> reduce -> eval over N and trials");
  bench->add_option("--mappings", bc.mappings, "Mappings to sweep")
      ->delimiter(',')
      ->check(CLI::IsMember({"gp", "sinusoid", "bump"}))
      ->capture_default_str();
  bench->add_option("--N", bc.N_values, "Observation dimensions")->delimiter(',')->capture_default_str();
  bench->add_option("--trials", bc.trials, "Trials per cell")->capture_default_str();
  bench->add_option("--methods", bc.methods, "ikd and/or pca")
      ->delimiter(',')
      ->check(CLI::IsMember({"ikd", "pca"}))
      ->capture_default_str();
  bench->add_option("--T", bc.T, "Number of points")->capture_default_str();
  bench->add_option("--M", bc.M, "Latent dimension (default per mapping)");
  add_kernel_options(bench, bc.kernel);
  bench->add_option("--strategy", bc.strategy, "none | geodesic | blockwise")
      ->check(CLI::IsMember({"none", "geodesic", "blockwise"}))
      ->capture_default_str();
  bench->add_option("--s0-rel", bc.s0_rel, "Covariance threshold s0 / sigma2_hat")
      ->capture_default_str();
  bench->add_option("--seed", bc.seed, "Base seed; trial t uses seed + t")->capture_default_str();
  bench->add_option("--out", bc.out, "Output directory")
      ->envname("IKD_OUTPUT_DIR")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  // Keep only the invoked subcommand's settings; unset optionals serialise as
  // "" and would not parse back.
  std::string run_config;
  for (const CLI::App* sub : app.get_subcommands()) {
    std::istringstream all(app.config_to_str(true, false));
    const std::string prefix = sub->get_name() + ".";
    for (std::string line; std::getline(all, line);) {
      if (line.rfind(prefix, 0) != 0 || line.ends_with("=\"\"")) continue;
      run_config += line + "\n";
    }
  }
  try {
    if (*generate) run_generate(gen, run_config);
    if (*reduce) run_reduce(red, run_config);
    if (*eval) run_eval(ev);
    if (*bench) run_bench(bc, run_config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnexpected;
  }
  return kExitOk;
}

}  // namespace ikd::cli
