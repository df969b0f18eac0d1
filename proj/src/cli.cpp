#include "modalgauge/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "modalgauge/embed_io.hpp"
#include "modalgauge/errors.hpp"
#include "modalgauge/fileutil.hpp"
#include "modalgauge/measures.hpp"
#include "modalgauge/stats.hpp"
#include "modalgauge/tables.hpp"
#include "modalgauge/transfer.hpp"

namespace modalgauge::cli {

namespace {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

struct Common {
  std::uint64_t seed = 0;
  std::optional<unsigned> threads;
  std::string log_level = "warn";
};

struct Log {
  std::ostream& err;
  LogLevel level = LogLevel::warn;

  static std::string one_line(std::string s) {
    for (auto& c : s) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
  }
  void error(const std::string& msg) const { err << "error: " << one_line(msg) << "\n"; }
  void warning(const std::string& msg) const {
    if (level >= LogLevel::warn) err << "warning: " << one_line(msg) << "\n";
  }
  void note(const std::string& msg) const {
    if (level >= LogLevel::warn) err << "note: " << one_line(msg) << "\n";
  }
  void info(const std::string& msg) const {
    if (level >= LogLevel::info) err << "info: " << one_line(msg) << "\n";
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Seed for every random choice (subsampling)")
      ->capture_default_str();
  sub->add_option("--threads", c.threads,
                  "Worker threads (default: $MODALGAUGE_THREADS, else all logical cores)")
      ->check(CLI::Range(1u, 4096u));
  sub->add_option("--log-level", c.log_level, "Diagnostics verbosity")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
      ->capture_default_str();
}

unsigned thread_count(const Common& c) {
  if (c.threads) return *c.threads;
  if (const char* env = std::getenv("MODALGAUGE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ParameterError(std::string("MODALGAUGE_THREADS must be a positive integer, got '") + env + "'");
  }
  return 0;
}

LogLevel parse_level(const std::string& s) {
  if (s == "error") return LogLevel::error;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

// Shared measure flags (measure, predict).
struct MeasureFlags {
  std::size_t silhouette_sample = 0;
  std::string entropy_bandwidth = "scott";
  std::size_t entropy_sample_cap = 2000;
  double norm_tolerance = 1e-3;

  void add(CLI::App* sub) {
    sub->add_option("--silhouette-sample", silhouette_sample,
                    "Image rows sampled for the Euclidean silhouette (0 = exact)")
        ->capture_default_str();
    sub->add_option("--entropy-bandwidth", entropy_bandwidth,
                    "KDE bandwidth for clustering_entropy: scott, silverman or a positive number")
        ->capture_default_str();
    sub->add_option("--entropy-sample-cap", entropy_sample_cap,
                    "Per-cluster sample cap for clustering_entropy")
        ->capture_default_str();
    sub->add_option("--norm-tolerance", norm_tolerance,
                    "Accepted |row norm - 1| for manifests marked normalized")
        ->capture_default_str();
  }

  MeasureOptions options(const Common& c) const {
    MeasureOptions o;
    o.compute.threads = thread_count(c);
    o.seed = c.seed;
    o.silhouette_sample = silhouette_sample;
    o.entropy_bandwidth = BandwidthRule::parse(entropy_bandwidth);
    o.entropy_sample_cap = entropy_sample_cap;
    return o;
  }
};

std::string manifest_task_id(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_text(path)).task_id;
  } catch (const std::exception&) {
    return path.string();
  }
}

// ---------------------------------------------------------------------------

struct MeasureCmd {
  Common common;
  MeasureFlags flags;
  std::vector<std::string> manifests;
  std::string measures = "iimm";
  std::string out;
  std::string format = "json";
  bool ch_standard = false;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("measure", "Compute measures for one or more tasks");
    sub->add_option("--manifest", manifests, "Task manifest JSON (repeatable)")
        ->required()
        ->expected(1, -1);
    sub->add_option("--measures", measures,
                    "Comma-separated measure names, or 'all'. Known: " + [] {
                      std::string s;
                      for (const auto& n : measure_names()) s += (s.empty() ? "" : ", ") + n;
                      return s;
                    }())
        ->capture_default_str();
    sub->add_option("--out", out, "Output file")->required();
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sub->add_flag("--ch-standard", ch_standard,
                  "Also report calinski_harabasz_standard (between-over-within orientation)");
    flags.add(sub);
    add_common(sub, common);
  }

  int run(const Log& log) const {
    auto selection = parse_measure_list(measures);
    if (ch_standard && std::find(selection.begin(), selection.end(),
                                 std::string(measure::calinski_harabasz_standard)) == selection.end()) {
      selection.emplace_back(measure::calinski_harabasz_standard);
    }
    const auto options = flags.options(common);
    const LoadOptions load{flags.norm_tolerance};

    std::vector<MeasureReport> reports;
    std::size_t failures = 0;
    std::size_t load_failures = 0;
    for (const auto& path : manifests) {
      try {
        std::vector<std::string> warnings;
        const auto task = load_task(path, load, &warnings);
        for (const auto& w : warnings) log.warning(w);
        auto report = measure_suite(task, selection, options);
        report.metadata["manifest"] = path;
        for (const auto& [key, msg] : report.metadata) {
          if (key.rfind("error.", 0) == 0) {
            log.error("task " + report.task_id + ": " + key.substr(6) + ": " + msg);
          }
        }
        if (report.failed()) ++failures;
        if (const auto v = report.value(measure::iimm); v && *v < 0.0) {
          log.note("task " + report.task_id + ": iimm = " + format_number(*v) +
                   " is negative; it is often described as bounded to [0, 1], but cosine "
                   "similarity admits negative values, so the raw value is reported unclamped");
        }
        log.info("task " + report.task_id + ": " + std::to_string(report.values.size()) +
                 " measure(s) computed");
        reports.push_back(std::move(report));
      } catch (const Error& e) {
        log.error(path + ": " + e.what());
        MeasureReport failed;
        failed.task_id = manifest_task_id(path);
        failed.metadata["manifest"] = path;
        failed.metadata["error.load"] = e.what();
        reports.push_back(std::move(failed));
        ++failures;
        ++load_failures;
      }
    }
    if (load_failures == manifests.size()) return kInputError;

    const auto text = format == "csv" ? measures_to_csv(reports, selection) : measures_to_json(reports);
    write_atomic(out, text);
    return failures > 0 ? kPartialFailure : kSuccess;
  }
};

// Reads both tables and restricts them to one model when asked.
struct TableInputs {
  std::string measures;
  std::string outcomes;
  std::string model;

  void add(CLI::App* sub) {
    sub->add_option("--measures", measures, "Measures CSV (model_id,task,<measures...>)")->required();
    sub->add_option("--outcomes", outcomes,
                    "Outcomes CSV (model_id,train_task,eval_task,zero_shot_acc,finetuned_acc)")
        ->required();
    sub->add_option("--model", model, "Only use rows of this model_id");
  }

  std::pair<std::vector<MeasureReport>, std::vector<GainRecord>> load() const {
    auto reports = read_measures_csv(read_text(measures), measures);
    auto records = read_outcomes_csv(read_text(outcomes), outcomes);
    if (!model.empty()) {
      std::erase_if(reports, [&](const MeasureReport& r) { return r.model_id != model; });
      std::erase_if(records, [&](const OutcomeRecord& r) { return r.model_id != model; });
    }
    return {std::move(reports), build_gain_table(records)};
  }
};

struct CorrelateCmd {
  Common common;
  TableInputs inputs;
  std::string target = "gain_over_zse";
  std::string out;
  std::string format = "csv";
  std::size_t exact_threshold = 9;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("correlate", "Spearman correlation of every measure with a target");
    inputs.add(sub);
    sub->add_option("--target", target, "Correlation target")
        ->check(CLI::IsMember({"gain_over_zse", "accuracy", "avg_ood_delta"}))
        ->capture_default_str();
    sub->add_option("--out", out, "Output file")->required();
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--exact-threshold", exact_threshold,
                    "Largest n that uses exact permutation p-values (max 12)")
        ->check(CLI::Range(0, 12))
        ->capture_default_str();
    add_common(sub, common);
  }

  int run(const Log& log) const {
    const auto [reports, gains] = inputs.load();
    const auto tgt = parse_target(target);
    std::vector<std::string> warnings;
    const auto rows = correlate_all(reports, gains, tgt, exact_threshold, &warnings);
    for (const auto& w : warnings) log.warning(w);
    if (rows.empty()) throw SchemaError(inputs.measures + ": no measure columns");
    bool partial = false;
    for (const auto& row : rows) {
      if (!row.result) {
        log.error("measure " + row.measure + ": " + row.error);
        partial = true;
      }
    }
    write_atomic(out, format == "json" ? correlations_to_json(rows, tgt) : correlations_to_csv(rows));
    return partial ? kPartialFailure : kSuccess;
  }
};

struct FitCmd {
  Common common;
  TableInputs inputs;
  std::string measure = "iimm";
  std::string target = "gain_over_zse";
  double confidence = 0.96;
  std::optional<double> upper_threshold;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("fit", "Fit a linear predictor of the target from one measure");
    inputs.add(sub);
    sub->add_option("--measure", measure, "Measure column used as predictor")->capture_default_str();
    sub->add_option("--target", target, "Regression target")
        ->check(CLI::IsMember({"gain_over_zse", "accuracy", "avg_ood_delta"}))
        ->capture_default_str();
    sub->add_option("--confidence", confidence, "Confidence level of the mean-response band")
        ->check(CLI::Range(0.5, 0.9999))
        ->capture_default_str();
    sub->add_option("--upper-threshold", upper_threshold,
                    "Leave out tasks whose measure exceeds this value");
    sub->add_option("--out", out, "Output fit JSON")->required();
    add_common(sub, common);
  }

  int run(const Log& log) const {
    const auto [reports, gains] = inputs.load();
    const auto tgt = parse_target(target);
    std::vector<std::string> warnings;
    FitOptions options{confidence, upper_threshold};
    const auto fit = fit_transfer_model(reports, gains, measure, tgt, options, &warnings);
    for (const auto& w : warnings) log.warning(w);

    auto points = join_tables(reports, gains, measure, tgt);
    if (upper_threshold) {
      std::erase_if(points, [&](const JoinedPoint& p) { return p.x > *upper_threshold; });
    }
    const auto diag = fit_diagnostics(fit, points);
    for (const auto& r : diag.residuals) {
      log.info("residual " + r.task + ": x=" + format_number(r.x) + " y=" + format_number(r.y) +
               " residual=" + format_number(r.residual));
    }
    if (diag.saturation_suspected) {
      log.warning("task " + diag.max_measure_task +
                  " (largest measure) lies well below the fitted line; gains may saturate above an "
                  "upper threshold, consider --upper-threshold");
    }
    log.info("slope=" + format_number(fit.slope) + " intercept=" + format_number(fit.intercept) +
             " r_squared=" + format_number(fit.r_squared) +
             " slope_p_value=" + format_number(fit.slope_p_value));
    write_atomic(out, fit_to_json(fit));
    return kSuccess;
  }
};

struct PredictCmd {
  Common common;
  MeasureFlags flags;
  std::string fit_path;
  std::vector<std::string> manifests;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("predict", "Predict the fitted target for new tasks");
    sub->add_option("--fit", fit_path, "Fit JSON written by 'fit'")->required();
    sub->add_option("--manifest", manifests, "Task manifest JSON (repeatable)")
        ->required()
        ->expected(1, -1);
    sub->add_option("--out", out, "Output predictions JSON")->required();
    flags.add(sub);
    add_common(sub, common);
  }

  int run(const Log& log) const {
    const auto fit = fit_from_json(read_text(fit_path));
    const auto options = flags.options(common);
    const LoadOptions load{flags.norm_tolerance};
    std::vector<TransferPrediction> predictions;
    std::size_t failures = 0;
    for (const auto& path : manifests) {
      try {
        std::vector<std::string> warnings;
        const auto task = load_task(path, load, &warnings);
        for (const auto& w : warnings) log.warning(w);
        auto p = predict_transfer(fit, task, options);
        for (const auto& note : p.notes) {
          if (note.rfind("extrapolation", 0) == 0) {
            log.warning("task " + p.task + ": " + note);
          } else {
            log.note("task " + p.task + ": " + note);
          }
        }
        predictions.push_back(std::move(p));
      } catch (const Error& e) {
        log.error(path + ": " + e.what());
        ++failures;
      }
    }
    if (failures == manifests.size()) return kInputError;
    write_atomic(out, predictions_to_json(predictions, fit));
    return failures > 0 ? kPartialFailure : kSuccess;
  }
};

struct PlotDataCmd {
  Common common;
  TableInputs inputs;
  std::string fit_path;
  std::string out;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("plot-data", "Scatter points and confidence band of a fit as CSV");
    sub->add_option("--fit", fit_path, "Fit JSON written by 'fit'")->required();
    inputs.add(sub);
    sub->add_option("--out", out, "Output CSV")->required();
    add_common(sub, common);
  }

  int run(const Log& log) const {
    const auto fit = fit_from_json(read_text(fit_path));
    const auto [reports, gains] = inputs.load();
    const auto tgt = parse_target(fit.target.empty() ? "gain_over_zse" : fit.target);
    std::vector<std::string> warnings;
    const auto points = join_tables(reports, gains, fit.measure_name, tgt, &warnings);
    for (const auto& w : warnings) log.warning(w);
    write_atomic(out, plot_data_csv(points, band_rows(fit, 100)));
    return kSuccess;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inter-intra modal measures and fine-tuning gain predictors for dual-encoder embeddings",
               "modalgauge"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  MeasureCmd measure_cmd;
  CorrelateCmd correlate_cmd;
  FitCmd fit_cmd;
  PredictCmd predict_cmd;
  PlotDataCmd plot_cmd;
  measure_cmd.add(app);
  correlate_cmd.add(app);
  fit_cmd.add(app);
  predict_cmd.add(app);
  plot_cmd.add(app);

  std::vector<std::string> argv_storage{"modalgauge"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  Log log{err};
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    log.error(e.what());
    return kInputError;
  }

  const auto dispatch = [&](auto& cmd) {
    log.level = parse_level(cmd.common.log_level);
    return cmd.run(log);
  };
  try {
    if (app.got_subcommand("measure")) return dispatch(measure_cmd);
    if (app.got_subcommand("correlate")) return dispatch(correlate_cmd);
    if (app.got_subcommand("fit")) return dispatch(fit_cmd);
    if (app.got_subcommand("predict")) return dispatch(predict_cmd);
    if (app.got_subcommand("plot-data")) return dispatch(plot_cmd);
  } catch (const Error& e) {
    log.error(e.what());
    return kInputError;
  } catch (const std::exception& e) {
    log.error(std::string("unexpected failure: ") + e.what());
    return kInputError;
  }
  return kInputError;
}

}  // namespace modalgauge::cli
