#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modalgauge/measures.hpp"
#include "modalgauge/stats.hpp"

namespace modalgauge {

/// Accuracy of a model fine-tuned on `train_task`, evaluated on
/// `eval_task`, before (zero-shot) and after fine-tuning.
struct OutcomeRecord {
  std::string model_id;
  std::string train_task;
  std::string eval_task;
  double zero_shot_acc = 0.0;
  double finetuned_acc = 0.0;

  bool in_domain() const noexcept { return train_task == eval_task; }
};

struct GainRecord {
  std::string model_id;
  std::string task;
  double zero_shot_acc = 0.0;  // in-domain
  double finetuned_acc = 0.0;  // in-domain
  double gain_over_zse = 0.0;
  std::optional<double> avg_ood_delta;  // signed; negative = forgetting
  std::size_t n_ood = 0;
};

/// (ft − zs) / (1 − zs).
double gain_over_zero_shot_error(double zero_shot, double finetuned);

/// One GainRecord per (model, train task), sorted by (model, task).
std::vector<GainRecord> build_gain_table(std::span<const OutcomeRecord> records);

enum class Target { gain_over_zse, accuracy, avg_ood_delta };

Target parse_target(std::string_view text);
std::string_view to_string(Target target) noexcept;

/// A task present in both tables, with the chosen measure and target.
struct JoinedPoint {
  std::string model_id;
  std::string task;
  double x = 0.0;
  double y = 0.0;
};

/// Inner join on (model, task). Unmatched rows, failed measures and
/// missing targets become warnings.
std::vector<JoinedPoint> join_tables(std::span<const MeasureReport> measures,
                                     std::span<const GainRecord> gains,
                                     std::string_view measure_name, Target target,
                                     std::vector<std::string>* warnings = nullptr);

struct FitOptions {
  double confidence_level = 0.96;
  /// Tasks whose measure exceeds this are left out of the fit.
  std::optional<double> upper_threshold;
};

RegressionFit fit_transfer_model(std::span<const MeasureReport> measures,
                                 std::span<const GainRecord> gains, std::string_view measure_name,
                                 Target target, const FitOptions& options = {},
                                 std::vector<std::string>* warnings = nullptr);

struct ResidualRow {
  std::string task;
  double x = 0.0;
  double y = 0.0;
  double residual = 0.0;
};

struct FitDiagnostics {
  std::vector<ResidualRow> residuals;
  /// Largest-measure task sits more than two residual SDs below the line,
  /// the signature of gains saturating above an upper threshold.
  bool saturation_suspected = false;
  std::string max_measure_task;
};

FitDiagnostics fit_diagnostics(const RegressionFit& fit, std::span<const JoinedPoint> points);

struct TransferPrediction {
  std::string task;
  double measure_value = 0.0;
  double predicted_gain = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool extrapolation = false;
  std::vector<std::string> notes;
};

/// Applies the fit to an already computed measure value.
TransferPrediction predict_from_value(const RegressionFit& fit, std::string task, double value);

/// Computes fit.measure_name on the task, then predicts with a band.
TransferPrediction predict_transfer(const RegressionFit& fit, const TaskEmbeddings& t,
                                    const MeasureOptions& options = {});

struct CorrelationRow {
  std::string measure;
  std::size_t n = 0;
  std::optional<CorrelationResult> result;
  std::string error;  // set when result is empty
};

/// Spearman of every measure column against the target; a degenerate
/// column yields a row with an error instead of aborting the table.
std::vector<CorrelationRow> correlate_all(std::span<const MeasureReport> measures,
                                          std::span<const GainRecord> gains, Target target,
                                          std::size_t exact_threshold = 9,
                                          std::vector<std::string>* warnings = nullptr);

struct BandRow {
  double x = 0.0;
  double y_hat = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// `samples` evenly spaced band rows across [x_min, x_max].
std::vector<BandRow> band_rows(const RegressionFit& fit, std::size_t samples = 100);

}  // namespace modalgauge
