#pragma once

// Text formats exchanged between subcommands: measures CSV/JSON, the
// long-format outcomes CSV, correlation tables, predictions and plot data.
// Numbers are written in shortest round-trip form so that identical
// inputs always produce identical bytes.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modalgauge/measures.hpp"
#include "modalgauge/transfer.hpp"

namespace modalgauge {

std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row
};

/// RFC 4180 style: comma separated, optional double quotes, "" escapes.
/// Every row must have as many fields as the header.
CsvTable parse_csv(std::string_view text, std::string_view source);

// measures
std::string measures_to_json(std::span<const MeasureReport> reports);
/// `model_id,task,<columns...>`; a missing value is an empty cell.
std::string measures_to_csv(std::span<const MeasureReport> reports,
                            std::span<const std::string> columns);
std::vector<MeasureReport> read_measures_csv(std::string_view text, std::string_view source);

// outcomes
inline constexpr std::string_view kOutcomesHeader =
    "model_id,train_task,eval_task,zero_shot_acc,finetuned_acc";
std::string outcomes_to_csv(std::span<const OutcomeRecord> records);
std::vector<OutcomeRecord> read_outcomes_csv(std::string_view text, std::string_view source);

// results
std::string correlations_to_csv(std::span<const CorrelationRow> rows);
std::string correlations_to_json(std::span<const CorrelationRow> rows, Target target);
std::string predictions_to_json(std::span<const TransferPrediction> predictions,
                                const RegressionFit& fit);

/// Two CSV sections separated by a blank line: scatter rows `task,x,y`,
/// then band rows `x,y_hat,lower,upper`.
std::string plot_data_csv(std::span<const JoinedPoint> scatter, std::span<const BandRow> band);

}  // namespace modalgauge
