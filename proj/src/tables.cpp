#include "modalgauge/tables.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>
#include <map>

#include "modalgauge/errors.hpp"

namespace modalgauge {

using ojson = nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string schema_at(std::string_view source, std::size_t line, std::string_view column,
                      std::string_view problem) {
  return std::string(source) + ": row " + std::to_string(line) + ", column '" +
         std::string(column) + "': " + std::string(problem);
}

double parse_number(std::string_view cell, std::string_view source, std::size_t line,
                    std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw SchemaError(schema_at(source, line, column, "'" + std::string(cell) + "' is not a finite number"));
  }
  return v;
}

}  // namespace

CsvTable parse_csv(std::string_view text, std::string_view source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> lines;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;  // current record has content
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_record = [&] {
    if (any || !field.empty() || !record.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
      lines.push_back(record_line);
    }
    record.clear();
    field.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      end_record();
      ++line;
      record_line = line;
    } else {
      if (!any && field.empty()) record_line = line;
      field += c;
      any = true;
    }
  }
  if (quoted) throw SchemaError(std::string(source) + ": unterminated quoted field");
  end_record();

  if (records.empty()) throw SchemaError(std::string(source) + ": empty CSV, header expected");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw SchemaError(std::string(source) + ": row " + std::to_string(lines[r]) + " has " +
                        std::to_string(records[r].size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
    table.lines.push_back(lines[r]);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Measures

std::string measures_to_json(std::span<const MeasureReport> reports) {
  ojson tasks = ojson::array();
  for (const auto& r : reports) {
    ojson values = ojson::object();
    for (const auto& [name, v] : r.values) values[name] = v;
    ojson meta = ojson::object();
    for (const auto& [key, v] : r.metadata) meta[key] = v;
    tasks.push_back({{"task_id", r.task_id}, {"model_id", r.model_id}, {"values", values},
                     {"metadata", meta}});
  }
  ojson root;
  root["tasks"] = tasks;
  return root.dump(2) + "\n";
}

std::string measures_to_csv(std::span<const MeasureReport> reports,
                            std::span<const std::string> columns) {
  std::string out = "model_id,task";
  for (const auto& c : columns) out += "," + csv_field(c);
  out += "\n";
  for (const auto& r : reports) {
    out += csv_field(r.model_id) + "," + csv_field(r.task_id);
    for (const auto& c : columns) {
      out += ",";
      if (const auto v = r.value(c)) out += format_number(*v);
    }
    out += "\n";
  }
  return out;
}

std::vector<MeasureReport> read_measures_csv(std::string_view text, std::string_view source) {
  const auto table = parse_csv(text, source);
  if (table.header.size() < 2 || table.header[0] != "model_id" || table.header[1] != "task") {
    throw SchemaError(std::string(source) + ": header must start with 'model_id,task'");
  }
  std::vector<MeasureReport> reports;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    MeasureReport report;
    report.model_id = row[0];
    report.task_id = row[1];
    if (report.task_id.empty()) {
      throw SchemaError(schema_at(source, table.lines[r], "task", "empty task id"));
    }
    if (!seen.emplace(std::make_pair(report.model_id, report.task_id), r).second) {
      throw SchemaError(schema_at(source, table.lines[r], "task",
                                  "duplicate task '" + report.task_id + "'"));
    }
    for (std::size_t c = 2; c < row.size(); ++c) {
      if (row[c].empty()) continue;  // measure not available for this task
      report.values.emplace_back(table.header[c],
                                 parse_number(row[c], source, table.lines[r], table.header[c]));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Outcomes

std::string outcomes_to_csv(std::span<const OutcomeRecord> records) {
  std::string out = std::string(kOutcomesHeader) + "\n";
  for (const auto& r : records) {
    out += csv_field(r.model_id) + "," + csv_field(r.train_task) + "," + csv_field(r.eval_task) +
           "," + format_number(r.zero_shot_acc) + "," + format_number(r.finetuned_acc) + "\n";
  }
  return out;
}

std::vector<OutcomeRecord> read_outcomes_csv(std::string_view text, std::string_view source) {
  const auto table = parse_csv(text, source);
  static const std::vector<std::string> expected = {"model_id", "train_task", "eval_task",
                                                    "zero_shot_acc", "finetuned_acc"};
  if (table.header != expected) {
    throw SchemaError(std::string(source) + ": header must be '" + std::string(kOutcomesHeader) + "'");
  }
  std::vector<OutcomeRecord> records;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.lines[r];
    OutcomeRecord rec;
    rec.model_id = row[0];
    rec.train_task = row[1];
    rec.eval_task = row[2];
    if (rec.train_task.empty()) throw SchemaError(schema_at(source, line, "train_task", "empty"));
    if (rec.eval_task.empty()) throw SchemaError(schema_at(source, line, "eval_task", "empty"));
    rec.zero_shot_acc = parse_number(row[3], source, line, "zero_shot_acc");
    rec.finetuned_acc = parse_number(row[4], source, line, "finetuned_acc");
    if (rec.zero_shot_acc < 0.0 || rec.zero_shot_acc > 1.0) {
      throw SchemaError(schema_at(source, line, "zero_shot_acc", "accuracy outside [0, 1]"));
    }
    if (rec.finetuned_acc < 0.0 || rec.finetuned_acc > 1.0) {
      throw SchemaError(schema_at(source, line, "finetuned_acc", "accuracy outside [0, 1]"));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Results

std::string correlations_to_csv(std::span<const CorrelationRow> rows) {
  std::string out = "measure,n,rho,p_value,method,error\n";
  for (const auto& row : rows) {
    out += csv_field(row.measure) + "," + std::to_string(row.n) + ",";
    if (row.result) {
      out += format_number(row.result->rho) + "," + format_number(row.result->p_value) + "," +
             std::string(to_string(row.result->method)) + ",";
    } else {
      out += ",,," + csv_field(row.error);
    }
    out += "\n";
  }
  return out;
}

std::string correlations_to_json(std::span<const CorrelationRow> rows, Target target) {
  ojson list = ojson::array();
  for (const auto& row : rows) {
    ojson j = {{"measure", row.measure}, {"n", row.n}};
    if (row.result) {
      j["rho"] = row.result->rho;
      j["p_value"] = row.result->p_value;
      j["method"] = std::string(to_string(row.result->method));
    } else {
      j["error"] = row.error;
    }
    list.push_back(std::move(j));
  }
  ojson root;
  root["target"] = std::string(to_string(target));
  root["correlations"] = std::move(list);
  return root.dump(2) + "\n";
}

std::string predictions_to_json(std::span<const TransferPrediction> predictions,
                                const RegressionFit& fit) {
  ojson list = ojson::array();
  for (const auto& p : predictions) {
    list.push_back({{"task", p.task},
                    {"measure_value", p.measure_value},
                    {"predicted_gain", p.predicted_gain},
                    {"lower", p.lower},
                    {"upper", p.upper},
                    {"extrapolation", p.extrapolation},
                    {"notes", p.notes}});
  }
  ojson root;
  root["measure_name"] = fit.measure_name;
  root["target"] = fit.target;
  root["confidence_level"] = fit.confidence_level;
  root["predictions"] = std::move(list);
  return root.dump(2) + "\n";
}

std::string plot_data_csv(std::span<const JoinedPoint> scatter, std::span<const BandRow> band) {
  std::string out = "task,x,y\n";
  for (const auto& p : scatter) {
    out += csv_field(p.task) + "," + format_number(p.x) + "," + format_number(p.y) + "\n";
  }
  out += "\nx,y_hat,lower,upper\n";
  for (const auto& b : band) {
    out += format_number(b.x) + "," + format_number(b.y_hat) + "," + format_number(b.lower) + "," +
           format_number(b.upper) + "\n";
  }
  return out;
}

}  // namespace modalgauge
