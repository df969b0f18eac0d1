#include "modalgauge/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "modalgauge/errors.hpp"

namespace modalgauge {

double gain_over_zero_shot_error(double zero_shot, double finetuned) {
  if (!(zero_shot >= 0.0 && zero_shot <= 1.0)) {
    throw RangeError("zero-shot accuracy outside [0, 1]: " + std::to_string(zero_shot));
  }
  if (!(finetuned >= 0.0 && finetuned <= 1.0)) {
    throw RangeError("fine-tuned accuracy outside [0, 1]: " + std::to_string(finetuned));
  }
  if (zero_shot == 1.0) {
    throw PerfectZeroShotError("zero-shot accuracy is 1, zero-shot error is 0");
  }
  return (finetuned - zero_shot) / (1.0 - zero_shot);
}

std::vector<GainRecord> build_gain_table(std::span<const OutcomeRecord> records) {
  using Key = std::pair<std::string, std::string>;  // (model, train task)
  struct Acc {
    const OutcomeRecord* in_domain = nullptr;
    std::map<std::string, double> ood_by_eval;
  };
  std::map<Key, Acc> groups;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& r : records) {
    if (!seen.emplace(r.model_id, r.train_task, r.eval_task).second) {
      throw DuplicateRecordError("duplicate outcome for model '" + r.model_id + "', train '" +
                                 r.train_task + "', eval '" + r.eval_task + "'");
    }
    if (!(r.zero_shot_acc >= 0.0 && r.zero_shot_acc <= 1.0) ||
        !(r.finetuned_acc >= 0.0 && r.finetuned_acc <= 1.0)) {
      throw RangeError("accuracy outside [0, 1] for train '" + r.train_task + "', eval '" +
                       r.eval_task + "'");
    }
    auto& g = groups[{r.model_id, r.train_task}];
    if (r.in_domain()) {
      g.in_domain = &r;
    } else {
      g.ood_by_eval[r.eval_task] = r.finetuned_acc - r.zero_shot_acc;
    }
  }

  std::vector<GainRecord> out;
  out.reserve(groups.size());
  for (const auto& [key, g] : groups) {
    if (!g.in_domain) {
      throw MissingRecordError("no in-domain outcome for model '" + key.first + "', task '" +
                               key.second + "'");
    }
    GainRecord rec;
    rec.model_id = key.first;
    rec.task = key.second;
    rec.zero_shot_acc = g.in_domain->zero_shot_acc;
    rec.finetuned_acc = g.in_domain->finetuned_acc;
    rec.gain_over_zse = gain_over_zero_shot_error(rec.zero_shot_acc, rec.finetuned_acc);
    rec.n_ood = g.ood_by_eval.size();
    if (rec.n_ood > 0) {
      // Summed in eval-task order, so record order cannot change the value.
      double sum = 0.0;
      for (const auto& [eval, delta] : g.ood_by_eval) sum += delta;
      rec.avg_ood_delta = sum / double(rec.n_ood);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Target parse_target(std::string_view text) {
  if (text == "gain_over_zse") return Target::gain_over_zse;
  if (text == "accuracy") return Target::accuracy;
  if (text == "avg_ood_delta") return Target::avg_ood_delta;
  throw ParameterError("unknown target '" + std::string(text) +
                       "' (expected gain_over_zse, accuracy or avg_ood_delta)");
}

std::string_view to_string(Target target) noexcept {
  switch (target) {
    case Target::gain_over_zse: return "gain_over_zse";
    case Target::accuracy: return "accuracy";
    case Target::avg_ood_delta: return "avg_ood_delta";
  }
  return "?";
}

namespace {

std::optional<double> target_value(const GainRecord& g, Target target) {
  switch (target) {
    case Target::gain_over_zse: return g.gain_over_zse;
    case Target::accuracy: return g.finetuned_acc;
    case Target::avg_ood_delta: return g.avg_ood_delta;
  }
  return std::nullopt;
}

void warn(std::vector<std::string>* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

std::string task_label(const std::string& model, const std::string& task) {
  return model.empty() ? task : model + "/" + task;
}

}  // namespace

std::vector<JoinedPoint> join_tables(std::span<const MeasureReport> measures,
                                     std::span<const GainRecord> gains,
                                     std::string_view measure_name, Target target,
                                     std::vector<std::string>* warnings) {
  std::map<std::pair<std::string, std::string>, const GainRecord*> by_task;
  for (const auto& g : gains) by_task[{g.model_id, g.task}] = &g;

  std::vector<JoinedPoint> points;
  std::set<std::pair<std::string, std::string>> matched;
  for (const auto& report : measures) {
    const auto key = std::make_pair(report.model_id, report.task_id);
    const auto it = by_task.find(key);
    if (it == by_task.end()) {
      warn(warnings, "task " + task_label(key.first, key.second) + " has measures but no outcomes");
      continue;
    }
    matched.insert(key);
    const auto x = report.value(measure_name);
    if (!x) {
      warn(warnings, "task " + task_label(key.first, key.second) + " has no value for measure '" +
                         std::string(measure_name) + "'");
      continue;
    }
    const auto y = target_value(*it->second, target);
    if (!y) {
      warn(warnings, "task " + task_label(key.first, key.second) + " has no " +
                         std::string(to_string(target)) + " (no out-of-domain records)");
      continue;
    }
    points.push_back({key.first, key.second, *x, *y});
  }
  for (const auto& [key, g] : by_task) {
    if (!matched.count(key)) {
      warn(warnings, "task " + task_label(key.first, key.second) + " has outcomes but no measures");
    }
  }
  return points;
}

RegressionFit fit_transfer_model(std::span<const MeasureReport> measures,
                                 std::span<const GainRecord> gains, std::string_view measure_name,
                                 Target target, const FitOptions& options,
                                 std::vector<std::string>* warnings) {
  auto points = join_tables(measures, gains, measure_name, target, warnings);
  if (options.upper_threshold) {
    const double limit = *options.upper_threshold;
    std::erase_if(points, [&](const JoinedPoint& p) {
      if (p.x <= limit) return false;
      warn(warnings, "task " + task_label(p.model_id, p.task) + " excluded: measure " +
                         std::to_string(p.x) + " above upper threshold " + std::to_string(limit));
      return true;
    });
  }
  if (points.size() < 3) {
    throw InsufficientDataError("fit needs at least 3 tasks present in both tables, got " +
                                std::to_string(points.size()));
  }
  std::vector<double> x, y;
  for (const auto& p : points) {
    x.push_back(p.x);
    y.push_back(p.y);
  }
  auto fit = ols_fit(x, y, options.confidence_level);
  fit.measure_name = std::string(measure_name);
  fit.target = std::string(to_string(target));
  return fit;
}

FitDiagnostics fit_diagnostics(const RegressionFit& fit, std::span<const JoinedPoint> points) {
  FitDiagnostics diag;
  const JoinedPoint* top = nullptr;
  for (const auto& p : points) {
    diag.residuals.push_back({p.task, p.x, p.y, p.y - (fit.intercept + fit.slope * p.x)});
    if (!top || p.x > top->x) top = &p;
  }
  if (top) {
    diag.max_measure_task = top->task;
    const double resid = top->y - (fit.intercept + fit.slope * top->x);
    const double sd = std::sqrt(fit.residual_variance);
    diag.saturation_suspected = sd > 0.0 && resid < -2.0 * sd;
  }
  return diag;
}

TransferPrediction predict_from_value(const RegressionFit& fit, std::string task, double value) {
  const auto band = predict_with_band(fit, value);
  TransferPrediction p;
  p.task = std::move(task);
  p.measure_value = value;
  p.predicted_gain = band.y_hat;
  p.lower = band.lower;
  p.upper = band.upper;
  p.extrapolation = band.extrapolation;
  if (p.extrapolation) {
    std::ostringstream os;
    os.precision(6);
    os << "extrapolation: " << fit.measure_name << "=" << value << " lies outside the fitted range ["
       << fit.x_min << ", " << fit.x_max << "]";
    p.notes.push_back(os.str());
  }
  if (fit.measure_name == measure::iimm) {
    if (value < 0.0) {
      p.notes.push_back(
          "iimm is negative; it is usually described as lying in [0, 1], but cosine similarity "
          "admits negative values and the raw value is reported unclamped");
    } else if (value >= 0.9) {
      p.notes.push_back(
          "iimm near 1: image and text embeddings are densely clustered; expect substantial "
          "gains from fine-tuning");
    } else if (value <= 0.1) {
      p.notes.push_back(
          "iimm near 0: embeddings are spread uniformly on the hypersphere; expect little gain "
          "from fine-tuning");
    }
  }
  return p;
}

TransferPrediction predict_transfer(const RegressionFit& fit, const TaskEmbeddings& t,
                                    const MeasureOptions& options) {
  const std::vector<std::string> selection{fit.measure_name};
  const auto report = measure_suite(t, selection, options);
  const auto value = report.value(fit.measure_name);
  if (!value) {
    const auto it = report.metadata.find("error." + fit.measure_name);
    throw DegenerateGeometryError(t.task_id() + ": cannot compute " + fit.measure_name +
                                  (it != report.metadata.end() ? ": " + it->second : ""));
  }
  return predict_from_value(fit, t.task_id(), *value);
}

std::vector<CorrelationRow> correlate_all(std::span<const MeasureReport> measures,
                                          std::span<const GainRecord> gains, Target target,
                                          std::size_t exact_threshold,
                                          std::vector<std::string>* warnings) {
  // Measure columns in first-seen order.
  std::vector<std::string> names;
  for (const auto& r : measures) {
    for (const auto& [name, v] : r.values) {
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    }
  }
  std::vector<CorrelationRow> rows;
  bool first = true;
  for (const auto& name : names) {
    // Join warnings are identical across columns apart from missing values.
    std::vector<std::string> local;
    const auto points = join_tables(measures, gains, name, target, &local);
    if (warnings) {
      for (auto& w : local) {
        if (first || w.find("no value for measure") != std::string::npos) warnings->push_back(w);
      }
    }
    first = false;
    CorrelationRow row;
    row.measure = name;
    row.n = points.size();
    std::vector<double> x, y;
    for (const auto& p : points) {
      x.push_back(p.x);
      y.push_back(p.y);
    }
    try {
      row.result = spearman(x, y, exact_threshold);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<BandRow> band_rows(const RegressionFit& fit, std::size_t samples) {
  std::vector<BandRow> rows;
  rows.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double frac = samples > 1 ? double(i) / double(samples - 1) : 0.0;
    const double x = i + 1 == samples ? fit.x_max : fit.x_min + frac * (fit.x_max - fit.x_min);
    const auto b = predict_with_band(fit, x);
    rows.push_back({x, b.y_hat, b.lower, b.upper});
  }
  return rows;
}

}  // namespace modalgauge
