/*
 * Copyright 2026 The MRD-LiNet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mrdlinet/evaluator.h"

#include <algorithm>
#include <fstream>
#include <limits>

#include "fmt/format.h"
#include "mrdlinet/error.h"
#include "mrdlinet/parallel.h"

namespace mrdlinet {
namespace {

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

double ratio(int64_t num, int64_t den, const char* flag, std::vector<std::string>& flags) {
  if (den == 0) {
    flags.emplace_back(flag);
    return 0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r, const char* flag, std::vector<std::string>& flags) {
  if (p + r == 0) {
    flags.emplace_back(flag);
    return 0;
  }
  return 2 * p * r / (p + r);
}

nlohmann::json class_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

// Maps `values` to a polyline inside the plot rectangle.
std::string polyline(const std::vector<double>& values, double lo, double hi, double x0,
                     double y0, double w, double h, const char* color) {
  std::string points;
  const double span = hi > lo ? hi - lo : 1.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double x = values.size() == 1 ? x0 + w / 2 : x0 + w * i / (values.size() - 1);
    const double y = y0 + h - h * (values[i] - lo) / span;
    points += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", x, y);
  }
  return fmt::format(
      "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color,
      points);
}

}  // namespace

Label threshold_label(double probability) {
  return probability > 0.5 ? Label::kStressed : Label::kHealthy;
}

std::vector<Prediction> predict_labels(const Classifier<float>& model,
                                       std::span<const Sample> samples, int workers,
                                       int batch_size) {
  if (samples.empty()) throw ValidationError("predict_labels: no samples to evaluate");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!model.statistics_initialized()) {
    throw UninitializedStatisticsError("evaluation needs a trained model");
  }
  const size_t n_batches = (samples.size() + batch_size - 1) / batch_size;
  const size_t n_workers = std::clamp<size_t>(workers, 1, n_batches);
  std::vector<std::unique_ptr<Classifier<float>>> clones;
  for (size_t w = 0; w < n_workers; ++w) clones.push_back(model.clone());

  std::vector<Prediction> out(samples.size());
  parallel_for(n_batches, static_cast<int>(n_workers), [&](size_t worker, size_t b) {
    NoGradGuard no_grad;
    const size_t begin = b * batch_size;
    const size_t end = std::min(samples.size(), begin + batch_size);
    std::vector<size_t> indices;
    for (size_t i = begin; i < end; ++i) indices.push_back(i);
    const Tensor<float> x = assemble_batch(samples, indices, nullptr, 0, 0, 1);
    const Tensor<float> p = clones[worker]->forward(x, Mode::kInfer);
    for (size_t k = 0; k < indices.size(); ++k) {
      const double prob = p.data()[k];
      out[indices[k]] = {samples[indices[k]].id, prob, threshold_label(prob)};
    }
  });
  return out;
}

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) {
    throw DimensionError(fmt::format("confusion: {} true labels vs {} predictions",
                                     truth.size(), predicted.size()));
  }
  ConfusionMatrix cm;
  for (size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == Label::kStressed;
    const bool guess = predicted[i] == Label::kStressed;
    if (actual && guess) ++cm.tp;
    else if (actual) ++cm.fn;
    else if (guess) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm, const std::string& scenario) {
  if (cm.tp < 0 || cm.fn < 0 || cm.fp < 0 || cm.tn < 0) {
    throw ValidationError("confusion counts must be non-negative");
  }
  MetricsReport r;
  r.scenario = scenario;
  auto& f = r.flags;
  r.stressed.support = cm.tp + cm.fn;
  r.healthy.support = cm.tn + cm.fp;
  r.stressed.precision = ratio(cm.tp, cm.tp + cm.fp, "stressed_precision_undefined", f);
  r.stressed.recall = ratio(cm.tp, cm.tp + cm.fn, "stressed_recall_undefined", f);
  r.stressed.f1 = harmonic(r.stressed.precision, r.stressed.recall, "stressed_f1_undefined", f);
  r.healthy.precision = ratio(cm.tn, cm.tn + cm.fn, "healthy_precision_undefined", f);
  r.healthy.recall = ratio(cm.tn, cm.tn + cm.fp, "healthy_recall_undefined", f);
  r.healthy.f1 = harmonic(r.healthy.precision, r.healthy.recall, "healthy_f1_undefined", f);
  r.accuracy = ratio(cm.tp + cm.tn, cm.total(), "accuracy_undefined", f);
  return r;
}

nlohmann::json report_json(const MetricsReport& report, const ConfusionMatrix& cm) {
  return {{"scenario", report.scenario},
          {"counts", {{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}}},
          {"metrics",
           {{"stressed", class_json(report.stressed)},
            {"healthy", class_json(report.healthy)},
            {"accuracy", report.accuracy}}},
          {"flags", report.flags}};
}

std::string format_confusion_csv(const ConfusionMatrix& cm) {
  return fmt::format(
      "actual\\predicted,stressed,healthy\n"
      "stressed,{},{}\n"
      "healthy,{},{}\n",
      cm.tp, cm.fn, cm.fp, cm.tn);
}

std::string render_curves_svg(const TrainLog& log) {
  constexpr double kWidth = 640, kHeight = 300, kMargin = 40;
  const double pw = kWidth / 2 - 1.5 * kMargin, ph = kHeight - 2 * kMargin;
  std::vector<double> train_loss, val_loss, train_acc, val_acc;
  for (const auto& row : log.rows) {
    train_loss.push_back(row.train_loss);
    train_acc.push_back(row.train_accuracy);
    if (row.val_loss) val_loss.push_back(*row.val_loss);
    if (row.val_accuracy) val_acc.push_back(*row.val_accuracy);
  }
  double loss_hi = 0;
  for (double v : train_loss) loss_hi = std::max(loss_hi, v);
  for (double v : val_loss) loss_hi = std::max(loss_hi, v);

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  const double lx = kMargin, rx = kWidth / 2 + kMargin / 2;
  for (double x : {lx, rx}) {
    svg += fmt::format(
        "  <rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
        "stroke=\"#888\"/>\n",
        x, kMargin, pw, ph);
  }
  svg += fmt::format("  <text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\">loss</text>\n", lx,
                     kMargin - 10);
  svg += fmt::format("  <text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\">accuracy</text>\n", rx,
                     kMargin - 10);
  svg += polyline(train_loss, 0, loss_hi, lx, kMargin, pw, ph, "#1f77b4");
  if (!val_loss.empty()) svg += polyline(val_loss, 0, loss_hi, lx, kMargin, pw, ph, "#ff7f0e");
  svg += polyline(train_acc, 0, 1, rx, kMargin, pw, ph, "#1f77b4");
  if (!val_acc.empty()) svg += polyline(val_acc, 0, 1, rx, kMargin, pw, ph, "#ff7f0e");
  svg += "</svg>\n";
  return svg;
}

std::string format_metrics_table(const MetricsReport& r) {
  std::string out;
  if (!r.scenario.empty()) out += fmt::format("scenario: {}\n", r.scenario);
  out += fmt::format("{:<10} {:>9} {:>7} {:>7} {:>8}\n", "class", "precision", "recall", "f1",
                     "support");
  for (const auto& [name, m] : {std::pair{"stressed", r.stressed}, std::pair{"healthy", r.healthy}}) {
    out += fmt::format("{:<10} {:>9.2f} {:>7.2f} {:>7.2f} {:>8}\n", name, m.precision, m.recall,
                       m.f1, m.support);
  }
  out += fmt::format("accuracy   {:>9.2f}\n", r.accuracy);
  for (const auto& flag : r.flags) out += fmt::format("flag: {}\n", flag);
  return out;
}

void emit_report(const MetricsReport& report, const ConfusionMatrix& cm,
                 const std::filesystem::path& out_dir, const TrainLog* log) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  write_text(report_json(report, cm).dump(2) + "\n", out_dir / "report.json");
  write_text(format_confusion_csv(cm), out_dir / "confusion.csv");
  if (log && !log->rows.empty()) write_text(render_curves_svg(*log), out_dir / "curves.svg");
}

}  // namespace mrdlinet
