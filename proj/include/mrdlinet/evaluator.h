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

#ifndef MRDLINET_EVALUATOR_H_
#define MRDLINET_EVALUATOR_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrdlinet/classifier.h"
#include "mrdlinet/dataset.h"
#include "mrdlinet/trainer.h"

namespace mrdlinet {

// Stressed iff p > 0.5; an exact 0.5 is healthy.
Label threshold_label(double probability);

struct Prediction {
  std::string sample_id;
  double probability = 0;
  Label label = Label::kHealthy;
};

// Inference-mode predictions on rescale-only inputs, in sample order.
// Batch size and worker count do not change the result.
std::vector<Prediction> predict_labels(const Classifier<float>& model,
                                       std::span<const Sample> samples, int workers = 1,
                                       int batch_size = 32);

// Stressed is the positive class.
struct ConfusionMatrix {
  int64_t tp = 0;  // stressed predicted stressed
  int64_t fn = 0;  // stressed predicted healthy
  int64_t fp = 0;  // healthy predicted stressed
  int64_t tn = 0;  // healthy predicted healthy

  int64_t total() const { return tp + fn + fp + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted);

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  int64_t support = 0;
};

struct MetricsReport {
  std::string scenario;
  ClassMetrics stressed;
  ClassMetrics healthy;
  double accuracy = 0;
  // Names of metrics whose denominator was zero; those metrics read 0.
  std::vector<std::string> flags;
};

MetricsReport metrics(const ConfusionMatrix& cm, const std::string& scenario = "");

// {scenario, counts{tp,fn,fp,tn}, metrics{stressed, healthy, accuracy}, flags}
// with sorted keys.
nlohmann::json report_json(const MetricsReport& report, const ConfusionMatrix& cm);

// 2x2 table: rows are the true class, columns the predicted class.
std::string format_confusion_csv(const ConfusionMatrix& cm);

// Loss and accuracy curves per epoch as a standalone SVG document.
std::string render_curves_svg(const TrainLog& log);

// Two-decimal console summary.
std::string format_metrics_table(const MetricsReport& report);

// Writes report.json and confusion.csv into out_dir, plus curves.svg when a
// non-empty log is given. I/O failures name the offending path.
void emit_report(const MetricsReport& report, const ConfusionMatrix& cm,
                 const std::filesystem::path& out_dir, const TrainLog* log = nullptr);

}  // namespace mrdlinet

#endif  // MRDLINET_EVALUATOR_H_
