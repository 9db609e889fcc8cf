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

#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mrdlinet/error.h"
#include "mrdlinet/evaluator.h"
#include "mrdlinet/synth.h"
#include "testing/oracles.h"
#include "testing/temp_dir.h"

namespace mrdlinet {
namespace {

// Exact fraction; rounds half up to two decimals in integer arithmetic.
struct Fraction {
  int64_t num, den;
  int64_t hundredths() const { return (200 * num + den) / (2 * den); }
  double value() const { return double(num) / double(den); }
};

int64_t hundredths(double v) { return std::llround(v * 100); }

TEST(Metrics, FieldCountsRoundToTheReferenceRow) {
  const ConfusionMatrix cm{635, 99, 15, 386};
  const MetricsReport r = metrics(cm, "aug+mu");
  const Fraction accuracy{635 + 386, 1135}, precision{635, 650}, recall{635, 734},
      healthy_recall{386, 401}, healthy_precision{386, 485};
  EXPECT_EQ(accuracy.hundredths(), 90);
  EXPECT_EQ(precision.hundredths(), 98);
  EXPECT_EQ(recall.hundredths(), 87);
  EXPECT_EQ(healthy_recall.hundredths(), 96);
  EXPECT_EQ(hundredths(r.accuracy), accuracy.hundredths());
  EXPECT_EQ(hundredths(r.stressed.precision), precision.hundredths());
  EXPECT_EQ(hundredths(r.stressed.recall), recall.hundredths());
  EXPECT_EQ(hundredths(r.healthy.recall), healthy_recall.hundredths());
  EXPECT_DOUBLE_EQ(r.accuracy, accuracy.value());
  EXPECT_DOUBLE_EQ(r.stressed.precision, precision.value());
  EXPECT_DOUBLE_EQ(r.stressed.recall, recall.value());
  EXPECT_DOUBLE_EQ(r.healthy.precision, healthy_precision.value());
  EXPECT_DOUBLE_EQ(r.healthy.recall, healthy_recall.value());
  EXPECT_DOUBLE_EQ(r.stressed.f1, 2.0 * 635 / (2 * 635 + 99 + 15));
  EXPECT_EQ(r.stressed.support, 734);
  EXPECT_EQ(r.healthy.support, 401);
  EXPECT_TRUE(r.flags.empty());
  EXPECT_EQ(r.scenario, "aug+mu");
}

TEST(Metrics, PerfectClassifier) {
  const MetricsReport r = metrics({5, 0, 0, 7});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.stressed.f1, 1.0);
  EXPECT_EQ(r.healthy.f1, 1.0);
}

TEST(Metrics, ZeroDenominatorsAreFlagged) {
  const MetricsReport r = metrics({0, 4, 0, 6});
  EXPECT_EQ(r.stressed.precision, 0.0);
  EXPECT_EQ(r.stressed.f1, 0.0);
  EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "stressed_precision_undefined"),
            r.flags.end());
  const MetricsReport empty = metrics({});
  EXPECT_NE(std::find(empty.flags.begin(), empty.flags.end(), "accuracy_undefined"),
            empty.flags.end());
  EXPECT_EQ(empty.accuracy, 0.0);
}

// Accuracy equals the support-weighted mean recall; F1 lies between the
// smaller and larger of precision and recall.
TEST(Metrics, RandomMatricesSatisfyIdentities) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const ConfusionMatrix cm{int64_t(gen() % 50) + 1, int64_t(gen() % 50),
                             int64_t(gen() % 50), int64_t(gen() % 50) + 1};
    const MetricsReport r = metrics(cm);
    const double weighted = (r.stressed.recall * r.stressed.support +
                             r.healthy.recall * r.healthy.support) /
                            cm.total();
    EXPECT_NEAR(r.accuracy, weighted, 1e-12);
    for (const ClassMetrics& m : {r.stressed, r.healthy}) {
      if (m.precision + m.recall == 0) continue;
      EXPECT_GE(m.f1, std::min(m.precision, m.recall) - 1e-12);
      EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-12);
    }
  }
}

TEST(Confusion, CountsAndLengthCheck) {
  using L = Label;
  const std::vector<L> truth = {L::kStressed, L::kStressed, L::kHealthy, L::kHealthy,
                                L::kStressed};
  const std::vector<L> pred = {L::kStressed, L::kHealthy, L::kStressed, L::kHealthy,
                               L::kStressed};
  EXPECT_EQ(confusion(truth, pred), (ConfusionMatrix{2, 1, 1, 1}));
  EXPECT_THROW(confusion(truth, std::span<const L>(pred).first(4)), DimensionError);
}

TEST(Threshold, HalfIsHealthy) {
  EXPECT_EQ(threshold_label(0.5), Label::kHealthy);
  EXPECT_EQ(threshold_label(std::nextafter(0.5, 1.0)), Label::kStressed);
  EXPECT_EQ(threshold_label(0.0), Label::kHealthy);
}

class ConstantStub final : public Classifier<float> {
 public:
  explicit ConstantStub(float p) : p_(p) {}
  Tensor<float> forward(const Tensor<float>& input, Mode) override {
    return Tensor<float>::full({input.dim(0), 1}, p_);
  }
  ParameterStore<float>& parameters() override { return params_; }
  const ParameterStore<float>& parameters() const override { return params_; }
  bool statistics_initialized() const override { return true; }
  std::unique_ptr<Classifier<float>> clone() const override {
    return std::make_unique<ConstantStub>(p_);
  }

 private:
  float p_;
  ParameterStore<float> params_;
};

std::vector<Sample> samples(int n) {
  SynthConfig c;
  c.n_train = n;
  c.image_size = 16;
  return synth_samples(c, Split::kTrain);
}

TEST(Predict, ConstantModelCallsEverythingStressed) {
  const auto s = samples(10);
  const auto preds = predict_labels(ConstantStub(0.9f), s, 2, 3);
  ASSERT_EQ(preds.size(), 10u);
  std::vector<Label> truth, predicted;
  for (size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(preds[i].sample_id, s[i].id);
    EXPECT_NEAR(preds[i].probability, 0.9, 1e-7);
    truth.push_back(s[i].label);
    predicted.push_back(preds[i].label);
  }
  const ConfusionMatrix cm = confusion(truth, predicted);
  EXPECT_EQ(cm.tp, 5);
  EXPECT_EQ(cm.fp, 5);
  EXPECT_EQ(cm.fn + cm.tn, 0);
  EXPECT_THROW(predict_labels(ConstantStub(0.9f), {}), ValidationError);
}

TEST(Predict, BatchingAndWorkersDoNotChangeResults) {
  const auto s = samples(23);
  Model<float> model(testing::tiny_architecture(), 1);
  EXPECT_THROW(predict_labels(model, s), UninitializedStatisticsError);
  std::vector<size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  model.forward(assemble_batch(s, idx, nullptr, 0, 0, 1), Mode::kTrain);
  const auto base = predict_labels(model, s, 1, 32);
  for (auto [workers, batch] : {std::pair{1, 1}, {3, 5}, {2, 7}}) {
    const auto other = predict_labels(model, s, workers, batch);
    for (size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(other[i].probability, base[i].probability) << workers << "/" << batch;
    }
  }
}

TEST(Report, JsonAndCsvLayout) {
  const ConfusionMatrix cm{635, 99, 15, 386};
  const MetricsReport r = metrics(cm, "aug");
  const nlohmann::json j = report_json(r, cm);
  EXPECT_EQ(j["counts"]["tp"], 635);
  EXPECT_EQ(j["counts"]["tn"], 386);
  EXPECT_EQ(j["scenario"], "aug");
  EXPECT_DOUBLE_EQ(j["metrics"]["accuracy"].get<double>(), r.accuracy);
  EXPECT_EQ(report_json(r, cm).dump(), j.dump());
  EXPECT_EQ(format_confusion_csv(cm),
            "actual\\predicted,stressed,healthy\nstressed,635,99\nhealthy,15,386\n");
  const std::string table = format_metrics_table(r);
  EXPECT_NE(table.find("0.90"), std::string::npos) << table;
  EXPECT_NE(table.find("0.98"), std::string::npos) << table;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Report, EmitWritesFilesReproducibly) {
  testing::TempDir a("report-a"), b("report-b");
  const ConfusionMatrix cm{3, 1, 2, 4};
  TrainLog log;
  log.rows.push_back({1, 0.7, 0.5, 0.6, 0.55, 1e-3, 5});
  log.rows.push_back({2, 0.4, 0.8, std::nullopt, std::nullopt, 9e-4, 5});
  emit_report(metrics(cm, "x"), cm, a.path(), &log);
  emit_report(metrics(cm, "x"), cm, b.path(), &log);
  for (const char* f : {"report.json", "confusion.csv", "curves.svg"}) {
    ASSERT_TRUE(std::filesystem::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(nlohmann::json::parse(slurp(a / "report.json")), report_json(metrics(cm, "x"), cm));
  EXPECT_EQ(slurp(a / "curves.svg").rfind("<svg", 0), 0u);
  EXPECT_THROW(emit_report(metrics(cm), cm, a / "report.json" / "sub"), IoError);
}

}  // namespace
}  // namespace mrdlinet
