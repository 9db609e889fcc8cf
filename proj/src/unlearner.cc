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

#include "mrdlinet/unlearner.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fmt/format.h"
#include "mrdlinet/error.h"
#include "mrdlinet/loss.h"
#include "mrdlinet/parallel.h"
#include "openssl/evp.h"

namespace mrdlinet {
namespace {

template <typename T>
Tensor<T> sample_input(const Sample& sample) {
  const std::vector<float> pixels = rescale_image(sample.patch);
  return Tensor<T>({1, sample.patch.height, sample.patch.width, Image::kChannels},
                   std::vector<T>(pixels.begin(), pixels.end()));
}

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} {}", what, path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << bytes;
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

}  // namespace

std::string_view grad_target_name(GradTarget target) {
  return target == GradTarget::kParameters ? "parameters" : "input";
}

GradTarget parse_grad_target(std::string_view name) {
  if (name == "parameters") return GradTarget::kParameters;
  if (name == "input") return GradTarget::kInput;
  throw ConfigError(fmt::format("grad target must be 'parameters' or 'input', got '{}'", name));
}

template <typename T>
std::vector<T> sample_gradient(Classifier<T>& model, const Tensor<T>& input, Label label,
                               GradTarget target) {
  if (!model.statistics_initialized()) {
    throw UninitializedStatisticsError(
        "influence scoring needs a fitted model (batch-norm statistics are empty)");
  }
  if (input.rank() < 1 || input.dim(0) != 1) {
    throw DimensionError("sample_gradient expects a batch of one, got " +
                         shape_string(input.shape()));
  }
  ParameterStore<T>& params = model.parameters();
  params.zero_grad();
  Tensor<T> x = input.clone();
  x.set_requires_grad(target == GradTarget::kInput);

  const Tensor<T> prediction = model.forward(x, Mode::kInfer);
  const Tensor<T> y({1, 1}, {static_cast<T>(label)});
  bce_loss(prediction, y).backward();

  std::vector<T> flat;
  if (target == GradTarget::kInput) {
    flat.assign(x.grad().begin(), x.grad().end());
    if (flat.empty()) flat.assign(x.numel(), T(0));
  } else {
    flat.reserve(params.trainable_count());
    for (const auto& p : params.entries()) {
      if (!p.trainable) continue;
      if (p.tensor.has_grad()) {
        flat.insert(flat.end(), p.tensor.grad().begin(), p.tensor.grad().end());
      } else {
        flat.insert(flat.end(), p.tensor.numel(), T(0));
      }
    }
  }
  params.zero_grad();
  if (!std::all_of(flat.begin(), flat.end(), [](T v) { return std::isfinite(v); })) {
    throw NumericError("sample gradient has non-finite components");
  }
  return flat;
}

template <typename T>
double influence_score(std::span<const T> flat_gradient) {
  double sum_sq = 0;
  for (T v : flat_gradient) sum_sq += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(sum_sq);
}

template <typename T>
std::vector<InfluenceRecord> score_dataset(const Classifier<T>& model,
                                           std::span<const Sample> samples, GradTarget target,
                                           int workers) {
  if (samples.empty()) throw ConfigError("score_dataset: no samples to score");
  if (!model.statistics_initialized()) {
    throw UninitializedStatisticsError(
        "influence scoring needs a fitted model (batch-norm statistics are empty)");
  }
  const size_t n_workers = std::clamp<size_t>(workers, 1, samples.size());
  std::vector<std::unique_ptr<Classifier<T>>> clones;
  for (size_t w = 0; w < n_workers; ++w) clones.push_back(model.clone());

  std::vector<InfluenceRecord> records(samples.size());
  std::vector<std::string> failures;
  std::mutex failure_mutex;
  parallel_for(samples.size(), static_cast<int>(n_workers), [&](size_t worker, size_t i) {
    const Sample& s = samples[i];
    try {
      const std::vector<T> g = sample_gradient(*clones[worker], sample_input<T>(s), s.label, target);
      records[i] = {s.id, s.label, influence_score<T>(g), target};
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      failures.push_back(fmt::format("{} ({}): {}", s.id, i, e.what()));
    }
  });
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    throw NumericError(fmt::format("influence scoring failed for {} sample(s): {}",
                                   failures.size(), fmt::join(failures, "; ")));
  }
  return records;
}

std::string format_scores(std::span<const InfluenceRecord> records) {
  std::string out = "sample_id,label,score\n";
  for (const auto& r : records) {
    if (r.sample_id.find_first_of(",\"\n") != std::string::npos) {
      throw ValidationError(fmt::format("sample id '{}' cannot be written to a scores file",
                                        r.sample_id));
    }
    out += fmt::format("{},{},{:.17g}\n", r.sample_id, static_cast<int>(r.label), r.score);
  }
  return out;
}

void write_scores(std::span<const InfluenceRecord> records, const std::filesystem::path& path) {
  write_file(format_scores(records), path);
}

std::vector<InfluenceRecord> parse_scores_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "sample_id,label,score") {
    throw ParseError("scores file: header must be 'sample_id,label,score'");
  }
  std::vector<InfluenceRecord> records;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t a = line.find(',');
    const size_t b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos || line.find(',', b + 1) != std::string::npos) {
      throw ParseError(fmt::format("scores file line {}: expected 3 fields", line_no));
    }
    InfluenceRecord r;
    r.sample_id = line.substr(0, a);
    const std::string label = line.substr(a + 1, b - a - 1);
    if (label != "0" && label != "1") {
      throw ParseError(fmt::format("scores file line {}: bad label '{}'", line_no, label));
    }
    r.label = label_from_int(label[0] - '0');
    try {
      size_t consumed = 0;
      const std::string score = line.substr(b + 1);
      r.score = std::stod(score, &consumed);
      if (consumed != score.size()) throw std::invalid_argument(score);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("scores file line {}: bad score", line_no));
    }
    if (!(r.score >= 0) || !std::isfinite(r.score)) {
      throw ValidationError(fmt::format("scores file line {}: score must be finite and >= 0",
                                        line_no));
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<InfluenceRecord> read_scores(const std::filesystem::path& path) {
  return parse_scores_text(read_file(path, "scores file"));
}

RemovalPlan select_removal(std::span<const InfluenceRecord> records, double fraction) {
  if (!(fraction > 0 && fraction < 1)) {
    throw ConfigError(fmt::format("removal fraction must lie in (0, 1), got {}", fraction));
  }
  if (records.empty()) throw ConfigError("select_removal: no scored samples");
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.sample_id).second) {
      throw ValidationError(fmt::format("duplicate sample id '{}' in scores", r.sample_id));
    }
  }
  const size_t count =
      static_cast<size_t>(std::floor(fraction * static_cast<double>(records.size()) + 1e-9));

  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (records[a].score != records[b].score) return records[a].score < records[b].score;
    return records[a].sample_id < records[b].sample_id;
  });

  RemovalPlan plan;
  plan.fraction = fraction;
  std::unordered_set<std::string> removed;
  for (size_t k = 0; k < count; ++k) {
    plan.removed_ids.push_back(records[order[k]].sample_id);
    removed.insert(records[order[k]].sample_id);
  }
  for (const auto& r : records) {
    if (!removed.contains(r.sample_id)) plan.retained_ids.push_back(r.sample_id);
  }
  return plan;
}

nlohmann::json to_json(const RemovalPlan& plan) {
  return {{"fraction", plan.fraction},
          {"removed_ids", plan.removed_ids},
          {"retained_ids", plan.retained_ids},
          {"score_file_hash", plan.score_file_hash}};
}

RemovalPlan removal_plan_from_json(const nlohmann::json& json) {
  try {
    RemovalPlan plan;
    plan.fraction = json.at("fraction").get<double>();
    plan.removed_ids = json.at("removed_ids").get<std::vector<std::string>>();
    plan.retained_ids = json.at("retained_ids").get<std::vector<std::string>>();
    plan.score_file_hash = json.value("score_file_hash", std::string());
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("removal plan: {}", e.what()));
  }
}

void write_removal_plan(const RemovalPlan& plan, const std::filesystem::path& path) {
  write_file(to_json(plan).dump(2) + "\n", path);
}

RemovalPlan read_removal_plan(const std::filesystem::path& path) {
  const std::string text = read_file(path, "removal plan");
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return removal_plan_from_json(json);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file(path, "file"));
}

int64_t RetrainAudit::total_violations() const {
  int64_t total = 0;
  for (const auto& e : epochs) total += e.removed_id_occurrences;
  return total;
}

nlohmann::json to_json(const RetrainAudit& audit) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : audit.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"batches", e.batches},
                      {"samples_seen", e.samples_seen},
                      {"removed_id_occurrences", e.removed_id_occurrences}});
  }
  return {{"removed_ids", audit.removed_ids},
          {"original_set_size", audit.original_set_size},
          {"retrain_set_size", audit.retrain_set_size},
          {"epochs", epochs},
          {"total_removed_id_occurrences", audit.total_violations()}};
}

RetrainResult unlearn_retrain(const ArchitectureConfig& architecture,
                              std::span<const Sample> samples, const RemovalPlan& plan,
                              const AugmentationConfig& augmentation, const TrainConfig& config) {
  std::unordered_set<std::string> known;
  for (const auto& s : samples) known.insert(s.id);
  const std::unordered_set<std::string> removed(plan.removed_ids.begin(), plan.removed_ids.end());
  for (const auto& id : plan.removed_ids) {
    if (!known.contains(id)) {
      throw ValidationError(fmt::format("removal plan names '{}', which is not in the manifest", id));
    }
  }

  std::vector<Sample> retained;
  for (const auto& s : samples) {
    if (!removed.contains(s.id)) retained.push_back(s);
  }

  RetrainAudit audit;
  audit.removed_ids = plan.removed_ids;
  audit.original_set_size = static_cast<int64_t>(samples.size());
  audit.retrain_set_size = static_cast<int64_t>(retained.size());
  auto observer = [&](int epoch, int64_t, const std::vector<std::string>& ids) {
    if (audit.epochs.empty() || audit.epochs.back().epoch != epoch) {
      audit.epochs.push_back({epoch, 0, 0, 0});
    }
    EpochAttestation& e = audit.epochs.back();
    ++e.batches;
    e.samples_seen += static_cast<int64_t>(ids.size());
    for (const auto& id : ids) e.removed_id_occurrences += removed.contains(id);
  };

  Model<float> model(architecture, config.seed);
  TrainLog log = train(model, retained, augmentation, config, observer);
  return {std::move(model), std::move(log), std::move(audit)};
}

template std::vector<float> sample_gradient(Classifier<float>&, const Tensor<float>&, Label,
                                            GradTarget);
template std::vector<double> sample_gradient(Classifier<double>&, const Tensor<double>&, Label,
                                             GradTarget);
template double influence_score(std::span<const float>);
template double influence_score(std::span<const double>);
template std::vector<InfluenceRecord> score_dataset(const Classifier<float>&,
                                                    std::span<const Sample>, GradTarget, int);
template std::vector<InfluenceRecord> score_dataset(const Classifier<double>&,
                                                    std::span<const Sample>, GradTarget, int);

}  // namespace mrdlinet
