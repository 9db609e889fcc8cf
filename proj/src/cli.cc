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

#include "mrdlinet/cli.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "CLI11.hpp"
#include "fmt/format.h"
#include "mrdlinet/error.h"
#include "mrdlinet/evaluator.h"
#include "mrdlinet/model.h"
#include "mrdlinet/serialization.h"
#include "mrdlinet/unlearner.h"

namespace mrdlinet {
namespace {

namespace fs = std::filesystem;

constexpr const char* kModelFile = "model.bin";
constexpr double kReferenceParams = 0.231e6;
constexpr double kMobileNetParams = 3.5e6;

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} {}", what, path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

void reject_unknown(const nlohmann::json& json, const std::set<std::string>& known,
                    const char* what) {
  if (!json.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", what));
  for (const auto& [key, _] : json.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", what, key));
  }
}

// Flag values that override the resolved config when present.
struct Overrides {
  std::optional<fs::path> config;
  std::optional<uint64_t> seed;
  std::optional<double> scale;
  std::optional<int> stem_filters;
  std::optional<int> input_size;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> init_lr;
  std::optional<double> decay_rate;
  std::optional<double> decay_epochs;
  std::optional<double> val_fraction;
  std::optional<int> workers;
  bool no_augment = false;
  std::optional<double> rescale;
  std::optional<double> rotation_range;
  std::optional<double> width_shift_range;
  std::optional<double> height_shift_range;
  std::optional<double> shear_range;
  std::optional<double> zoom_range;
  std::optional<bool> horizontal_flip;
  std::optional<bool> vertical_flip;
  std::optional<double> fraction;
  std::optional<int> n_train;
  std::optional<int> n_test;
  std::optional<int> size;
  std::optional<double> class_balance;
  std::optional<double> color_margin;
};

template <typename T>
CLI::Option* add_override(CLI::App* app, const std::string& name, std::optional<T>& slot,
                          const std::string& help) {
  return app->add_option_function<T>(name, [&slot](const T& v) { slot = v; }, help);
}

void add_config_flags(CLI::App* app, Overrides& o) {
  app->add_option_function<std::string>(
      "--config", [&o](const std::string& v) { o.config = v; }, "JSON run configuration file");
  add_override(app, "--seed", o.seed, "Seed for every random stream");
}

void add_model_flags(CLI::App* app, Overrides& o) {
  add_override(app, "--scale", o.scale, "Width multiplier for filters, growth and units");
  add_override(app, "--stem-filters", o.stem_filters, "Stem convolution filters");
  add_override(app, "--input-size", o.input_size, "Square input size in pixels");
}

void add_train_flags(CLI::App* app, Overrides& o) {
  add_override(app, "--epochs", o.epochs, "Training epochs");
  add_override(app, "--batch-size", o.batch_size, "Mini-batch size");
  add_override(app, "--init-lr", o.init_lr, "Initial learning rate");
  add_override(app, "--decay-rate", o.decay_rate, "Learning-rate decay factor");
  add_override(app, "--decay-epochs", o.decay_epochs, "Epochs per decay period");
  add_override(app, "--val-fraction", o.val_fraction, "Stratified validation fraction");
  app->add_flag("--no-augment", o.no_augment, "Train on rescaled inputs only");
  add_override(app, "--rescale", o.rescale, "Pixel rescale factor");
  add_override(app, "--rotation-range", o.rotation_range, "Rotation range in degrees");
  add_override(app, "--width-shift-range", o.width_shift_range, "Horizontal shift fraction");
  add_override(app, "--height-shift-range", o.height_shift_range, "Vertical shift fraction");
  add_override(app, "--shear-range", o.shear_range, "Shear coefficient range");
  add_override(app, "--zoom-range", o.zoom_range, "Zoom range");
  add_override(app, "--horizontal-flip", o.horizontal_flip, "Random horizontal flips (true/false)");
  add_override(app, "--vertical-flip", o.vertical_flip, "Random vertical flips (true/false)");
}

void add_workers_flag(CLI::App* app, Overrides& o) {
  add_override(app, "--workers", o.workers, "Worker threads; results do not depend on it");
}

template <typename T>
void apply(const std::optional<T>& value, T& target) {
  if (value) target = *value;
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config ? read_run_config(*o.config) : RunConfig{};
  apply(o.seed, c.seed);
  apply(o.scale, c.model.scale_factor);
  apply(o.stem_filters, c.model.stem_filters);
  if (o.input_size) c.model.input_height = c.model.input_width = *o.input_size;
  apply(o.epochs, c.train.epochs);
  apply(o.batch_size, c.train.batch_size);
  apply(o.init_lr, c.train.init_lr);
  apply(o.decay_rate, c.train.decay_rate);
  apply(o.decay_epochs, c.train.decay_epochs);
  apply(o.val_fraction, c.train.val_fraction);
  apply(o.workers, c.train.workers);
  if (o.no_augment) c.train.augment = false;
  apply(o.rescale, c.augmentation.rescale);
  apply(o.rotation_range, c.augmentation.rotation_range);
  apply(o.width_shift_range, c.augmentation.width_shift_range);
  apply(o.height_shift_range, c.augmentation.height_shift_range);
  apply(o.shear_range, c.augmentation.shear_range);
  apply(o.zoom_range, c.augmentation.zoom_range);
  apply(o.horizontal_flip, c.augmentation.horizontal_flip);
  apply(o.vertical_flip, c.augmentation.vertical_flip);
  apply(o.fraction, c.unlearn_fraction);
  apply(o.n_train, c.synth.n_train);
  apply(o.n_test, c.synth.n_test);
  apply(o.size, c.synth.image_size);
  apply(o.class_balance, c.synth.class_balance);
  apply(o.color_margin, c.synth.color_margin);
  c.train.seed = c.seed;
  c.synth.seed = c.seed;
  c.validate();
  return c;
}

void write_resolved_config(const RunConfig& config, const fs::path& path) {
  write_text(to_json(config).dump(2) + "\n", path);
}

std::vector<Sample> load_split(const fs::path& manifest_path, Split split,
                               const ArchitectureConfig& model) {
  const DatasetManifest manifest = read_manifest(manifest_path).filter(split);
  if (manifest.entries.empty()) {
    throw ValidationError(fmt::format("{} has no {} entries", manifest_path.string(),
                                      split_name(split)));
  }
  return load_samples(manifest, manifest_path.parent_path(), model.input_height,
                      model.input_width);
}

std::string trainlog_summary(const TrainLog& log) {
  if (log.rows.empty()) return "no epochs run\n";
  const TrainLogRow& r = log.rows.back();
  std::string out = fmt::format("epoch {}: train_loss {:.4f} train_acc {:.4f}", r.epoch,
                                r.train_loss, r.train_accuracy);
  if (r.val_loss) out += fmt::format(" val_loss {:.4f} val_acc {:.4f}", *r.val_loss,
                                     r.val_accuracy.value_or(0));
  return out + "\n";
}

void write_training_outputs(const Model<float>& model, const TrainLog& log,
                            const RunConfig& config, const fs::path& dir) {
  save_model(model, dir / kModelFile);
  write_trainlog(log, dir / "trainlog.csv");
  write_text(render_curves_svg(log), dir / "curves.svg");
  write_resolved_config(config, dir / "resolved-config.json");
}

// Subcommand bodies. Each returns normally on success and throws on error.

int cmd_synth(const Overrides& o, const fs::path& out_dir, std::ostream& out) {
  const RunConfig config = resolve(o);
  make_dir(out_dir);
  const DatasetManifest manifest = synth_dataset(config.synth, out_dir);
  write_resolved_config(config, out_dir / "resolved-config.json");
  out << fmt::format("wrote {} samples to {}\n", manifest.entries.size(),
                     (out_dir / "manifest.csv").string());
  return kExitOk;
}

int cmd_extract(const fs::path& images, const fs::path& annotations, const fs::path& out_dir,
                const std::string& split_text, int size, bool append, std::ostream& out) {
  Split split;
  if (split_text == "train") split = Split::kTrain;
  else if (split_text == "test") split = Split::kTest;
  else throw ConfigError(fmt::format("--split must be 'train' or 'test', got '{}'", split_text));
  if (size < 1) throw ConfigError("--size must be >= 1");
  if (!fs::is_directory(annotations)) {
    throw IoError(fmt::format("annotation directory {} not found", annotations.string()));
  }
  if (!fs::is_directory(images)) {
    throw IoError(fmt::format("image directory {} not found", images.string()));
  }
  std::vector<fs::path> xml_files;
  for (const auto& entry : fs::directory_iterator(annotations)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") {
      xml_files.push_back(entry.path());
    }
  }
  std::sort(xml_files.begin(), xml_files.end());

  const fs::path manifest_path = out_dir / "manifest.csv";
  DatasetManifest manifest;
  if (append && fs::exists(manifest_path)) manifest = read_manifest(manifest_path);
  std::set<std::string> ids;
  for (const auto& e : manifest.entries) ids.insert(e.id);

  const fs::path patch_dir = fs::path("patches") / std::string(split_name(split));
  make_dir(out_dir / patch_dir);
  size_t added = 0;
  for (const auto& xml : xml_files) {
    const Annotation annotation = parse_annotation(xml, images);
    const Image image = read_image(annotation.source_image);
    for (const Sample& s : extract_windows(annotation, image, size, size)) {
      if (!ids.insert(s.id).second) {
        throw ValidationError(fmt::format("duplicate sample id '{}'", s.id));
      }
      std::string file = s.id;
      std::replace(file.begin(), file.end(), '#', '_');
      const fs::path rel = patch_dir / (file + ".png");
      write_png(s.patch, out_dir / rel);
      manifest.entries.push_back({s.id, rel.generic_string(), s.label, split});
      ++added;
    }
  }
  write_manifest(manifest, manifest_path);
  out << fmt::format("extracted {} windows from {} annotation files into {}\n", added,
                     xml_files.size(), manifest_path.string());
  return kExitOk;
}

int cmd_train(const Overrides& o, const fs::path& manifest, const fs::path& out_dir,
              std::ostream& out) {
  const RunConfig config = resolve(o);
  const std::vector<Sample> samples = load_split(manifest, Split::kTrain, config.model);
  make_dir(out_dir);
  Model<float> model(config.model, config.seed);
  const TrainLog log = train(model, samples, config.augmentation, config.train);
  write_training_outputs(model, log, config, out_dir);
  out << trainlog_summary(log);
  return kExitOk;
}

int cmd_influence(const Overrides& o, const fs::path& model_path, const fs::path& manifest,
                  const fs::path& out_path, const std::string& target_text, std::ostream& out) {
  const GradTarget target = parse_grad_target(target_text);
  RunConfig config = resolve(o);
  const Model<float> model = load_model<float>(model_path);
  config.model = model.config();
  const std::vector<Sample> samples = load_split(manifest, Split::kTrain, config.model);
  const std::vector<InfluenceRecord> records =
      score_dataset<float>(model, samples, target, config.train.workers);
  if (out_path.has_parent_path()) make_dir(out_path.parent_path());
  write_scores(records, out_path);
  out << fmt::format("scored {} samples ({} gradient) into {}\n", records.size(),
                     grad_target_name(target), out_path.string());
  return kExitOk;
}

int cmd_unlearn(const Overrides& o, const fs::path& scores_path, const fs::path& manifest_path,
                const fs::path& out_path, std::ostream& out, std::ostream& err) {
  const RunConfig config = resolve(o);
  const std::vector<InfluenceRecord> scored = read_scores(scores_path);
  const DatasetManifest manifest = read_manifest(manifest_path).filter(Split::kTrain);

  // Retained ids follow manifest order, so reorder the records to match it.
  std::unordered_map<std::string, size_t> position;
  for (size_t i = 0; i < scored.size(); ++i) position.emplace(scored[i].sample_id, i);
  if (position.size() != scored.size()) throw ValidationError("scores file repeats a sample id");
  std::vector<InfluenceRecord> records;
  for (const auto& e : manifest.entries) {
    const auto it = position.find(e.id);
    if (it == position.end()) {
      throw ValidationError(fmt::format("training sample '{}' has no score", e.id));
    }
    records.push_back(scored[it->second]);
  }
  if (records.size() != scored.size()) {
    throw ValidationError("scores file contains ids that are not training samples");
  }

  RemovalPlan plan = select_removal(records, config.unlearn_fraction);
  plan.score_file_hash = sha256_file(scores_path);
  if (plan.removed_ids.empty()) {
    err << fmt::format("warning: fraction {} of {} samples removes nothing\n",
                       config.unlearn_fraction, records.size());
  }
  if (out_path.has_parent_path()) make_dir(out_path.parent_path());
  write_removal_plan(plan, out_path);
  out << fmt::format("removing {} of {} samples; plan written to {}\n", plan.removed_ids.size(),
                     records.size(), out_path.string());
  return kExitOk;
}

int cmd_retrain(const Overrides& o, const fs::path& plan_path, const fs::path& manifest,
                const fs::path& out_dir, std::ostream& out) {
  const RunConfig config = resolve(o);
  const RemovalPlan plan = read_removal_plan(plan_path);
  const std::vector<Sample> samples = load_split(manifest, Split::kTrain, config.model);
  make_dir(out_dir);
  const RetrainResult result =
      unlearn_retrain(config.model, samples, plan, config.augmentation, config.train);
  write_training_outputs(result.model, result.log, config, out_dir);
  write_text(to_json(result.audit).dump(2) + "\n", out_dir / "audit.json");
  out << fmt::format("retrained on {} of {} samples; removed-id occurrences: {}\n",
                     result.audit.retrain_set_size, result.audit.original_set_size,
                     result.audit.total_violations());
  out << trainlog_summary(result.log);
  if (result.audit.total_violations() != 0) {
    throw NumericError("retraining batches contained removed samples");
  }
  return kExitOk;
}

int cmd_evaluate(const Overrides& o, const fs::path& model_path, const fs::path& manifest,
                 const fs::path& out_dir, const std::string& scenario, std::ostream& out) {
  RunConfig config = resolve(o);
  const Model<float> model = load_model<float>(model_path);
  config.model = model.config();
  const std::vector<Sample> samples = load_split(manifest, Split::kTest, config.model);
  const std::vector<Prediction> predictions =
      predict_labels(model, samples, config.train.workers);

  std::vector<Label> truth, predicted;
  std::string rows = "sample_id,label,probability,predicted\n";
  for (size_t i = 0; i < samples.size(); ++i) {
    truth.push_back(samples[i].label);
    predicted.push_back(predictions[i].label);
    rows += fmt::format("{},{},{:.17g},{}\n", predictions[i].sample_id,
                        static_cast<int>(samples[i].label), predictions[i].probability,
                        static_cast<int>(predictions[i].label));
  }
  const ConfusionMatrix cm = confusion(truth, predicted);
  const MetricsReport report = metrics(cm, scenario);
  emit_report(report, cm, out_dir);
  write_text(rows, out_dir / "predictions.csv");
  out << format_metrics_table(report);
  return kExitOk;
}

int cmd_params(const Overrides& o, std::ostream& out) {
  const RunConfig config = resolve(o);
  const Model<float> model(config.model, config.seed);
  const ParameterCount count = count_parameters(model);
  size_t width = 4;
  for (const auto& row : count.rows) width = std::max(width, row.name.size());
  out << fmt::format("{:<{}}  {:<18} {:>9}  {}\n", "name", width, "shape", "count", "trainable");
  for (const auto& row : count.rows) {
    out << fmt::format("{:<{}}  {:<18} {:>9}  {}\n", row.name, width, shape_string(row.shape),
                       row.count, row.trainable ? "yes" : "no");
  }
  out << fmt::format("trainable parameters: {}\n", count.trainable);
  out << fmt::format("non-trainable parameters: {}\n", count.non_trainable);
  out << fmt::format("total parameters: {}\n", count.trainable + count.non_trainable);
  out << fmt::format("reference figure: published 0.231M trainable; measured {:.3f}M ({:+.1f}%)\n",
                     count.trainable / 1e6,
                     100.0 * (count.trainable - kReferenceParams) / kReferenceParams);
  out << fmt::format("MobileNet baseline 3.5M / measured: {:.1f}x\n",
                     kMobileNetParams / static_cast<double>(count.trainable));
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kExitIo;
  }
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const ContractError*>(&e) ||
      dynamic_cast<const UninitializedStatisticsError*>(&e)) {
    return kExitConfig;
  }
  return kExitFailure;
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
  augmentation.validate();
  synth.validate();
  if (!(unlearn_fraction > 0 && unlearn_fraction < 1)) {
    throw ConfigError(fmt::format("unlearn fraction must lie in (0, 1), got {}",
                                  unlearn_fraction));
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"model", to_json(c.model)},
          {"train", to_json(c.train)},
          {"augmentation", to_json(c.augmentation)},
          {"unlearn", {{"fraction", c.unlearn_fraction}}},
          {"synth",
           {{"n_train", c.synth.n_train},
            {"n_test", c.synth.n_test},
            {"image_size", c.synth.image_size},
            {"class_balance", c.synth.class_balance},
            {"color_margin", c.synth.color_margin}}}};
}

RunConfig run_config_from_json(const nlohmann::json& json) {
  reject_unknown(json, {"seed", "model", "train", "augmentation", "unlearn", "synth"},
                 "run config");
  RunConfig c;
  try {
    c.seed = json.value("seed", c.seed);
    if (json.contains("model")) c.model = architecture_from_json(json.at("model"));
    if (json.contains("train")) c.train = train_config_from_json(json.at("train"), c.train);
    if (json.contains("augmentation")) {
      c.augmentation = augmentation_from_json(json.at("augmentation"), c.augmentation);
    }
    if (json.contains("unlearn")) {
      const auto& u = json.at("unlearn");
      reject_unknown(u, {"fraction"}, "unlearn config");
      c.unlearn_fraction = u.value("fraction", c.unlearn_fraction);
    }
    if (json.contains("synth")) {
      const auto& s = json.at("synth");
      reject_unknown(s, {"n_train", "n_test", "image_size", "class_balance", "color_margin"},
                     "synth config");
      c.synth.n_train = s.value("n_train", c.synth.n_train);
      c.synth.n_test = s.value("n_test", c.synth.n_test);
      c.synth.image_size = s.value("image_size", c.synth.image_size);
      c.synth.class_balance = s.value("class_balance", c.synth.class_balance);
      c.synth.color_margin = s.value("color_margin", c.synth.color_margin);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("run config: {}", e.what()));
  }
  c.train.seed = c.seed;
  c.synth.seed = c.seed;
  c.validate();
  return c;
}

RunConfig read_run_config(const fs::path& path) {
  const std::string text = read_text(path, "config file");
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
  return run_config_from_json(json);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lightweight crop-stress classifier with gradient-norm data removal", "mrdlinet"};
  app.require_subcommand(1);
  Overrides o;
  std::string manifest, out_dir, out_file, model_path, scores, plan, images, annotations;
  std::string split = "train", grad_target = "parameters", scenario;
  int size = 224;
  bool append = false;

  std::function<int()> action;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-class patch dataset");
  add_config_flags(synth, o);
  synth->add_option("--out", out_dir, "Output directory")->required();
  add_override(synth, "--n-train", o.n_train, "Training samples");
  add_override(synth, "--n-test", o.n_test, "Test samples");
  add_override(synth, "--size", o.size, "Patch size in pixels");
  add_override(synth, "--class-balance", o.class_balance, "Fraction of stressed samples");
  add_override(synth, "--color-margin", o.color_margin, "Green-channel gap between classes");
  synth->callback([&] { action = [&] { return cmd_synth(o, out_dir, out); }; });

  auto* extract = app.add_subcommand("extract", "Cut labelled windows out of annotated images");
  extract->add_option("--images", images, "Directory with the source images")->required();
  extract->add_option("--annotations", annotations, "Directory with PascalVOC XML files")
      ->required();
  extract->add_option("--out", out_dir, "Output directory")->required();
  extract->add_option("--split", split, "Split assigned to the windows (train|test)");
  extract->add_option("--size", size, "Square window size after resizing");
  extract->add_flag("--append", append, "Append to an existing manifest in --out");
  extract->callback([&] {
    action = [&] { return cmd_extract(images, annotations, out_dir, split, size, append, out); };
  });

  auto* train_cmd = app.add_subcommand("train", "Train a model on the manifest's train split");
  add_config_flags(train_cmd, o);
  add_model_flags(train_cmd, o);
  add_train_flags(train_cmd, o);
  add_workers_flag(train_cmd, o);
  train_cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  train_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  train_cmd->callback([&] { action = [&] { return cmd_train(o, manifest, out_dir, out); }; });

  auto* influence = app.add_subcommand("influence", "Score every training sample");
  add_config_flags(influence, o);
  add_workers_flag(influence, o);
  influence->add_option("--model", model_path, "Trained model file")->required();
  influence->add_option("--manifest", manifest, "Dataset manifest")->required();
  influence->add_option("--out", out_file, "Scores CSV to write")->required();
  influence->add_option("--grad-target", grad_target, "Gradient taken w.r.t. parameters|input");
  influence->callback([&] {
    action = [&] { return cmd_influence(o, model_path, manifest, out_file, grad_target, out); };
  });

  auto* unlearn = app.add_subcommand("unlearn", "Select the least influential samples");
  add_config_flags(unlearn, o);
  unlearn->add_option("--scores", scores, "Scores CSV")->required();
  unlearn->add_option("--manifest", manifest, "Dataset manifest")->required();
  add_override(unlearn, "--fraction", o.fraction, "Fraction of samples to remove");
  unlearn->add_option("--out", out_file, "Removal plan JSON to write")->required();
  unlearn->callback([&] {
    action = [&] { return cmd_unlearn(o, scores, manifest, out_file, out, err); };
  });

  auto* retrain = app.add_subcommand("retrain", "Train from scratch without the removed samples");
  add_config_flags(retrain, o);
  add_model_flags(retrain, o);
  add_train_flags(retrain, o);
  add_workers_flag(retrain, o);
  retrain->add_option("--plan", plan, "Removal plan JSON")->required();
  retrain->add_option("--manifest", manifest, "Dataset manifest")->required();
  retrain->add_option("--out-dir", out_dir, "Output directory")->required();
  retrain->callback([&] { action = [&] { return cmd_retrain(o, plan, manifest, out_dir, out); }; });

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on the test split");
  add_config_flags(evaluate, o);
  add_workers_flag(evaluate, o);
  evaluate->add_option("--model", model_path, "Trained model file")->required();
  evaluate->add_option("--manifest", manifest, "Dataset manifest")->required();
  evaluate->add_option("--out-dir", out_dir, "Output directory")->required();
  evaluate->add_option("--scenario", scenario, "Scenario label stored in the report");
  evaluate->callback([&] {
    action = [&] { return cmd_evaluate(o, model_path, manifest, out_dir, scenario, out); };
  });

  auto* params = app.add_subcommand("params", "Print the per-layer parameter table");
  add_config_flags(params, o);
  add_model_flags(params, o);
  params->callback([&] { action = [&] { return cmd_params(o, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help is raised from inside the subcommand parse.
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      for (const auto* sub : app.get_subcommands()) out << sub->help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    return action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace mrdlinet
