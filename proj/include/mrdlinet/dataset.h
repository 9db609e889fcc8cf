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

#ifndef MRDLINET_DATASET_H_
#define MRDLINET_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrdlinet/image.h"

namespace mrdlinet {

// Fixed label encoding used everywhere: stressed = 1, healthy = 0.
enum class Label : int { kHealthy = 0, kStressed = 1 };

std::string_view label_name(Label label);
// Accepts "stressed" / "healthy" (case-insensitive); ValidationError otherwise.
Label parse_label_name(std::string_view name);
Label label_from_int(int value);

struct AnnotatedBox {
  Box box;
  Label label = Label::kHealthy;
};

// One LabelImg (PascalVOC XML) file.
struct Annotation {
  std::filesystem::path source_image;
  // From <size>, when present; 0 means unknown.
  int image_width = 0;
  int image_height = 0;
  std::vector<AnnotatedBox> boxes;
};

// `source_image` is resolved against `image_dir` when given, otherwise
// against the XML file's directory.
Annotation parse_annotation(const std::filesystem::path& xml_path,
                            const std::filesystem::path& image_dir = {});
// `name` is only used in error messages.
Annotation parse_annotation_text(const std::string& xml, const std::string& name = "<xml>");

// Throws ValidationError naming the first box outside a width x height image.
void validate_boxes(const Annotation& annotation, int width, int height);

struct Sample {
  std::string id;
  Label label = Label::kHealthy;
  Image patch;
};

// Crops each box and resizes it to target size. ids are "<image-stem>#<i>".
std::vector<Sample> extract_windows(const Annotation& annotation, const Image& image,
                                    int target_height = 224, int target_width = 224);

enum class Split { kTrain, kTest };
std::string_view split_name(Split split);

struct ManifestEntry {
  std::string id;
  // Relative paths are resolved against the manifest's directory.
  std::string path;
  Label label = Label::kHealthy;
  Split split = Split::kTrain;

  bool operator==(const ManifestEntry&) const = default;
};

// CSV with header `id,path,label,split`, UTF-8, LF endings. The generating
// seed, if any, is not part of the CSV.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::optional<uint64_t> seed;

  // Entries of one split, order preserved.
  DatasetManifest filter(Split split) const;
};

std::string format_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest_text(const std::string& text);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Decodes every entry's patch (resized to the given size if it differs).
std::vector<Sample> load_samples(const DatasetManifest& manifest,
                                 const std::filesystem::path& base_dir, int height,
                                 int width);

// Stratified split: each label contributes max(1, floor(fraction * n_label))
// samples to the validation part. Indices refer to the input and keep its
// order. Deterministic in `seed`.
struct SplitIndices {
  std::vector<size_t> train;
  std::vector<size_t> validation;
};
SplitIndices split_validation(std::span<const Label> labels, double fraction,
                              uint64_t seed);

std::pair<DatasetManifest, DatasetManifest> split_validation(
    const DatasetManifest& manifest, double fraction, uint64_t seed);

}  // namespace mrdlinet

#endif  // MRDLINET_DATASET_H_
