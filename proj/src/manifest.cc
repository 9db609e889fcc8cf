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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fmt/format.h"
#include "mrdlinet/dataset.h"
#include "mrdlinet/error.h"
#include "mrdlinet/rng.h"

namespace mrdlinet {
namespace {

constexpr std::string_view kManifestHeader = "id,path,label,split";

void append_field(std::string& out, std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

// Splits RFC 4180 records. Quoted fields may contain separators and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  size_t line = 1;
  for (size_t i = 0; i < text.size(); ++i) {
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
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
      row.clear();
      field.clear();
      field_started = false;
      ++line;
    } else if (c == '\r') {
      throw ParseError(fmt::format("manifest line {}: CR line endings are not allowed", line));
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ParseError("manifest: unterminated quoted field");
  if (field_started || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string_view split_name(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

DatasetManifest DatasetManifest::filter(Split split) const {
  DatasetManifest out;
  out.seed = seed;
  for (const auto& e : entries) {
    if (e.split == split) out.entries.push_back(e);
  }
  return out;
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : manifest.entries) {
    append_field(out, e.id);
    out += ',';
    append_field(out, e.path);
    out += fmt::format(",{},{}\n", static_cast<int>(e.label), split_name(e.split));
  }
  return out;
}

DatasetManifest parse_manifest_text(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"id", "path", "label", "split"}) {
    throw ParseError(fmt::format("manifest: header must be '{}'", kManifestHeader));
  }
  DatasetManifest manifest;
  std::set<std::string> seen;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 4) {
      throw ParseError(fmt::format("manifest row {}: expected 4 fields, got {}", r + 1,
                                   row.size()));
    }
    ManifestEntry e;
    e.id = row[0];
    e.path = row[1];
    if (row[2] == "0" || row[2] == "1") {
      e.label = label_from_int(row[2][0] - '0');
    } else {
      throw ParseError(fmt::format("manifest row {}: label must be 0 or 1, got '{}'", r + 1,
                                   row[2]));
    }
    if (row[3] == "train") {
      e.split = Split::kTrain;
    } else if (row[3] == "test") {
      e.split = Split::kTest;
    } else {
      throw ParseError(fmt::format("manifest row {}: split must be train or test, got '{}'",
                                   r + 1, row[3]));
    }
    if (!seen.insert(e.id).second) {
      throw ValidationError(fmt::format("manifest row {}: duplicate id '{}'", r + 1, e.id));
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << format_manifest(manifest);
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open manifest {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest_text(buffer.str());
}

std::vector<Sample> load_samples(const DatasetManifest& manifest,
                                 const std::filesystem::path& base_dir, int height,
                                 int width) {
  std::vector<Sample> samples;
  samples.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    std::filesystem::path p(e.path);
    if (p.is_relative()) p = base_dir / p;
    samples.push_back({e.id, e.label, resize_bilinear(read_image(p), height, width)});
  }
  return samples;
}

SplitIndices split_validation(std::span<const Label> labels, double fraction,
                              uint64_t seed) {
  if (!(fraction > 0 && fraction <= 0.5)) {
    throw ConfigError(fmt::format("validation fraction must lie in (0, 0.5], got {}",
                                  fraction));
  }
  std::vector<bool> in_validation(labels.size(), false);
  for (Label label : {Label::kHealthy, Label::kStressed}) {
    std::vector<size_t> members;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw ValidationError(fmt::format("cannot stratify: class {} has {} sample(s)",
                                        label_name(label), members.size()));
    }
    Rng rng(derive_seed(seed, "validation-split", static_cast<uint64_t>(label)));
    for (size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[rng.below(i + 1)]);
    }
    const size_t take = std::max<size_t>(
        1, static_cast<size_t>(std::floor(fraction * members.size() + 1e-9)));
    for (size_t i = 0; i < take; ++i) in_validation[members[i]] = true;
  }
  SplitIndices out;
  for (size_t i = 0; i < labels.size(); ++i) {
    (in_validation[i] ? out.validation : out.train).push_back(i);
  }
  return out;
}

std::pair<DatasetManifest, DatasetManifest> split_validation(
    const DatasetManifest& manifest, double fraction, uint64_t seed) {
  std::vector<Label> labels;
  for (const auto& e : manifest.entries) labels.push_back(e.label);
  const SplitIndices idx = split_validation(labels, fraction, seed);
  DatasetManifest train, val;
  train.seed = val.seed = manifest.seed;
  for (size_t i : idx.train) train.entries.push_back(manifest.entries[i]);
  for (size_t i : idx.validation) val.entries.push_back(manifest.entries[i]);
  return {train, val};
}

}  // namespace mrdlinet
