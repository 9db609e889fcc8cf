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
#include <cctype>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <sstream>

#include "boost/property_tree/ptree.hpp"
#include "boost/property_tree/xml_parser.hpp"
#include "fmt/format.h"
#include "mrdlinet/dataset.h"
#include "mrdlinet/error.h"

namespace mrdlinet {
namespace {

namespace pt = boost::property_tree;

int parse_coordinate(const pt::ptree& node, const char* key, size_t object_index) {
  const auto value = node.get_optional<std::string>(key);
  if (!value) {
    throw ParseError(fmt::format("object #{}: bndbox is missing <{}>", object_index, key));
  }
  try {
    size_t consumed = 0;
    const double v = std::stod(*value, &consumed);
    if (consumed != value->size() || v != std::floor(v)) throw std::invalid_argument(*value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ParseError(fmt::format("object #{}: <{}> is not an integer: '{}'", object_index,
                                 key, *value));
  }
}

Annotation from_tree(const pt::ptree& tree, const std::string& name) {
  const auto root = tree.get_child_optional("annotation");
  if (!root) throw ParseError(fmt::format("{}: missing <annotation> root", name));

  Annotation annotation;
  if (auto file = root->get_optional<std::string>("filename")) {
    annotation.source_image = *file;
  } else if (auto path = root->get_optional<std::string>("path")) {
    annotation.source_image = *path;
  }
  if (auto size = root->get_child_optional("size")) {
    annotation.image_width = size->get<int>("width", 0);
    annotation.image_height = size->get<int>("height", 0);
  }

  size_t index = 0;
  for (const auto& [tag, node] : *root) {
    if (tag != "object") continue;
    const auto bndbox = node.get_child_optional("bndbox");
    if (!bndbox) throw ParseError(fmt::format("{}: object #{} has no <bndbox>", name, index));
    AnnotatedBox box;
    const std::string label = node.get<std::string>("name", "");
    try {
      box.label = parse_label_name(label);
    } catch (const ValidationError&) {
      throw ValidationError(
          fmt::format("{}: object #{} has unknown label '{}'", name, index, label));
    }
    box.box.xmin = parse_coordinate(*bndbox, "xmin", index);
    box.box.ymin = parse_coordinate(*bndbox, "ymin", index);
    box.box.xmax = parse_coordinate(*bndbox, "xmax", index);
    box.box.ymax = parse_coordinate(*bndbox, "ymax", index);
    annotation.boxes.push_back(box);
    ++index;
  }
  if (annotation.image_width > 0 && annotation.image_height > 0) {
    validate_boxes(annotation, annotation.image_width, annotation.image_height);
  } else {
    validate_boxes(annotation, INT32_MAX, INT32_MAX);
  }
  return annotation;
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::kStressed ? "stressed" : "healthy";
}

Label parse_label_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "stressed") return Label::kStressed;
  if (lower == "healthy") return Label::kHealthy;
  throw ValidationError(fmt::format("unknown label '{}'", name));
}

Label label_from_int(int value) {
  if (value == 0) return Label::kHealthy;
  if (value == 1) return Label::kStressed;
  throw ValidationError(fmt::format("label must be 0 or 1, got {}", value));
}

void validate_boxes(const Annotation& annotation, int width, int height) {
  for (size_t i = 0; i < annotation.boxes.size(); ++i) {
    const Box& b = annotation.boxes[i].box;
    if (b.xmin < 0 || b.ymin < 0 || b.xmin >= b.xmax || b.ymin >= b.ymax ||
        b.xmax > width || b.ymax > height) {
      throw ValidationError(fmt::format(
          "box #{} ({}) ({},{},{},{}) is degenerate or outside the {}x{} image of {}", i,
          label_name(annotation.boxes[i].label), b.xmin, b.ymin, b.xmax, b.ymax, width,
          height, annotation.source_image.string()));
    }
  }
}

Annotation parse_annotation_text(const std::string& xml, const std::string& name) {
  pt::ptree tree;
  std::istringstream in(xml);
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(fmt::format("{}:{}: {}", name, e.line(), e.message()));
  }
  return from_tree(tree, name);
}

Annotation parse_annotation(const std::filesystem::path& xml_path,
                            const std::filesystem::path& image_dir) {
  std::ifstream in(xml_path);
  if (!in) throw IoError(fmt::format("cannot open annotation {}", xml_path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  Annotation annotation = parse_annotation_text(buffer.str(), xml_path.string());
  const std::filesystem::path base = image_dir.empty() ? xml_path.parent_path() : image_dir;
  annotation.source_image = base / annotation.source_image.filename();
  return annotation;
}

std::vector<Sample> extract_windows(const Annotation& annotation, const Image& image,
                                    int target_height, int target_width) {
  validate_boxes(annotation, image.width, image.height);
  const std::string stem = annotation.source_image.stem().string();
  std::vector<Sample> samples;
  for (size_t i = 0; i < annotation.boxes.size(); ++i) {
    const auto& box = annotation.boxes[i];
    samples.push_back({fmt::format("{}#{}", stem, i), box.label,
                       resize_bilinear(crop(image, box.box), target_height, target_width)});
  }
  return samples;
}

}  // namespace mrdlinet
