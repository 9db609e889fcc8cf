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

#include "mrdlinet/serialization.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fmt/format.h"
#include "json.hpp"
#include "mrdlinet/error.h"

namespace mrdlinet {
namespace {

static_assert(std::endian::native == std::endian::little,
              "model files are written with native little-endian byte order");

template <typename T>
constexpr const char* dtype_name() {
  return sizeof(T) == 4 ? "float32" : "float64";
}

}  // namespace

template <typename T>
std::string serialize_model(const Model<T>& model) {
  nlohmann::json tensors = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& p : model.parameters().entries()) {
    const uint64_t length = p.tensor.numel() * sizeof(T);
    tensors.push_back({{"name", p.name},
                       {"dtype", dtype_name<T>()},
                       {"shape", p.tensor.shape()},
                       {"offset", offset},
                       {"length", length},
                       {"trainable", p.trainable}});
    offset += length;
  }
  nlohmann::json header = {{"format_version", kModelFormatVersion},
                           {"config", to_json(model.config())},
                           {"dtype", dtype_name<T>()},
                           {"statistics_initialized", model.statistics_initialized()},
                           {"tensors", tensors}};
  const std::string text = header.dump();
  const uint64_t header_length = text.size();

  std::string bytes(sizeof(header_length), '\0');
  std::memcpy(bytes.data(), &header_length, sizeof(header_length));
  bytes += text;
  bytes.reserve(bytes.size() + offset);
  for (const auto& p : model.parameters().entries()) {
    const auto data = p.tensor.data();
    bytes.append(reinterpret_cast<const char*>(data.data()), data.size_bytes());
  }
  return bytes;
}

template <typename T>
Model<T> deserialize_model(const std::string& bytes) {
  uint64_t header_length = 0;
  if (bytes.size() < sizeof(header_length)) throw ParseError("model file is truncated");
  std::memcpy(&header_length, bytes.data(), sizeof(header_length));
  if (header_length > bytes.size() - sizeof(header_length)) {
    throw ParseError("model header length exceeds file size");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(sizeof(header_length), header_length));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("model header: {}", e.what()));
  }
  const size_t payload_start = sizeof(header_length) + header_length;

  try {
    if (header.at("format_version").get<int>() != kModelFormatVersion) {
      throw ParseError(fmt::format("unsupported model format version {}",
                                   header.at("format_version").dump()));
    }
    if (header.at("dtype").get<std::string>() != dtype_name<T>()) {
      throw ParseError(fmt::format("model stores {}, requested {}",
                                   header.at("dtype").get<std::string>(), dtype_name<T>()));
    }
    Model<T> model(architecture_from_json(header.at("config")), 0);
    const auto& entries = model.parameters().entries();
    const auto& tensors = header.at("tensors");
    if (tensors.size() != entries.size()) {
      throw ParseError(fmt::format("model file has {} tensors, architecture needs {}",
                                   tensors.size(), entries.size()));
    }
    for (size_t i = 0; i < entries.size(); ++i) {
      const auto& dir = tensors[i];
      Tensor<T> tensor = entries[i].tensor;
      if (dir.at("name").get<std::string>() != entries[i].name ||
          dir.at("shape").get<Shape>() != tensor.shape()) {
        throw ParseError(fmt::format("tensor {} ('{}') does not match architecture", i,
                                     dir.at("name").get<std::string>()));
      }
      const uint64_t offset = dir.at("offset").get<uint64_t>();
      const uint64_t length = dir.at("length").get<uint64_t>();
      if (length != tensor.numel() * sizeof(T) ||
          payload_start + offset + length > bytes.size()) {
        throw ParseError(fmt::format("tensor '{}' payload out of range", entries[i].name));
      }
      std::memcpy(tensor.mutable_data().data(), bytes.data() + payload_start + offset,
                  length);
    }
    model.set_statistics_initialized(header.at("statistics_initialized").get<bool>());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("model header: {}", e.what()));
  }
}

template <typename T>
void save_model(const Model<T>& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

template <typename T>
Model<T> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open model file {}", path.string()));
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model<T>(bytes);
}

template std::string serialize_model(const Model<float>&);
template std::string serialize_model(const Model<double>&);
template Model<float> deserialize_model(const std::string&);
template Model<double> deserialize_model(const std::string&);
template void save_model(const Model<float>&, const std::filesystem::path&);
template void save_model(const Model<double>&, const std::filesystem::path&);
template Model<float> load_model(const std::filesystem::path&);
template Model<double> load_model(const std::filesystem::path&);

}  // namespace mrdlinet
