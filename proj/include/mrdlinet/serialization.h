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

#ifndef MRDLINET_SERIALIZATION_H_
#define MRDLINET_SERIALIZATION_H_

#include <filesystem>
#include <string>

#include "mrdlinet/model.h"

namespace mrdlinet {

// Model file layout:
//
//   u64 little-endian header length L
//   L bytes of JSON header:
//     {"format_version": 1, "config": {...}, "dtype": "float32",
//      "statistics_initialized": bool,
//      "tensors": [{"name", "dtype", "shape", "offset", "length", "trainable"}]}
//   raw little-endian IEEE-754 payloads, tensors back to back in
//   ParameterStore order; offsets are relative to the end of the header.
//
// The JSON is dumped with sorted keys, so save -> load -> save reproduces the
// same bytes.
inline constexpr int kModelFormatVersion = 1;

template <typename T>
std::string serialize_model(const Model<T>& model);

template <typename T>
Model<T> deserialize_model(const std::string& bytes);

template <typename T>
void save_model(const Model<T>& model, const std::filesystem::path& path);

template <typename T>
Model<T> load_model(const std::filesystem::path& path);

}  // namespace mrdlinet

#endif  // MRDLINET_SERIALIZATION_H_
