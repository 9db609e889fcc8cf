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

#ifndef MRDLINET_IMAGE_H_
#define MRDLINET_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mrdlinet {

// 8-bit RGB image, row-major HWC.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;

  static constexpr int kChannels = 3;

  Image() = default;
  Image(int h, int w) : height(h), width(w), pixels(size_t(h) * w * kChannels, 0) {}

  uint8_t at(int y, int x, int c) const {
    return pixels[(size_t(y) * width + x) * kChannels + c];
  }
  uint8_t& at(int y, int x, int c) { return pixels[(size_t(y) * width + x) * kChannels + c]; }

  bool operator==(const Image&) const = default;
};

// Half-open pixel rectangle [xmin, xmax) x [ymin, ymax).
struct Box {
  int xmin = 0;
  int ymin = 0;
  int xmax = 0;
  int ymax = 0;
};

// Decodes a JPG/PNG file to RGB. Throws IoError on failure.
Image read_image(const std::filesystem::path& path);

// Writes a PNG. Fixed encoder settings make the bytes reproducible.
void write_png(const Image& image, const std::filesystem::path& path);

Image crop(const Image& image, const Box& box);

// Bilinear resize with half-pixel centers: the source coordinate of output
// pixel d is (d + 0.5) * in / out - 0.5, clamped to the image. Equal sizes
// reproduce the input exactly. Results are rounded to nearest.
Image resize_bilinear(const Image& image, int height, int width);

}  // namespace mrdlinet

#endif  // MRDLINET_IMAGE_H_
