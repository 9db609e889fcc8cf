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

#include "mrdlinet/image.h"

#include <algorithm>
#include <cmath>

#include "fmt/format.h"
#include "mrdlinet/error.h"
#include "opencv2/core.hpp"
#include "opencv2/imgcodecs.hpp"

namespace mrdlinet {

Image read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError(fmt::format("image not found: {}", path.string()));
  }
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError(fmt::format("cannot decode image {}", path.string()));
  Image image(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const uint8_t* row = bgr.ptr<uint8_t>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      image.at(y, x, 0) = row[3 * x + 2];
      image.at(y, x, 1) = row[3 * x + 1];
      image.at(y, x, 2) = row[3 * x + 0];
    }
  }
  return image;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    uint8_t* row = bgr.ptr<uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      row[3 * x + 0] = image.at(y, x, 2);
      row[3 * x + 1] = image.at(y, x, 1);
      row[3 * x + 2] = image.at(y, x, 0);
    }
  }
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 6};
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr, params);
  } catch (const cv::Exception& e) {
    throw IoError(fmt::format("cannot write {}: {}", path.string(), e.what()));
  }
  if (!ok) throw IoError(fmt::format("cannot write {}", path.string()));
}

Image crop(const Image& image, const Box& box) {
  if (box.xmin < 0 || box.ymin < 0 || box.xmax > image.width || box.ymax > image.height ||
      box.xmin >= box.xmax || box.ymin >= box.ymax) {
    throw ValidationError(fmt::format("crop box ({},{},{},{}) outside {}x{} image", box.xmin,
                                      box.ymin, box.xmax, box.ymax, image.width,
                                      image.height));
  }
  Image out(box.ymax - box.ymin, box.xmax - box.xmin);
  for (int y = 0; y < out.height; ++y) {
    const uint8_t* src = &image.pixels[(size_t(box.ymin + y) * image.width + box.xmin) * 3];
    std::copy_n(src, size_t(out.width) * 3, &out.pixels[size_t(y) * out.width * 3]);
  }
  return out;
}

Image resize_bilinear(const Image& image, int height, int width) {
  if (height < 1 || width < 1) throw ValidationError("resize target must be positive");
  if (height == image.height && width == image.width) return image;
  Image out(height, width);
  const double sy = static_cast<double>(image.height) / height;
  const double sx = static_cast<double>(image.width) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < Image::kChannels; ++c) {
        const double top = (1 - wx) * image.at(y0, x0, c) + wx * image.at(y0, x1, c);
        const double bottom = (1 - wx) * image.at(y1, x0, c) + wx * image.at(y1, x1, c);
        const double v = (1 - wy) * top + wy * bottom;
        out.at(y, x, c) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace mrdlinet
