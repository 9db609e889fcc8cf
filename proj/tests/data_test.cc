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

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mrdlinet/augment.h"
#include "mrdlinet/dataset.h"
#include "mrdlinet/error.h"
#include "mrdlinet/image.h"
#include "mrdlinet/rng.h"
#include "mrdlinet/synth.h"
#include "testing/temp_dir.h"

namespace mrdlinet {
namespace {

std::string voc(const std::string& objects, int width = 100, int height = 80) {
  return "<annotation>\n  <filename>field_01.jpg</filename>\n  <size><width>" +
         std::to_string(width) + "</width><height>" + std::to_string(height) +
         "</height><depth>3</depth></size>\n" + objects + "</annotation>\n";
}

std::string object(const std::string& name, int xmin, int ymin, int xmax, int ymax) {
  return "  <object><name>" + name + "</name><bndbox><xmin>" + std::to_string(xmin) +
         "</xmin><ymin>" + std::to_string(ymin) + "</ymin><xmax>" + std::to_string(xmax) +
         "</xmax><ymax>" + std::to_string(ymax) + "</ymax></bndbox></object>\n";
}

Image random_image(int h, int w, uint64_t seed) {
  std::mt19937_64 gen(seed);
  Image img(h, w);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(gen() % 256);
  return img;
}

TEST(Annotation, ParsesBoxesAndLabels) {
  const Annotation a = parse_annotation_text(
      voc(object("stressed", 10, 5, 40, 30) + object("Healthy", 0, 0, 100, 80)));
  EXPECT_EQ(a.source_image, "field_01.jpg");
  EXPECT_EQ(a.image_width, 100);
  EXPECT_EQ(a.image_height, 80);
  ASSERT_EQ(a.boxes.size(), 2u);
  EXPECT_EQ(a.boxes[0].label, Label::kStressed);
  EXPECT_EQ(a.boxes[0].box.xmin, 10);
  EXPECT_EQ(a.boxes[0].box.ymax, 30);
  EXPECT_EQ(a.boxes[1].label, Label::kHealthy);
}

TEST(Annotation, MalformedXmlReportsTheLine) {
  try {
    parse_annotation_text("<annotation>\n<object>\n</annotation>", "bad.xml");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.xml:3"), std::string::npos) << e.what();
  }
}

TEST(Annotation, RejectsBadBoxes) {
  EXPECT_THROW(parse_annotation_text(voc(object("stressed", 10, 10, 10, 20))), ValidationError);
  EXPECT_THROW(parse_annotation_text(voc(object("stressed", 30, 10, 20, 20))), ValidationError);
  EXPECT_THROW(parse_annotation_text(voc(object("stressed", 0, 0, 101, 20))), ValidationError);
  EXPECT_THROW(parse_annotation_text(voc(object("stressed", -1, 0, 10, 20))), ValidationError);
  EXPECT_THROW(parse_annotation_text(voc(object("weed", 0, 0, 10, 20))), ValidationError);
  EXPECT_THROW(parse_annotation_text("<annotation><object><name>healthy</name></object>"
                                     "</annotation>"),
               ParseError);
  EXPECT_THROW(parse_annotation_text("<root/>"), ParseError);
}

TEST(Annotation, NonIntegerCoordinateIsAParseError) {
  std::string xml = voc(object("stressed", 1, 2, 30, 40));
  xml.replace(xml.find("<xmin>1"), 7, "<xmin>1.5");
  EXPECT_THROW(parse_annotation_text(xml), ParseError);
}

TEST(Annotation, ValidateBoxesAgainstDecodedSize) {
  const Annotation a = parse_annotation_text(voc(object("healthy", 0, 0, 90, 70)));
  EXPECT_NO_THROW(validate_boxes(a, 90, 70));
  EXPECT_THROW(validate_boxes(a, 89, 70), ValidationError);
}

TEST(Extract, FullImageBoxAtNativeSizeIsIdentity) {
  const Image img = random_image(224, 224, 1);
  Annotation a;
  a.source_image = "scene.png";
  a.boxes = {{{0, 0, 224, 224}, Label::kStressed}};
  const auto windows = extract_windows(a, img);
  ASSERT_EQ(windows.size(), 1u);
  EXPECT_EQ(windows[0].id, "scene#0");
  EXPECT_EQ(windows[0].label, Label::kStressed);
  EXPECT_EQ(windows[0].patch, img);
}

// Independent half-pixel bilinear reference.
double bilinear_reference(const Image& src, int out_h, int out_w, int y, int x, int c) {
  auto coord = [](int d, int in, int out) {
    return std::clamp((d + 0.5) * in / out - 0.5, 0.0, double(in - 1));
  };
  const double sy = coord(y, src.height, out_h), sx = coord(x, src.width, out_w);
  const int y0 = int(std::floor(sy)), x0 = int(std::floor(sx));
  const int y1 = std::min(y0 + 1, src.height - 1), x1 = std::min(x0 + 1, src.width - 1);
  const double fy = sy - y0, fx = sx - x0;
  return (1 - fy) * ((1 - fx) * src.at(y0, x0, c) + fx * src.at(y0, x1, c)) +
         fy * ((1 - fx) * src.at(y1, x0, c) + fx * src.at(y1, x1, c));
}

TEST(Extract, CropThenBilinearMatchesReference) {
  const Image img = random_image(60, 70, 2);
  Annotation a;
  a.source_image = "scene.png";
  a.boxes = {{{10, 5, 50, 45}, Label::kHealthy}};
  const Sample s = extract_windows(a, img, 64, 48)[0];
  const Image cropped = crop(img, a.boxes[0].box);
  ASSERT_EQ(cropped.height, 40);
  ASSERT_EQ(cropped.width, 40);
  EXPECT_EQ(cropped.at(0, 0, 1), img.at(5, 10, 1));
  ASSERT_EQ(s.patch.height, 64);
  ASSERT_EQ(s.patch.width, 48);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 48; ++x) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_LE(std::abs(s.patch.at(y, x, c) - bilinear_reference(cropped, 64, 48, y, x, c)),
                  0.5 + 1e-9);
      }
    }
  }
}

TEST(Extract, DownscaleByTwoAveragesPairs) {
  Image img(2, 2);
  for (int c = 0; c < 3; ++c) {
    img.at(0, 0, c) = 0;
    img.at(0, 1, c) = 100;
    img.at(1, 0, c) = 200;
    img.at(1, 1, c) = 40;
  }
  EXPECT_EQ(resize_bilinear(img, 1, 1).at(0, 0, 0), 85);
  EXPECT_THROW(resize_bilinear(img, 0, 1), ValidationError);
  EXPECT_THROW(crop(img, {0, 0, 3, 1}), ValidationError);
}

TEST(ImageIo, PngRoundTripAndMissingFile) {
  testing::TempDir dir("image-io");
  const Image img = random_image(9, 13, 3);
  write_png(img, dir / "a.png");
  EXPECT_EQ(read_image(dir / "a.png"), img);
  EXPECT_THROW(read_image(dir / "missing.png"), IoError);
}

TEST(Augment, RescaleMapsEveryByteExactly) {
  Image img(1, 256);
  for (int v = 0; v < 256; ++v) {
    for (int c = 0; c < 3; ++c) img.at(0, v, c) = static_cast<uint8_t>(v);
  }
  const auto out = rescale_image(img);
  for (int v = 0; v < 256; ++v) {
    EXPECT_EQ(out[v * 3], static_cast<float>(v / 255.0)) << v;
  }
  EXPECT_EQ(out.back(), 1.0f);
  EXPECT_EQ(out.front(), 0.0f);
}

TEST(Augment, IdentityDrawOnlyRescales) {
  const Image img = random_image(17, 11, 4);
  EXPECT_EQ(apply_augmentation(img, AffineDraw{}, 1.0 / 255.0), rescale_image(img));
}

TEST(Augment, FlipsMirrorPixels) {
  Image img(2, 2);
  img.at(0, 0, 0) = 1;
  img.at(0, 1, 0) = 2;
  img.at(1, 0, 0) = 3;
  img.at(1, 1, 0) = 4;
  AffineDraw h;
  h.flip_horizontal = true;
  auto out = apply_augmentation(img, h, 1.0);
  EXPECT_EQ((std::vector<float>{out[0], out[3], out[6], out[9]}),
            (std::vector<float>{2, 1, 4, 3}));
  AffineDraw v;
  v.flip_vertical = true;
  out = apply_augmentation(img, v, 1.0);
  EXPECT_EQ((std::vector<float>{out[0], out[3], out[6], out[9]}),
            (std::vector<float>{3, 4, 1, 2}));
}

TEST(Augment, OutputsStayInRangeWithSourcePixelsOnly) {
  const AugmentationConfig config;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const Image img = random_image(12, 12, seed);
    std::set<float> allowed;
    for (uint8_t p : img.pixels) allowed.insert(static_cast<float>(p * config.rescale));
    Rng rng(seed);
    const auto out = augment(img, config, rng);
    ASSERT_EQ(out.size(), img.pixels.size());
    for (float v : out) {
      EXPECT_TRUE(v >= 0.0f && v <= 1.0f);
      EXPECT_TRUE(allowed.contains(v));
    }
  }
}

TEST(Augment, DrawsRespectRanges) {
  const AugmentationConfig config;
  Rng rng(11);
  int hflips = 0;
  for (int i = 0; i < 2000; ++i) {
    const AffineDraw d = draw_augmentation(config, 64, 32, rng);
    EXPECT_LE(std::abs(d.rotation_degrees), 30.0);
    EXPECT_LE(std::abs(d.shift_x), 0.2 * 32 + 1e-9);
    EXPECT_LE(std::abs(d.shift_y), 0.2 * 64 + 1e-9);
    EXPECT_LE(std::abs(d.shear), 0.2);
    EXPECT_EQ(d.zoom, 1.0);
    hflips += d.flip_horizontal;
  }
  EXPECT_GT(hflips, 850);
  EXPECT_LT(hflips, 1150);
}

TEST(Augment, SeededAndIndependentOfCallOrder) {
  const Image img = random_image(16, 16, 5);
  Rng a(augmentation_seed(1, "x#0", 2)), b(augmentation_seed(1, "x#0", 2));
  EXPECT_EQ(augment(img, {}, a), augment(img, {}, b));
  EXPECT_NE(augmentation_seed(1, "x#0", 2), augmentation_seed(1, "x#0", 3));
  EXPECT_NE(augmentation_seed(1, "x#0", 2), augmentation_seed(1, "x#1", 2));
  EXPECT_NE(augmentation_seed(1, "x#0", 2), augmentation_seed(2, "x#0", 2));
}

TEST(Augment, ConfigJsonAndValidation) {
  AugmentationConfig c;
  c.zoom_range = 0.1;
  c.vertical_flip = false;
  EXPECT_EQ(augmentation_from_json(to_json(c)), c);
  EXPECT_THROW(augmentation_from_json(nlohmann::json{{"rotation", 3}}), ConfigError);
  c.rescale = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Synth, DeterministicBalancedAndSeparable) {
  SynthConfig config;
  const auto a = synth_samples(config, Split::kTrain);
  const auto b = synth_samples(config, Split::kTrain);
  ASSERT_EQ(a.size(), 200u);
  int stressed = 0;
  double green[2] = {0, 0};
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].patch, b[i].patch);
    const bool s = a[i].label == Label::kStressed;
    stressed += s;
    double g = 0;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) g += a[i].patch.at(y, x, 1);
    }
    green[s] += g / (64 * 64);
  }
  EXPECT_EQ(stressed, 100);
  EXPECT_GT(green[0] / 100 - green[1] / 100, 30.0);
  config.seed = 8;
  EXPECT_NE(synth_samples(config, Split::kTrain)[0].patch, a[0].patch);
  EXPECT_NE(synth_samples(SynthConfig{}, Split::kTest)[0].id, a[0].id);
}

TEST(Synth, LabelsRoundTheBalance) {
  const auto labels = synth_labels(7, 0.3, 1);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), Label::kStressed), 2);
  SynthConfig bad;
  bad.class_balance = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Split, StratifiedCountsAndDisjointness) {
  std::vector<Label> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i % 5 < 3 ? Label::kStressed : Label::kHealthy);
  const SplitIndices s = split_validation(labels, 0.1, 3);
  int vs = 0, vh = 0;
  for (size_t i : s.validation) (labels[i] == Label::kStressed ? vs : vh)++;
  EXPECT_EQ(vs, 6);
  EXPECT_EQ(vh, 4);
  std::set<size_t> all(s.train.begin(), s.train.end());
  for (size_t i : s.validation) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 100u);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  const SplitIndices again = split_validation(labels, 0.1, 3);
  EXPECT_EQ(again.validation, s.validation);
  EXPECT_NE(split_validation(labels, 0.1, 4).validation, s.validation);
}

TEST(Split, RejectsUnstratifiableInput) {
  std::vector<Label> labels(10, Label::kHealthy);
  labels[0] = Label::kStressed;
  EXPECT_THROW(split_validation(labels, 0.1, 0), ValidationError);
  EXPECT_THROW(split_validation(labels, 0.0, 0), ConfigError);
}

TEST(Manifest, RoundTripWithQuoting) {
  DatasetManifest m;
  m.entries = {{"a#0", "patches/train/a_0.png", Label::kStressed, Split::kTrain},
               {"b,\"odd\"", "patches/test/b.png", Label::kHealthy, Split::kTest}};
  const std::string text = format_manifest(m);
  EXPECT_EQ(text.substr(0, text.find('\n')), "id,path,label,split");
  EXPECT_NE(text.find("\"b,\"\"odd\"\"\""), std::string::npos) << text;
  EXPECT_EQ(parse_manifest_text(text).entries, m.entries);
  EXPECT_EQ(m.filter(Split::kTest).entries.size(), 1u);
}

TEST(Manifest, RejectsMalformedRows) {
  const std::string header = "id,path,label,split\n";
  EXPECT_THROW(parse_manifest_text("id,path\n"), ParseError);
  EXPECT_THROW(parse_manifest_text(header + "a,p.png,2,train\n"), ParseError);
  EXPECT_THROW(parse_manifest_text(header + "a,p.png,1,holdout\n"), ParseError);
  EXPECT_THROW(parse_manifest_text(header + "a,p.png,1\n"), ParseError);
  EXPECT_THROW(parse_manifest_text(header + "a,p.png,1,train\na,q.png,0,test\n"),
               ValidationError);
  EXPECT_THROW(read_manifest("/nonexistent/manifest.csv"), IoError);
}

TEST(Manifest, SynthDatasetLoadsBack) {
  testing::TempDir dir("synth-dataset");
  SynthConfig config;
  config.n_train = 4;
  config.n_test = 2;
  config.image_size = 8;
  const DatasetManifest m = synth_dataset(config, dir.path());
  const DatasetManifest read = read_manifest(dir / "manifest.csv");
  EXPECT_EQ(read.entries, m.entries);
  const auto samples = load_samples(read.filter(Split::kTrain), dir.path(), 8, 8);
  const auto direct = synth_samples(config, Split::kTrain);
  ASSERT_EQ(samples.size(), 4u);
  for (size_t i = 0; i < 4; ++i) EXPECT_EQ(samples[i].patch, direct[i].patch);
}

}  // namespace
}  // namespace mrdlinet
