// Copyright 2026 The emflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emflow/volume/png_io.hpp"

#include <png.h>

#include <cstring>

namespace emflow::volume {
namespace {

struct PngImage {
  png_image img;
  PngImage() {
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

template <class Pixel>
void prepare(PngImage& p, const Image<Pixel>& image, png_uint_32 format) {
  if (image.width() < 1 || image.height() < 1) throw InvalidArgument("cannot encode an empty image");
  p.img.width = static_cast<png_uint_32>(image.width());
  p.img.height = static_cast<png_uint_32>(image.height());
  p.img.format = format;
}

template <class Pixel>
void write_file(const std::filesystem::path& path, const Image<Pixel>& image, png_uint_32 format) {
  PngImage p;
  prepare(p, image, format);
  if (!png_image_write_to_file(&p.img, path.c_str(), 0, image.data().data(), 0, nullptr)) {
    throw Error("writing PNG '" + path.string() + "' failed: " + p.img.message);
  }
}

template <class Pixel>
std::vector<std::uint8_t> encode_memory(const Image<Pixel>& image, png_uint_32 format) {
  PngImage p;
  prepare(p, image, format);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&p.img, nullptr, &size, 0, image.data().data(), 0, nullptr)) {
    throw Error(std::string("PNG size query failed: ") + p.img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&p.img, out.data(), &size, 0, image.data().data(), 0, nullptr)) {
    throw Error(std::string("PNG encoding failed: ") + p.img.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

GrayImage read_png_gray(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFound("missing PNG '" + path.string() + "'");
  PngImage p;
  if (!png_image_begin_read_from_file(&p.img, path.c_str())) {
    throw Error("reading PNG '" + path.string() + "' failed: " + p.img.message);
  }
  p.img.format = PNG_FORMAT_GRAY;
  GrayImage image(p.img.width, p.img.height);
  if (!png_image_finish_read(&p.img, nullptr, image.data().data(), 0, nullptr)) {
    throw Error("decoding PNG '" + path.string() + "' failed: " + p.img.message);
  }
  return image;
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_file(path, image, PNG_FORMAT_GRAY);
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  static_assert(sizeof(Rgb) == 3);
  write_file(path, image, PNG_FORMAT_RGB);
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  return encode_memory(image, PNG_FORMAT_GRAY);
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  return encode_memory(image, PNG_FORMAT_RGB);
}

}  // namespace emflow::volume
