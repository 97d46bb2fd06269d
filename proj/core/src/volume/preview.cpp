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

#include "emflow/volume/preview.hpp"

#include <bit>

#include "emflow/volume/png_io.hpp"

namespace emflow::volume {

std::int64_t Preview::width() const {
  return std::visit([](const auto& im) { return im.width(); }, image);
}

std::int64_t Preview::height() const {
  return std::visit([](const auto& im) { return im.height(); }, image);
}

std::vector<std::uint8_t> Preview::png() const {
  return std::visit([](const auto& im) { return encode_png(im); }, image);
}

Rgb label_color(std::uint32_t label) {
  if (label == 0) return {0, 0, 0};
  // splitmix64 finalizer
  std::uint64_t h = label + 0x9E3779B97F4A7C15ull;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
  h ^= h >> 31;
  // Keep colors away from black so labels never look like background.
  auto channel = [&](int shift) { return static_cast<std::uint8_t>(64 + ((h >> shift) & 0xFF) % 192); };
  return {channel(0), channel(8), channel(16)};
}

RgbImage colorize(const Image<std::uint32_t>& labels) {
  RgbImage out(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) out.data()[i] = label_color(labels.data()[i]);
  return out;
}

bool is_power_of_two(int v) { return v >= 1 && std::has_single_bit(static_cast<unsigned>(v)); }

Preview make_preview(const ChunkedVolume& volume, const std::string& stage,
                     std::int64_t section_index, int scale) {
  if (!is_power_of_two(scale)) {
    throw InvalidArgument("preview scale must be a power of two, got " + std::to_string(scale));
  }
  const int level = std::countr_zero(static_cast<unsigned>(scale));
  const auto& m = volume.manifest();
  if (level >= m.num_levels) {
    throw InvalidArgument("preview scale " + std::to_string(scale) + " needs pyramid level " +
                          std::to_string(level) + " but only " + std::to_string(m.num_levels) +
                          " exist");
  }
  const Vec3i d0 = volume.dims(0);
  if (section_index < 0 || section_index >= d0.z) {
    throw InvalidArgument("section " + std::to_string(section_index) + " out of range [0," +
                          std::to_string(d0.z) + ")");
  }
  const std::int64_t z = m.downsample_z ? (section_index >> level) : section_index;
  const Vec3i d = volume.dims(level);
  Preview p;
  p.stage = stage;
  p.section_index = section_index;
  p.scale = scale;
  if (m.dtype == DType::gray8) {
    p.image = slice_z(volume.read<std::uint8_t>({0, 0, z}, {d.x, d.y, 1}, level), 0);
  } else {
    p.image = colorize(slice_z(volume.read<std::uint32_t>({0, 0, z}, {d.x, d.y, 1}, level), 0));
  }
  return p;
}

GrayImage downscale_pow2(const GrayImage& image, int scale) {
  if (!is_power_of_two(scale)) throw InvalidArgument("scale must be a power of two");
  GrayImage cur = image;
  for (int s = scale; s > 1; s /= 2) {
    GrayImage next(ceil_div(cur.width(), 2), ceil_div(cur.height(), 2));
    for (std::int64_t y = 0; y < next.height(); ++y)
      for (std::int64_t x = 0; x < next.width(); ++x) {
        std::uint32_t sum = 0, n = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx)
            if (cur.contains(2 * x + dx, 2 * y + dy)) {
              sum += cur(2 * x + dx, 2 * y + dy);
              ++n;
            }
        next(x, y) = static_cast<std::uint8_t>((sum + n / 2) / n);
      }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace emflow::volume
