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

#include "emflow/segmenter/flood_fill.hpp"

#include <vector>

#include "neighborhood.hpp"

namespace emflow::segmenter {
namespace {

class Filler {
 public:
  Filler(const GrayGrid& gray, const LabelGrid* mask, std::uint8_t t_low)
      : gray_(gray), mask_(mask), t_low_(t_low), labels_(gray.dims(), gray.voxel_size()) {
    if (mask_ && mask_->dims() != gray.dims()) throw InvalidArgument("mask dims differ from the subvolume dims");
  }

  bool open(std::size_t idx) const {
    return labels_[idx] == 0 && gray_[idx] >= t_low_ && (mask_ == nullptr || (*mask_)[idx] == 0);
  }

  void seed(std::size_t idx) {
    if (!open(idx)) return;
    const std::uint32_t lab = ++next_;
    labels_[idx] = lab;
    queue_.clear();
    queue_.push_back(idx);
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      detail::for_each_face_neighbor(gray_.dims(), queue_[head], [&](std::size_t n) {
        if (!open(n)) return;
        labels_[n] = lab;
        queue_.push_back(n);
      });
    }
  }

  LabelGrid take() { return std::move(labels_); }

 private:
  const GrayGrid& gray_;
  const LabelGrid* mask_;
  std::uint8_t t_low_;
  LabelGrid labels_;
  std::uint32_t next_ = 0;
  std::vector<std::size_t> queue_;
};

std::int64_t first_multiple_at_or_after(std::int64_t origin, std::int64_t spacing) {
  const std::int64_t r = ((origin % spacing) + spacing) % spacing;
  return r == 0 ? 0 : spacing - r;
}

}  // namespace

LabelGrid flood_fill_segment(const GrayGrid& gray, const LabelGrid* mask, const SeedList& seeds, std::uint8_t t_low) {
  validate_seeds(seeds, gray.dims());
  Filler f(gray, mask, t_low);
  for (const auto& s : seeds) f.seed(gray.index(s.position.x, s.position.y, s.position.z));
  return f.take();
}

LabelGrid flood_fill_segment(const GrayGrid& gray, const LabelGrid* mask, const GridSeeds& policy,
                             std::uint8_t t_low) {
  if (policy.spacing < 1) throw InvalidArgument("seed lattice spacing must be >= 1");
  Filler f(gray, mask, t_low);
  const auto& d = gray.dims();
  const std::int64_t s = policy.spacing;
  for (std::int64_t z = first_multiple_at_or_after(policy.origin.z, s); z < d.z; z += s)
    for (std::int64_t y = first_multiple_at_or_after(policy.origin.y, s); y < d.y; y += s)
      for (std::int64_t x = first_multiple_at_or_after(policy.origin.x, s); x < d.x; x += s)
        f.seed(gray.index(x, y, z));
  return f.take();
}

LabelGrid connected_components(const volume::Grid3<std::uint8_t>& binary) {
  return flood_fill_segment(binary, nullptr, GridSeeds{1, {}}, 1);
}

}  // namespace emflow::segmenter
