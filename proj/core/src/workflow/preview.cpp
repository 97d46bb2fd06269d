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

#include "emflow/workflow/preview.hpp"

#include <algorithm>

#include "emflow/volume/png_io.hpp"

namespace emflow::workflow {
namespace fs = std::filesystem;

const std::vector<std::string>& preview_stages() {
  static const std::vector<std::string> stages{"montage", "aligned", "mask", "segmentation"};
  return stages;
}

volume::Preview dataset_preview(const DatasetLayout& layout, const std::string& stage, std::int64_t section,
                                int scale) {
  const auto& stages = preview_stages();
  if (std::find(stages.begin(), stages.end(), stage) == stages.end()) {
    throw InvalidArgument("no previews for stage '" + stage + "'");
  }
  if (!volume::is_power_of_two(scale)) throw InvalidArgument("preview scale must be a power of two");
  if (stage == "montage") {
    const auto path = layout.montage_image(section);
    if (!fs::exists(path)) throw NotFound("section " + std::to_string(section) + " has no montage yet");
    volume::Preview p;
    p.stage = stage;
    p.section_index = section;
    p.scale = scale;
    p.image = volume::downscale_pow2(volume::read_png_gray(path), scale);
    return p;
  }
  const fs::path root = stage == "aligned" ? layout.aligned_volume()
                        : stage == "mask"  ? layout.mask_volume()
                                           : layout.segmentation();
  if (!volume::ChunkedVolume::exists(root)) throw NotFound("dataset has no " + stage + " volume yet");
  return volume::make_preview(volume::ChunkedVolume::open(root), stage, section, scale);
}

}  // namespace emflow::workflow
