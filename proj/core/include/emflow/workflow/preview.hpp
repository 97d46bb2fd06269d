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

#pragma once

#include <string>
#include <vector>

#include "emflow/volume/preview.hpp"
#include "emflow/workflow/dataset.hpp"

namespace emflow::workflow {

/// Stages with previews: montage (the stitched section image), aligned,
/// mask and segmentation (slices of the chunked volumes).
const std::vector<std::string>& preview_stages();

/// Renders one section of a dataset stage at a power-of-two scale. Throws
/// NotFound when the stage has not produced its output yet and
/// InvalidArgument for an unknown stage, bad scale or section.
volume::Preview dataset_preview(const DatasetLayout& layout, const std::string& stage, std::int64_t section,
                                int scale);

}  // namespace emflow::workflow
