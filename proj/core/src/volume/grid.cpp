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

#include "emflow/volume/grid.hpp"

#include <string>

namespace emflow::volume {

std::string_view dtype_name(DType dtype) {
  switch (dtype) {
    case DType::gray8: return "gray8";
    case DType::label32: return "label32";
  }
  return "unknown";
}

DType parse_dtype(std::string_view name) {
  if (name == "gray8") return DType::gray8;
  if (name == "label32") return DType::label32;
  throw InvalidArgument("unknown dtype '" + std::string(name) + "'");
}

std::size_t dtype_bytes(DType dtype) { return dtype == DType::gray8 ? 1 : 4; }

DType dtype_of(const VoxelGrid& grid) {
  return std::holds_alternative<GrayGrid>(grid) ? DType::gray8 : DType::label32;
}

Vec3i dims_of(const VoxelGrid& grid) {
  return std::visit([](const auto& g) { return g.dims(); }, grid);
}

}  // namespace emflow::volume
