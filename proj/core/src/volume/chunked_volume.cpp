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

#include "emflow/volume/chunked_volume.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>

namespace emflow::volume {
namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "chunk files assume a little-endian host");

namespace {

constexpr const char* kManifestName = "info.json";

json vec_json(const Vec3i& v) { return json::array({v.x, v.y, v.z}); }
json vec_json(const Vec3d& v) { return json::array({v.x, v.y, v.z}); }
Vec3i vec3i_from(const json& j) { return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>(), j.at(2).get<std::int64_t>()}; }
Vec3d vec3d_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::mutex& chunk_mutex(const fs::path& path) {
  static std::array<std::mutex, 64> stripes;
  return stripes[std::hash<std::string>{}(path.string()) % stripes.size()];
}

std::vector<std::uint8_t> read_file(const fs::path& path, std::size_t expected) {
  std::vector<std::uint8_t> bytes(expected, 0);
  std::ifstream in(path, std::ios::binary);
  if (!in) return bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(expected));
  if (static_cast<std::size_t>(in.gcount()) != expected) {
    throw Error("chunk file '" + path.string() + "' is truncated");
  }
  return bytes;
}

void write_file_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write chunk '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write on chunk '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

// Copies the intersection of a chunk box and a cutout box between a chunk
// buffer and a cutout buffer.
void copy_box(Vec3i isect_lo, Vec3i isect_hi, Vec3i chunk_origin, Vec3i chunk_dims,
              Vec3i cut_origin, Vec3i cut_dims, std::size_t elem, std::uint8_t* chunk,
              std::uint8_t* cut, bool to_chunk) {
  const std::size_t run = static_cast<std::size_t>(isect_hi.x - isect_lo.x) * elem;
  for (std::int64_t z = isect_lo.z; z < isect_hi.z; ++z) {
    for (std::int64_t y = isect_lo.y; y < isect_hi.y; ++y) {
      const auto ci = static_cast<std::size_t>(
          ((z - chunk_origin.z) * chunk_dims.y + (y - chunk_origin.y)) * chunk_dims.x +
          (isect_lo.x - chunk_origin.x));
      const auto vi = static_cast<std::size_t>(
          ((z - cut_origin.z) * cut_dims.y + (y - cut_origin.y)) * cut_dims.x +
          (isect_lo.x - cut_origin.x));
      if (to_chunk) {
        std::memcpy(chunk + ci * elem, cut + vi * elem, run);
      } else {
        std::memcpy(cut + vi * elem, chunk + ci * elem, run);
      }
    }
  }
}

}  // namespace

Vec3i next_level_dims(Vec3i dims, bool downsample_z) {
  return {ceil_div(dims.x, 2), ceil_div(dims.y, 2), downsample_z ? ceil_div(dims.z, 2) : dims.z};
}

Vec3i ChunkedVolumeManifest::chunk_grid(int level) const {
  const Vec3i& d = dims.at(static_cast<std::size_t>(level));
  return {ceil_div(d.x, chunk_size.x), ceil_div(d.y, chunk_size.y), ceil_div(d.z, chunk_size.z)};
}

void ChunkedVolumeManifest::validate() const {
  if (num_levels < 1) throw InvalidArgument("num_levels must be >= 1");
  if (dims.size() != static_cast<std::size_t>(num_levels) ||
      voxel_size.size() != static_cast<std::size_t>(num_levels)) {
    throw InvalidArgument("manifest needs dims and voxel_size for each of " +
                          std::to_string(num_levels) + " levels");
  }
  for (int a = 0; a < 3; ++a) {
    if (chunk_size[a] < 1) throw InvalidArgument("chunk_size components must be >= 1");
  }
  for (int l = 0; l < num_levels; ++l) {
    const auto& d = dims[static_cast<std::size_t>(l)];
    const auto& v = voxel_size[static_cast<std::size_t>(l)];
    if (d.x < 1 || d.y < 1 || d.z < 1) throw InvalidArgument("level dims must be >= 1");
    if (v.x <= 0 || v.y <= 0 || v.z <= 0) throw InvalidArgument("voxel_size must be > 0");
    if (l > 0 && d != next_level_dims(dims[static_cast<std::size_t>(l - 1)], downsample_z)) {
      throw InvalidArgument("level " + std::to_string(l) + " dims " + to_string(d) +
                            " are not the halving of level " + std::to_string(l - 1));
    }
  }
}

ChunkedVolumeManifest make_manifest(std::string dataset_name, DType dtype, Vec3i dims,
                                    Vec3d voxel_size, Vec3i chunk_size, int num_levels,
                                    bool downsample_z) {
  ChunkedVolumeManifest m;
  m.dataset_name = std::move(dataset_name);
  m.dtype = dtype;
  m.chunk_size = chunk_size;
  m.downsample_z = downsample_z;
  m.dims.push_back(dims);
  m.voxel_size.push_back(voxel_size);
  auto more = [&] {
    if (num_levels > 0) return static_cast<int>(m.dims.size()) < num_levels;
    const Vec3i& d = m.dims.back();
    return std::max({d.x, d.y, d.z}) > 512 && m.dims.size() < 32;
  };
  while (more()) {
    const Vec3i next = next_level_dims(m.dims.back(), downsample_z);
    const Vec3d& v = m.voxel_size.back();
    m.dims.push_back(next);
    m.voxel_size.push_back({v.x * 2, v.y * 2, downsample_z ? v.z * 2 : v.z});
  }
  m.num_levels = static_cast<int>(m.dims.size());
  m.validate();
  return m;
}

void to_json(json& j, const ChunkedVolumeManifest& m) {
  json dims = json::array();
  json sizes = json::array();
  for (const auto& d : m.dims) dims.push_back(vec_json(d));
  for (const auto& v : m.voxel_size) sizes.push_back(vec_json(v));
  j = json{{"dataset_name", m.dataset_name},
           {"dtype", std::string(dtype_name(m.dtype))},
           {"chunk_size", vec_json(m.chunk_size)},
           {"num_levels", m.num_levels},
           {"downsample_z", m.downsample_z},
           {"dims", dims},
           {"voxel_size", sizes}};
}

void from_json(const json& j, ChunkedVolumeManifest& m) {
  m.dataset_name = j.at("dataset_name").get<std::string>();
  m.dtype = parse_dtype(j.at("dtype").get<std::string>());
  m.chunk_size = vec3i_from(j.at("chunk_size"));
  m.num_levels = j.at("num_levels").get<int>();
  m.downsample_z = j.value("downsample_z", true);
  m.dims.clear();
  m.voxel_size.clear();
  for (const auto& d : j.at("dims")) m.dims.push_back(vec3i_from(d));
  for (const auto& v : j.at("voxel_size")) m.voxel_size.push_back(vec3d_from(v));
}

bool ChunkedVolume::exists(const fs::path& root) { return fs::exists(root / kManifestName); }

ChunkedVolume ChunkedVolume::create(const ChunkedVolumeManifest& manifest, const fs::path& root) {
  manifest.validate();
  if (exists(root)) {
    ChunkedVolume existing = open(root);
    if (!(existing.manifest() == manifest)) {
      throw Conflict("dataset at '" + root.string() + "' exists with a different manifest");
    }
    return existing;
  }
  fs::create_directories(root);
  for (int l = 0; l < manifest.num_levels; ++l) fs::create_directories(root / std::to_string(l));
  const fs::path tmp = root / "info.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write manifest in '" + root.string() + "'");
    out << json(manifest).dump(2) << "\n";
  }
  fs::rename(tmp, root / kManifestName);
  return ChunkedVolume(manifest, root);
}

ChunkedVolume ChunkedVolume::open(const fs::path& root) {
  std::ifstream in(root / kManifestName);
  if (!in) throw NotFound("no chunked volume at '" + root.string() + "'");
  ChunkedVolumeManifest m = json::parse(in).get<ChunkedVolumeManifest>();
  m.validate();
  return ChunkedVolume(std::move(m), root);
}

Vec3i ChunkedVolume::dims(int level) const {
  if (level < 0 || level >= manifest_.num_levels) {
    throw InvalidArgument("level " + std::to_string(level) + " does not exist");
  }
  return manifest_.dims[static_cast<std::size_t>(level)];
}

fs::path ChunkedVolume::chunk_path(int level, Vec3i c) const {
  return root_ / std::to_string(level) /
         (std::to_string(c.x) + "-" + std::to_string(c.y) + "-" + std::to_string(c.z) + ".bin");
}

void ChunkedVolume::check_region(Vec3i offset, Vec3i region, int level) const {
  const Vec3i d = dims(level);
  for (int a = 0; a < 3; ++a) {
    if (offset[a] < 0 || region[a] < 1 || offset[a] + region[a] > d[a]) {
      throw InvalidArgument(std::string("region out of bounds on axis ") + kAxisNames[a] +
                            ": offset " + std::to_string(offset[a]) + " + size " +
                            std::to_string(region[a]) + " exceeds level " +
                            std::to_string(level) + " extent " + std::to_string(d[a]));
    }
  }
}

std::vector<Vec3i> ChunkedVolume::chunks_intersecting(Vec3i offset, Vec3i region, int level) const {
  check_region(offset, region, level);
  const Vec3i& cs = manifest_.chunk_size;
  std::vector<Vec3i> out;
  for (std::int64_t cz = offset.z / cs.z; cz <= (offset.z + region.z - 1) / cs.z; ++cz)
    for (std::int64_t cy = offset.y / cs.y; cy <= (offset.y + region.y - 1) / cs.y; ++cy)
      for (std::int64_t cx = offset.x / cs.x; cx <= (offset.x + region.x - 1) / cs.x; ++cx)
        out.push_back({cx, cy, cz});
  return out;
}

void ChunkedVolume::write_raw(Vec3i offset, Vec3i region, DType dtype, const void* data, int level) {
  if (dtype != manifest_.dtype) {
    throw InvalidArgument("dtype mismatch: dataset is " + std::string(dtype_name(manifest_.dtype)) +
                          ", grid is " + std::string(dtype_name(dtype)));
  }
  const Vec3i d = dims(level);
  const std::size_t elem = dtype_bytes(dtype);
  auto* cut = const_cast<std::uint8_t*>(static_cast<const std::uint8_t*>(data));
  for (const Vec3i& c : chunks_intersecting(offset, region, level)) {
    const Vec3i origin{c.x * manifest_.chunk_size.x, c.y * manifest_.chunk_size.y,
                       c.z * manifest_.chunk_size.z};
    const Vec3i cdims{std::min(manifest_.chunk_size.x, d.x - origin.x),
                      std::min(manifest_.chunk_size.y, d.y - origin.y),
                      std::min(manifest_.chunk_size.z, d.z - origin.z)};
    const Vec3i lo{std::max(origin.x, offset.x), std::max(origin.y, offset.y),
                   std::max(origin.z, offset.z)};
    const Vec3i hi{std::min(origin.x + cdims.x, offset.x + region.x),
                   std::min(origin.y + cdims.y, offset.y + region.y),
                   std::min(origin.z + cdims.z, offset.z + region.z)};
    const fs::path path = chunk_path(level, c);
    std::lock_guard lock(chunk_mutex(path));
    auto bytes = read_file(path, static_cast<std::size_t>(cdims.volume()) * elem);
    copy_box(lo, hi, origin, cdims, offset, region, elem, bytes.data(), cut, true);
    write_file_atomic(path, bytes);
  }
}

void ChunkedVolume::read_raw(Vec3i offset, Vec3i region, DType dtype, void* data, int level) const {
  if (dtype != manifest_.dtype) {
    throw InvalidArgument("dtype mismatch: dataset is " + std::string(dtype_name(manifest_.dtype)) +
                          ", requested " + std::string(dtype_name(dtype)));
  }
  if (!exists(root_)) throw NotFound("dataset '" + root_.string() + "' is missing");
  const Vec3i d = dims(level);
  const std::size_t elem = dtype_bytes(dtype);
  auto* cut = static_cast<std::uint8_t*>(data);
  std::memset(cut, 0, static_cast<std::size_t>(region.volume()) * elem);
  for (const Vec3i& c : chunks_intersecting(offset, region, level)) {
    const fs::path path = chunk_path(level, c);
    if (!fs::exists(path)) continue;
    const Vec3i origin{c.x * manifest_.chunk_size.x, c.y * manifest_.chunk_size.y,
                       c.z * manifest_.chunk_size.z};
    const Vec3i cdims{std::min(manifest_.chunk_size.x, d.x - origin.x),
                      std::min(manifest_.chunk_size.y, d.y - origin.y),
                      std::min(manifest_.chunk_size.z, d.z - origin.z)};
    const Vec3i lo{std::max(origin.x, offset.x), std::max(origin.y, offset.y),
                   std::max(origin.z, offset.z)};
    const Vec3i hi{std::min(origin.x + cdims.x, offset.x + region.x),
                   std::min(origin.y + cdims.y, offset.y + region.y),
                   std::min(origin.z + cdims.z, offset.z + region.z)};
    auto bytes = read_file(path, static_cast<std::size_t>(cdims.volume()) * elem);
    copy_box(lo, hi, origin, cdims, offset, region, elem, bytes.data(), cut, false);
  }
}

void ChunkedVolume::write_cutout(Vec3i offset, const VoxelGrid& grid, int level) {
  std::visit([&](const auto& g) { write(offset, g, level); }, grid);
}

VoxelGrid ChunkedVolume::read_cutout(Vec3i offset, Vec3i region, int level) const {
  if (manifest_.dtype == DType::gray8) return read<std::uint8_t>(offset, region, level);
  return read<std::uint32_t>(offset, region, level);
}

namespace {

GrayGrid reduce_mean(const GrayGrid& in, Vec3i out_dims, Vec3i factor) {
  GrayGrid out(out_dims);
  for (std::int64_t z = 0; z < out_dims.z; ++z)
    for (std::int64_t y = 0; y < out_dims.y; ++y)
      for (std::int64_t x = 0; x < out_dims.x; ++x) {
        std::uint32_t sum = 0, count = 0;
        for (std::int64_t dz = 0; dz < factor.z; ++dz)
          for (std::int64_t dy = 0; dy < factor.y; ++dy)
            for (std::int64_t dx = 0; dx < factor.x; ++dx) {
              const std::int64_t ix = x * factor.x + dx, iy = y * factor.y + dy, iz = z * factor.z + dz;
              if (!in.contains(ix, iy, iz)) continue;
              sum += in(ix, iy, iz);
              ++count;
            }
        out(x, y, z) = static_cast<std::uint8_t>((sum + count / 2) / count);
      }
  return out;
}

LabelGrid reduce_mode(const LabelGrid& in, Vec3i out_dims, Vec3i factor) {
  LabelGrid out(out_dims);
  std::vector<std::uint32_t> block;
  for (std::int64_t z = 0; z < out_dims.z; ++z)
    for (std::int64_t y = 0; y < out_dims.y; ++y)
      for (std::int64_t x = 0; x < out_dims.x; ++x) {
        block.clear();
        for (std::int64_t dz = 0; dz < factor.z; ++dz)
          for (std::int64_t dy = 0; dy < factor.y; ++dy)
            for (std::int64_t dx = 0; dx < factor.x; ++dx) {
              const std::int64_t ix = x * factor.x + dx, iy = y * factor.y + dy, iz = z * factor.z + dz;
              if (in.contains(ix, iy, iz)) block.push_back(in(ix, iy, iz));
            }
        std::sort(block.begin(), block.end());
        std::uint32_t best = block.front();
        std::size_t best_count = 0;
        for (std::size_t i = 0; i < block.size();) {
          std::size_t j = i;
          while (j < block.size() && block[j] == block[i]) ++j;
          if (j - i > best_count) {  // ascending scan keeps the smallest label on ties
            best_count = j - i;
            best = block[i];
          }
          i = j;
        }
        out(x, y, z) = best;
      }
  return out;
}

}  // namespace

void ChunkedVolume::downsample(int source, DownsampleMethod method) {
  if (source < 0 || source + 1 >= manifest_.num_levels) {
    throw InvalidArgument("cannot downsample level " + std::to_string(source) + " of a " +
                          std::to_string(manifest_.num_levels) + "-level volume");
  }
  if (method == DownsampleMethod::mean && manifest_.dtype != DType::gray8) {
    throw InvalidArgument("mean downsampling requires gray8 data");
  }
  if (method == DownsampleMethod::mode && manifest_.dtype != DType::label32) {
    throw InvalidArgument("mode downsampling requires label32 data");
  }
  const Vec3i factor{2, 2, manifest_.downsample_z ? 2 : 1};
  const Vec3i in_dims = dims(source);
  const Vec3i out_dims = dims(source + 1);
  const Vec3i& cs = manifest_.chunk_size;
  for (std::int64_t oz = 0; oz < out_dims.z; oz += cs.z)
    for (std::int64_t oy = 0; oy < out_dims.y; oy += cs.y)
      for (std::int64_t ox = 0; ox < out_dims.x; ox += cs.x) {
        const Vec3i out_off{ox, oy, oz};
        const Vec3i out_size{std::min(cs.x, out_dims.x - ox), std::min(cs.y, out_dims.y - oy),
                             std::min(cs.z, out_dims.z - oz)};
        const Vec3i in_off{ox * factor.x, oy * factor.y, oz * factor.z};
        const Vec3i in_size{std::min(out_size.x * factor.x, in_dims.x - in_off.x),
                            std::min(out_size.y * factor.y, in_dims.y - in_off.y),
                            std::min(out_size.z * factor.z, in_dims.z - in_off.z)};
        bool any = false;
        for (const Vec3i& c : chunks_intersecting(in_off, in_size, source)) {
          if (fs::exists(chunk_path(source, c))) {
            any = true;
            break;
          }
        }
        if (!any) continue;  // sparse: all-zero input stays absent
        if (method == DownsampleMethod::mean) {
          write(out_off, reduce_mean(read<std::uint8_t>(in_off, in_size, source), out_size, factor),
                source + 1);
        } else {
          write(out_off,
                reduce_mode(read<std::uint32_t>(in_off, in_size, source), out_size, factor),
                source + 1);
        }
      }
}

void ChunkedVolume::build_pyramid() {
  const auto method =
      manifest_.dtype == DType::gray8 ? DownsampleMethod::mean : DownsampleMethod::mode;
  for (int l = 0; l + 1 < manifest_.num_levels; ++l) downsample(l, method);
}

}  // namespace emflow::volume
