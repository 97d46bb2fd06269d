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

#include "emflow/workflow/stages.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>

#include "emflow/geometry/mesh.hpp"
#include "emflow/geometry/skeleton.hpp"
#include "emflow/imageops/elastic.hpp"
#include "emflow/imageops/montage.hpp"
#include "emflow/segmenter/flood_fill.hpp"
#include "emflow/segmenter/mask.hpp"
#include "emflow/segmenter/reconcile.hpp"
#include "emflow/segmenter/subvolume.hpp"
#include "emflow/volume/chunked_volume.hpp"
#include "emflow/volume/png_io.hpp"

namespace emflow::workflow {
namespace fs = std::filesystem;
using nlohmann::json;
using volume::ChunkedVolume;
using volume::GrayImage;
using volume::LabelGrid;

namespace {

constexpr int kPyramidLevels = 3;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("bad JSON in " + path.string() + ": " + e.what());
  }
}

// Writes through a temporary file so readers never see a partial document.
void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    out << j.dump(2) << "\n";
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

Vec3i vec3i(const json& j) { return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>(), j.at(2).get<std::int64_t>()}; }
json to_array(const Vec3i& v) { return json::array({v.x, v.y, v.z}); }

// Top-left anchored crop or zero pad.
GrayImage fit_canvas(const GrayImage& img, std::int64_t w, std::int64_t h) {
  GrayImage out(w, h, 0);
  for (std::int64_t y = 0; y < std::min(h, img.height()); ++y)
    for (std::int64_t x = 0; x < std::min(w, img.width()); ++x) out(x, y) = img(x, y);
  return out;
}

GrayImage load_section_canvas(const DatasetLayout& layout, const DatasetConfig& cfg, std::int64_t s) {
  const auto [w, h] = cfg.section_dims();
  const auto path = layout.montage_image(s);
  if (!fs::exists(path)) throw NotFound("section " + std::to_string(s) + " has no montage at " + path.string());
  return fit_canvas(volume::read_png_gray(path), w, h);
}

ChunkedVolume fresh_volume(const fs::path& root, const std::string& name, volume::DType dtype, Vec3i dims,
                           const DatasetConfig& cfg, int levels) {
  fs::remove_all(root);
  int max_levels = 1;
  for (Vec3i d = dims; std::max(d.x, d.y) > 1 && max_levels < levels; ++max_levels) {
    d = volume::next_level_dims(d, false);
  }
  const auto m = volume::make_manifest(name, dtype, dims, cfg.voxel_size, cfg.chunk_size, max_levels, false);
  return ChunkedVolume::create(m, root);
}

ChunkedVolume open_volume(const fs::path& root, const std::string& what) {
  if (!ChunkedVolume::exists(root)) throw NotFound(what + " volume missing at " + root.string());
  return ChunkedVolume::open(root);
}

segmenter::SubvolumeSpec find_spec(Vec3i dims, const json& p, Vec3i index) {
  for (const auto& s : segmenter::generate_grid(dims, vec3i(p.at("cube")), vec3i(p.at("overlap")))) {
    if (s.index == index) return s;
  }
  throw NotFound("subvolume " + to_string(index) + " is not in the grid of a " + to_string(dims) + " volume");
}

std::map<std::uint32_t, std::size_t> voxel_counts(const LabelGrid& labels) {
  std::map<std::uint32_t, std::size_t> out;
  for (auto v : labels.data())
    if (v != 0) ++out[v];
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

json default_stage_params() {
  const imageops::MontageParams mp;
  return {
      {"montage",
       {{"min_octave_px", mp.min_octave_px},
        {"max_octave_px", mp.max_octave_px},
        {"search_margin_frac", mp.search_margin_frac},
        {"ncc_accept_threshold", mp.ncc_accept_threshold},
        {"size_tolerance", imageops::kDefaultSizeTolerance}}},
      {"align", {{"grid_spacing", 32}, {"patch_radius", 12}, {"search_radius", 8}}},
      {"relax",
       {{"intra_stiffness", 1.0}, {"cross_stiffness", 1.0}, {"max_iters", 500}, {"step", 0.1}, {"eps", 0.01}}},
      {"mask",
       {{"blur_radius", 1},
        {"invert", true},
        {"floor", 0.7},
        {"seed_threshold", 0.85},
        {"min_seed_voxels", 50},
        {"level", 0}}},
      {"segment", {{"cube", {128, 128, 16}}, {"overlap", {32, 32, 4}}, {"t_low", 190}, {"lattice_spacing", 1}}},
      {"reconcile",
       {{"cube", {128, 128, 16}}, {"overlap", {32, 32, 4}}, {"merge_frac", 0.5}, {"merge_min_voxels", 10}}},
      {"mesh", {{"min_voxels", 50}}},
      {"skeletonize",
       {{"min_voxels", 50},
        {"scale", 5000.0},
        {"exponent", 16.0},
        {"invalidation_radius_factor", 2.0},
        {"min_path_length", 10.0},
        {"simplify_tolerance", 0.0}}},
  };
}

json stage_params(const std::string& stage, const json& overrides) {
  const auto defaults = default_stage_params();
  if (!defaults.contains(stage)) throw InvalidArgument("unknown stage '" + stage + "'");
  json p = defaults.at(stage);
  if (overrides.is_null()) return p;
  if (!overrides.is_object()) throw InvalidArgument(stage + " params must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    if (!p.contains(key)) throw InvalidArgument("unknown " + stage + " parameter '" + key + "'");
  }
  p.merge_patch(overrides);
  return p;
}

json run_montage_stage(const DatasetLayout& layout, std::int64_t section, const json& params) {
  const auto p = stage_params("montage", params);
  const auto cfg = layout.load_config();
  const auto manifest = volume::load_section_manifest(layout.section_manifest(section));
  if (manifest.rows != cfg.rows || manifest.cols != cfg.cols) {
    throw InvalidArgument("section " + std::to_string(section) + " tile layout differs from the dataset's");
  }
  imageops::MontageParams mp;
  mp.min_octave_px = p.at("min_octave_px").get<std::int64_t>();
  mp.max_octave_px = p.at("max_octave_px").get<std::int64_t>();
  mp.search_margin_frac = p.at("search_margin_frac").get<double>();
  mp.ncc_accept_threshold = p.at("ncc_accept_threshold").get<double>();
  mp.nominal_overlap_frac = manifest.nominal_overlap_frac;
  const auto result = imageops::montage_section(manifest, mp, p.at("size_tolerance").get<double>());
  fs::create_directories(layout.montage_image(section).parent_path());
  volume::write_png(layout.montage_image(section), result.canvas);
  json report = result.report;
  write_json(layout.montage_report(section), report);
  if (result.report.status == imageops::MontageStatus::fail) {
    const auto [w, h] = cfg.section_dims();
    throw Error("section " + std::to_string(section) + " montage failed the size check: canvas " +
                std::to_string(result.report.canvas_width) + "x" + std::to_string(result.report.canvas_height) +
                ", expected " + std::to_string(w) + "x" + std::to_string(h));
  }
  return report;
}

json run_align_stage(const DatasetLayout& layout, std::int64_t a, std::int64_t b, const json& params) {
  const auto p = stage_params("align", params);
  const auto cfg = layout.load_config();
  const auto img_a = load_section_canvas(layout, cfg, a);
  const auto img_b = load_section_canvas(layout, cfg, b);
  imageops::BlockMatchParams bp;
  bp.grid_spacing = p.at("grid_spacing").get<std::int64_t>();
  bp.patch_radius = p.at("patch_radius").get<std::int64_t>();
  bp.search_radius = p.at("search_radius").get<std::int64_t>();
  const auto field = imageops::block_match_field(img_a, img_b, bp);
  write_json(layout.align_field(a, b), field);
  return {{"pair", {a, b}},
          {"nodes", field.vectors.size()},
          {"mean_residual", imageops::mean_residual(field)}};
}

json run_relax_stage(const DatasetLayout& layout, const std::vector<std::int64_t>& sections, const json& params) {
  const auto p = stage_params("relax", params);
  if (sections.empty()) throw InvalidArgument("relax needs at least one section");
  if (!std::is_sorted(sections.begin(), sections.end()) ||
      std::adjacent_find(sections.begin(), sections.end()) != sections.end()) {
    throw InvalidArgument("relax sections must be strictly ascending");
  }
  const auto cfg = layout.load_config();
  const auto [w, h] = cfg.section_dims();
  std::vector<imageops::DisplacementField> fields;
  for (std::size_t k = 0; k + 1 < sections.size(); ++k) {
    fields.push_back(read_json(layout.align_field(sections[k], sections[k + 1])).get<imageops::DisplacementField>());
  }
  imageops::AlignParams ap;
  ap.intra_stiffness = p.at("intra_stiffness").get<double>();
  ap.cross_stiffness = p.at("cross_stiffness").get<double>();
  ap.relax.max_iters = p.at("max_iters").get<int>();
  ap.relax.step = p.at("step").get<double>();
  ap.relax.eps = p.at("eps").get<double>();
  const auto alignment = imageops::align_from_fields(w, h, fields, ap);

  const Vec3i dims{w, h, static_cast<std::int64_t>(sections.size())};
  auto vol = fresh_volume(layout.aligned_volume(), cfg.name + "-aligned", volume::DType::gray8, dims, cfg,
                          kPyramidLevels);
  std::vector<GrayImage> rendered;
  for (std::size_t k = 0; k < sections.size(); ++k) {
    rendered.push_back(imageops::render_aligned(load_section_canvas(layout, cfg, sections[k]), alignment.meshes[k]));
    vol.write({0, 0, static_cast<std::int64_t>(k)}, volume::as_grid(rendered.back(), cfg.voxel_size));
  }
  vol.build_pyramid();

  double before = 0.0, after = 0.0;
  json energies = json::array();
  for (std::size_t k = 0; k < fields.size(); ++k) {
    before += imageops::mean_residual(fields[k]);
    imageops::BlockMatchParams bp;
    bp.grid_spacing = fields[k].grid_spacing;
    after += imageops::mean_residual(imageops::block_match_field(rendered[k], rendered[k + 1], bp));
  }
  for (const auto& e : alignment.energies) {
    energies.push_back(e.empty() ? json{{"initial", 0.0}, {"final", 0.0}, {"iterations", 0}}
                                 : json{{"initial", e.front()}, {"final", e.back()}, {"iterations", e.size() - 1}});
  }
  const double n = fields.empty() ? 1.0 : static_cast<double>(fields.size());
  json report = {{"sections", sections},
                 {"dims", to_array(dims)},
                 {"mean_residual_before", before / n},
                 {"mean_residual_after", after / n},
                 {"energies", energies}};
  write_json(layout.relax_report(), report);
  return report;
}

json run_mask_stage(const DatasetLayout& layout, const json& params) {
  const auto p = stage_params("mask", params);
  const auto cfg = layout.load_config();
  const auto aligned = open_volume(layout.aligned_volume(), "aligned");
  const int level = p.at("level").get<int>();
  if (level < 0 || level >= aligned.manifest().num_levels) {
    throw InvalidArgument("mask level " + std::to_string(level) + " not in the aligned pyramid");
  }
  const auto gray = aligned.read_level<std::uint8_t>(level);
  auto prob = segmenter::intensity_proxy_probability(gray, p.at("blur_radius").get<int>(), p.at("invert").get<bool>());
  for (std::size_t i = 0; i < gray.size(); ++i)
    if (gray[i] == 0) prob.grid[i] = 0;

  segmenter::SeedList seeds;
  std::string source = "auto";
  const std::int64_t factor = std::int64_t{1} << level;
  if (fs::exists(layout.seeds())) {
    source = "seeds.json";
    for (auto s : segmenter::seeds_from_json(read_json(layout.seeds()))) {
      s.position = {s.position.x / factor, s.position.y / factor, s.position.z};
      seeds.push_back(s);
    }
  } else {
    seeds = segmenter::auto_seeds(prob, p.at("seed_threshold").get<double>(),
                                  p.at("min_seed_voxels").get<std::size_t>(), segmenter::SeedKind::cell_body);
  }
  const auto dims0 = aligned.dims(0);
  LabelGrid mask(dims0, cfg.voxel_size);
  if (!seeds.empty()) {
    const auto coarse = segmenter::watershed3d(prob, seeds, p.at("floor").get<double>());
    for (std::int64_t z = 0; z < dims0.z; ++z)
      for (std::int64_t y = 0; y < dims0.y; ++y)
        for (std::int64_t x = 0; x < dims0.x; ++x) mask(x, y, z) = coarse(x / factor, y / factor, z);
  }
  auto vol = fresh_volume(layout.mask_volume(), cfg.name + "-mask", volume::DType::label32, dims0, cfg, kPyramidLevels);
  vol.write({0, 0, 0}, mask);
  vol.build_pyramid();
  const auto counts = voxel_counts(mask);
  std::size_t masked = 0;
  for (const auto& [id, n] : counts) masked += n;
  return {{"seeds", seeds.size()}, {"seed_source", source}, {"objects", counts.size()}, {"masked_voxels", masked}};
}

std::vector<Vec3i> subvolume_indices(Vec3i volume_dims, const json& segment_params) {
  const auto p = stage_params("segment", segment_params);
  std::vector<Vec3i> out;
  for (const auto& s : segmenter::generate_grid(volume_dims, vec3i(p.at("cube")), vec3i(p.at("overlap")))) {
    out.push_back(s.index);
  }
  return out;
}

json run_segment_stage(const DatasetLayout& layout, Vec3i index, const json& params) {
  const auto p = stage_params("segment", params);
  const auto cfg = layout.load_config();
  const auto aligned = open_volume(layout.aligned_volume(), "aligned");
  const auto spec = find_spec(aligned.dims(0), p, index);
  const auto gray = aligned.read<std::uint8_t>(spec.offset, spec.dims);
  std::optional<LabelGrid> mask;
  if (ChunkedVolume::exists(layout.mask_volume())) {
    mask = ChunkedVolume::open(layout.mask_volume()).read<std::uint32_t>(spec.offset, spec.dims);
  }
  const auto t_low = p.at("t_low").get<int>();
  if (t_low < 0 || t_low > 255) throw InvalidArgument("t_low must be in [0,255]");
  const segmenter::GridSeeds lattice{p.at("lattice_spacing").get<std::int64_t>(), spec.offset};
  const auto labels =
      segmenter::flood_fill_segment(gray, mask ? &*mask : nullptr, lattice, static_cast<std::uint8_t>(t_low));
  const auto root = layout.subvolume_labels(index);
  fs::remove_all(root);
  auto out = ChunkedVolume::create(
      volume::make_manifest(cfg.name + "-seg", volume::DType::label32, spec.dims, cfg.voxel_size, cfg.chunk_size, 1),
      root);
  out.write({0, 0, 0}, labels);
  json spec_json = spec;
  return {{"subvolume", spec_json}, {"labels", voxel_counts(labels).size()}, {"masked", mask.has_value()}};
}

json run_reconcile_stage(const DatasetLayout& layout, const json& params) {
  const auto p = stage_params("reconcile", params);
  const auto cfg = layout.load_config();
  const auto aligned = open_volume(layout.aligned_volume(), "aligned");
  const auto dims = aligned.dims(0);
  std::vector<segmenter::LabeledSubvolume> parts;
  for (const auto& spec : segmenter::generate_grid(dims, vec3i(p.at("cube")), vec3i(p.at("overlap")))) {
    const auto vol = open_volume(layout.subvolume_labels(spec.index), "subvolume " + to_string(spec.index));
    if (vol.dims(0) != spec.dims) {
      throw Conflict("subvolume " + to_string(spec.index) + " was segmented with a different grid");
    }
    parts.emplace_back(spec, vol.read_level<std::uint32_t>(0));
  }
  segmenter::MergeParams mp;
  mp.merge_frac = p.at("merge_frac").get<double>();
  mp.merge_min_voxels = p.at("merge_min_voxels").get<std::uint64_t>();
  auto result = segmenter::reconcile(std::move(parts), mp);
  std::uint32_t segments = 0;
  for (auto v : result.labels.data()) segments = std::max(segments, v);
  LabelGrid labels = std::move(result.labels);
  bool masked = false;
  if (ChunkedVolume::exists(layout.mask_volume())) {
    labels = segmenter::apply_mask(labels, ChunkedVolume::open(layout.mask_volume()).read_level<std::uint32_t>(0),
                                   segments);
    masked = true;
  }
  labels.set_voxel_size(cfg.voxel_size);
  auto vol = fresh_volume(layout.segmentation(), cfg.name + "-segmentation", volume::DType::label32, dims, cfg,
                          kPyramidLevels);
  vol.write({0, 0, 0}, labels);
  vol.build_pyramid();
  json graph = result.graph;
  graph["mask_id_base"] = masked ? json(segments) : json(nullptr);
  write_json(layout.merge_graph(), graph);
  std::size_t merged = 0;
  for (const auto& e : result.graph.edges) merged += e.merged ? 1 : 0;
  return {{"subvolumes", result.graph.subvolumes.size()},
          {"segments", segments},
          {"objects", voxel_counts(labels).size()},
          {"merged_edges", merged},
          {"mask_id_base", graph["mask_id_base"]}};
}

json run_mesh_stage(const DatasetLayout& layout, const json& params) {
  const auto p = stage_params("mesh", params);
  const auto vol = open_volume(layout.segmentation(), "segmentation");
  const auto labels = vol.read_level<std::uint32_t>(0);
  const auto min_voxels = p.at("min_voxels").get<std::size_t>();
  fs::remove_all(layout.meshes_dir());
  fs::create_directories(layout.meshes_dir());
  json ids = json::array();
  std::size_t faces = 0;
  for (const auto& [id, n] : voxel_counts(labels)) {
    if (n < min_voxels) continue;
    const auto mesh = geometry::marching_cubes(labels, id, vol.manifest().voxel_size.front());
    geometry::export_mesh(mesh, layout.mesh(id));
    faces += mesh.faces.size();
    ids.push_back(id);
  }
  return {{"meshes", ids.size()}, {"ids", ids}, {"faces", faces}};
}

json run_skeletonize_stage(const DatasetLayout& layout, const json& params) {
  const auto p = stage_params("skeletonize", params);
  const auto vol = open_volume(layout.segmentation(), "segmentation");
  const auto labels = vol.read_level<std::uint32_t>(0);
  geometry::TeasarParams tp;
  tp.scale = p.at("scale").get<double>();
  tp.exponent = p.at("exponent").get<double>();
  tp.invalidation_radius_factor = p.at("invalidation_radius_factor").get<double>();
  tp.min_path_length = p.at("min_path_length").get<double>();
  tp.validate();
  const double tolerance = p.at("simplify_tolerance").get<double>();
  const auto min_voxels = p.at("min_voxels").get<std::size_t>();
  fs::remove_all(layout.skeletons_dir());
  fs::create_directories(layout.skeletons_dir());
  json ids = json::array();
  std::size_t nodes = 0;
  for (const auto& [id, n] : voxel_counts(labels)) {
    if (n < min_voxels) continue;
    auto sk = geometry::teasar_skeletonize(labels, id, tp, vol.manifest().voxel_size.front());
    if (tolerance > 0.0) sk = geometry::simplify_skeleton(sk, tolerance);
    geometry::export_skeleton(sk, layout.skeleton(id));
    nodes += sk.nodes.size();
    ids.push_back(id);
  }
  return {{"skeletons", ids.size()}, {"ids", ids}, {"nodes", nodes}};
}

Granularity stage_granularity(const std::string& stage) {
  if (stage == "montage") return Granularity::section;
  if (stage == "align") return Granularity::section_pair;
  if (stage == "segment") return Granularity::subvolume;
  for (const char* s : kStageNames)
    if (stage == s) return Granularity::volume;
  throw InvalidArgument("unknown stage '" + stage + "'");
}

AppRegistry pipeline_apps() {
  AppRegistry apps;
  auto add = [&](const char* name, std::vector<std::string> required,
                 std::function<json(const DatasetLayout&, const json& args, const json& params)> fn) {
    required.insert(required.begin(), "root");
    apps.add({name, stage_granularity(name), required, [name, fn](const JobContext& ctx) {
                const auto& args = ctx.job.args;
                const DatasetLayout layout(args.at("root").get<std::string>());
                const auto t0 = std::chrono::steady_clock::now();
                json report = fn(layout, args, args.value("params", json::object()));
                ctx.log(std::string(name) + " finished in " + std::to_string(seconds_since(t0)) + " s");
                return report;
              }});
  };
  add("montage", {"section"}, [](const DatasetLayout& l, const json& a, const json& p) {
    return run_montage_stage(l, a.at("section").get<std::int64_t>(), p);
  });
  add("align", {"pair"}, [](const DatasetLayout& l, const json& a, const json& p) {
    return run_align_stage(l, a.at("pair").at(0).get<std::int64_t>(), a.at("pair").at(1).get<std::int64_t>(), p);
  });
  add("relax", {"sections"}, [](const DatasetLayout& l, const json& a, const json& p) {
    return run_relax_stage(l, a.at("sections").get<std::vector<std::int64_t>>(), p);
  });
  add("mask", {}, [](const DatasetLayout& l, const json&, const json& p) { return run_mask_stage(l, p); });
  add("segment", {"index"}, [](const DatasetLayout& l, const json& a, const json& p) {
    return run_segment_stage(l, vec3i(a.at("index")), p);
  });
  add("reconcile", {}, [](const DatasetLayout& l, const json&, const json& p) { return run_reconcile_stage(l, p); });
  add("mesh", {}, [](const DatasetLayout& l, const json&, const json& p) { return run_mesh_stage(l, p); });
  add("skeletonize", {},
      [](const DatasetLayout& l, const json&, const json& p) { return run_skeletonize_stage(l, p); });
  return apps;
}

}  // namespace emflow::workflow
