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

#include <algorithm>
#include <fstream>
#include <iostream>

#include "cli.hpp"
#include "emflow/volume/chunked_volume.hpp"
#include "emflow/volume/png_io.hpp"
#include "emflow/volume/preview.hpp"
#include "emflow/workflow/preview.hpp"
#include "emflow/workflow/stages.hpp"

namespace emflow::cli {
namespace fs = std::filesystem;
using nlohmann::json;
using workflow::DatasetLayout;

namespace {

struct StageArgs {
  std::string dataset;
  std::vector<std::string> params;
};

CLI::App* stage_command(CLI::App& app, const std::string& name, const std::string& help, StageArgs& args) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--dataset,-d", args.dataset, "dataset name from the config, or its root directory");
  sub->add_option("--param,-p", args.params, "stage parameter override key=value (repeatable)");
  return sub;
}

void print_report(std::ostream& os, const std::string& stage, const json& report) {
  os << stage << ": ";
  bool first = true;
  for (const auto& [k, v] : report.items()) {
    if (v.is_structured()) continue;
    os << (first ? "" : ", ") << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump());
    first = false;
  }
  os << '\n';
}

DatasetLayout layout_of(const Context& ctx, const StageArgs& a) {
  return DatasetLayout(ctx.config.dataset_root(a.dataset));
}

bool is_png(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png";
}

json convert(const fs::path& in, const fs::path& out, const std::string& name, const std::vector<double>& voxel,
             const std::vector<std::int64_t>& chunk, int levels) {
  if (volume::ChunkedVolume::exists(in)) {
    const auto vol = volume::ChunkedVolume::open(in);
    const auto d = vol.dims(0);
    fs::create_directories(out);
    std::vector<std::string> files;
    for (std::int64_t z = 0; z < d.z; ++z) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%04lld.png", static_cast<long long>(z));
      const auto path = out / buf;
      if (vol.manifest().dtype == volume::DType::gray8) {
        volume::write_png(path, volume::slice_z(vol.read<std::uint8_t>({0, 0, z}, {d.x, d.y, 1}), 0));
      } else {
        volume::write_png(path, volume::colorize(volume::slice_z(vol.read<std::uint32_t>({0, 0, z}, {d.x, d.y, 1}), 0)));
      }
      files.push_back(path.string());
    }
    return {{"direction", "volume-to-png"}, {"slices", files.size()}, {"output", out.string()}};
  }
  std::vector<fs::path> slices;
  if (fs::is_directory(in)) {
    for (const auto& e : fs::directory_iterator(in))
      if (e.is_regular_file() && is_png(e.path())) slices.push_back(e.path());
  } else if (is_png(in)) {
    slices.push_back(in);
  }
  if (slices.empty()) throw InvalidArgument(in.string() + " is neither a chunked volume nor PNG slices");
  std::sort(slices.begin(), slices.end());
  const auto first = volume::read_png_gray(slices.front());
  const Vec3i dims{first.width(), first.height(), static_cast<std::int64_t>(slices.size())};
  const auto m = volume::make_manifest(name, volume::DType::gray8, dims, {voxel[0], voxel[1], voxel[2]},
                                       {chunk[0], chunk[1], chunk[2]}, levels, false);
  auto vol = volume::ChunkedVolume::create(m, out);
  for (std::size_t z = 0; z < slices.size(); ++z) {
    const auto img = z == 0 ? first : volume::read_png_gray(slices[z]);
    if (img.width() != dims.x || img.height() != dims.y) {
      throw InvalidArgument(slices[z].string() + " differs in size from " + slices.front().string());
    }
    volume::Grid3<std::uint8_t> g({dims.x, dims.y, 1}, m.voxel_size[0]);
    std::copy(img.data().begin(), img.data().end(), g.data().begin());
    vol.write({0, 0, static_cast<std::int64_t>(z)}, g);
  }
  vol.build_pyramid();
  return {{"direction", "png-to-volume"},
          {"slices", slices.size()},
          {"dims", {dims.x, dims.y, dims.z}},
          {"levels", m.num_levels},
          {"output", out.string()}};
}

}  // namespace

void add_stage_commands(CLI::App& app, Context& ctx, Actions& actions) {
  {
    auto a = std::make_shared<StageArgs>();
    auto section = std::make_shared<std::int64_t>(0);
    auto* sub = stage_command(app, "montage", "stitch the tiles of one section", *a);
    sub->add_option("--section,-s", *section, "section index")->required();
    actions.add(sub, [&, a, section] {
      const auto r = workflow::run_montage_stage(layout_of(ctx, *a), *section, merged_params(ctx, "montage", a->params));
      ctx.emit(r, [&](std::ostream& os) { print_report(os, "montage", r); });
    });
  }
  {
    auto a = std::make_shared<StageArgs>();
    auto pair = std::make_shared<std::vector<std::int64_t>>();
    auto relax = std::make_shared<bool>(false);
    auto* sub = stage_command(app, "align", "block-match a section pair, or relax and render the stack", *a);
    auto* pair_opt = sub->add_option("--pair", *pair, "sections a b")->expected(2);
    auto* relax_opt = sub->add_flag("--relax", *relax, "relax all section pairs and render the aligned volume");
    pair_opt->excludes(relax_opt);
    sub->callback([pair_opt, relax_opt] {
      if (pair_opt->count() == 0 && relax_opt->count() == 0) throw CLI::RequiredError("--pair or --relax");
    });
    actions.add(sub, [&, a, pair, relax] {
      const auto layout = layout_of(ctx, *a);
      json r;
      if (*relax) {
        r = workflow::run_relax_stage(layout, layout.sections(), merged_params(ctx, "relax", a->params));
      } else {
        r = workflow::run_align_stage(layout, (*pair)[0], (*pair)[1], merged_params(ctx, "align", a->params));
      }
      ctx.emit(r, [&](std::ostream& os) { print_report(os, *relax ? "relax" : "align", r); });
    });
  }
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"mask", "watershed mask of cell bodies and vessels"},
           {"reconcile", "merge subvolume segmentations"},
           {"mesh", "marching-cubes meshes per object"},
           {"skeletonize", "TEASAR skeletons per object"}}) {
    auto a = std::make_shared<StageArgs>();
    auto* sub = stage_command(app, name, help, *a);
    const std::string stage = name;
    actions.add(sub, [&, a, stage] {
      const auto layout = layout_of(ctx, *a);
      const auto p = merged_params(ctx, stage, a->params);
      json r;
      if (stage == "mask") r = workflow::run_mask_stage(layout, p);
      if (stage == "reconcile") r = workflow::run_reconcile_stage(layout, p);
      if (stage == "mesh") r = workflow::run_mesh_stage(layout, p);
      if (stage == "skeletonize") r = workflow::run_skeletonize_stage(layout, p);
      ctx.emit(r, [&](std::ostream& os) { print_report(os, stage, r); });
    });
  }
  {
    auto a = std::make_shared<StageArgs>();
    auto index = std::make_shared<std::vector<std::int64_t>>();
    auto all = std::make_shared<bool>(false);
    auto* sub = stage_command(app, "segment", "flood-fill one subvolume, or all of them", *a);
    auto* idx_opt = sub->add_option("--index", *index, "subvolume grid index i j k")->expected(3);
    auto* all_opt = sub->add_flag("--all", *all, "every subvolume in turn");
    idx_opt->excludes(all_opt);
    sub->callback([idx_opt, all_opt] {
      if (idx_opt->count() == 0 && all_opt->count() == 0) throw CLI::RequiredError("--index or --all");
    });
    actions.add(sub, [&, a, index, all] {
      const auto layout = layout_of(ctx, *a);
      const auto p = merged_params(ctx, "segment", a->params);
      json r;
      if (*all) {
        const auto aligned = volume::ChunkedVolume::open(layout.aligned_volume());
        r = json::array();
        for (const auto& i : workflow::subvolume_indices(aligned.dims(0), workflow::stage_params("segment", p))) {
          r.push_back(workflow::run_segment_stage(layout, i, p));
        }
      } else {
        r = workflow::run_segment_stage(layout, {(*index)[0], (*index)[1], (*index)[2]}, p);
      }
      ctx.emit(r, [&](std::ostream& os) {
        if (r.is_array()) {
          os << "segment: " << r.size() << " subvolumes\n";
        } else {
          print_report(os, "segment", r);
        }
      });
    });
  }
  {
    struct PreviewArgs {
      std::string dataset, stage = "montage", out;
      std::int64_t section = 0;
      int scale = 1;
    };
    auto a = std::make_shared<PreviewArgs>();
    auto* sub = app.add_subcommand("preview", "render a downsampled PNG of a stage output");
    sub->add_option("--dataset,-d", a->dataset, "dataset name or root");
    sub->add_option("--stage", a->stage, "montage|aligned|mask|segmentation")
        ->check(CLI::IsMember(workflow::preview_stages()));
    sub->add_option("--section,-s", a->section, "section index")->required();
    sub->add_option("--scale", a->scale, "power-of-two reduction");
    sub->add_option("--output,-o", a->out, "PNG path")->required();
    actions.add(sub, [&, a] {
      const auto p = workflow::dataset_preview(DatasetLayout(ctx.config.dataset_root(a->dataset)), a->stage,
                                               a->section, a->scale);
      const auto png = p.png();
      std::ofstream(a->out, std::ios::binary).write(reinterpret_cast<const char*>(png.data()),
                                                     static_cast<std::streamsize>(png.size()));
      const json r = {{"stage", a->stage}, {"section", a->section}, {"scale", a->scale},
                      {"width", p.width()}, {"height", p.height()}, {"output", a->out}};
      ctx.emit(r, [&](std::ostream& os) { os << "wrote " << a->out << " (" << p.width() << "x" << p.height() << ")\n"; });
    });
  }
  {
    struct ConvertArgs {
      std::string in, out, name = "converted";
      std::vector<double> voxel{4.0, 4.0, 40.0};
      std::vector<std::int64_t> chunk{64, 64, 16};
      int levels = 0;
    };
    auto a = std::make_shared<ConvertArgs>();
    auto* sub = app.add_subcommand("convert", "PNG slices to a chunked volume, or a volume to PNG slices");
    sub->add_option("input", a->in, "PNG file, directory of PNG slices, or chunked volume root")->required();
    sub->add_option("output", a->out, "volume root or slice directory")->required();
    sub->add_option("--name", a->name, "dataset name stored in the volume manifest");
    sub->add_option("--voxel-size", a->voxel, "nm per voxel x y z")->expected(3);
    sub->add_option("--chunk", a->chunk, "chunk size x y z")->expected(3);
    sub->add_option("--levels", a->levels, "pyramid levels, 0 = automatic");
    actions.add(sub, [&, a] {
      const auto r = convert(a->in, a->out, a->name, a->voxel, a->chunk, a->levels);
      ctx.emit(r, [&](std::ostream& os) { os << "converted " << r.at("slices") << " slices to " << a->out << '\n'; });
    });
  }
}

}  // namespace emflow::cli
