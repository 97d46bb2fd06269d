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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (capped at 1). Pass criterion names as
// arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "emflow/geometry/mesh.hpp"
#include "emflow/geometry/skeleton.hpp"
#include "emflow/imageops/elastic.hpp"
#include "emflow/imageops/montage.hpp"
#include "emflow/imageops/ncc.hpp"
#include "emflow/log.hpp"
#include "emflow/segmenter/flood_fill.hpp"
#include "emflow/segmenter/mask.hpp"
#include "emflow/segmenter/reconcile.hpp"
#include "emflow/segmenter/subvolume.hpp"
#include "emflow/sim/blobs.hpp"
#include "emflow/sim/em_dataset.hpp"
#include "emflow/sim/sweep_corpus.hpp"
#include "emflow/sim/texture.hpp"
#include "emflow/workflow/ingest.hpp"
#include "emflow/workflow/launcher.hpp"
#include "emflow/workflow/pipeline.hpp"
#include "emflow/workflow/stages.hpp"
#include "emflow/workflow/sweep.hpp"
#include "segmenter/oracles.hpp"
#include "test_util.hpp"
#include "workflow/audit.hpp"

using namespace emflow;
namespace fs = std::filesystem;
using nlohmann::json;
using emflow::testing::TempDir;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt_double(double v, int precision = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

// --- montage ---------------------------------------------------------------

Verdict montage_recovery() {
  const auto t0 = Clock::now();
  const std::int64_t W = 512;
  imageops::MontageParams p;
  p.nominal_overlap_frac = 0.05;
  const auto [nx, ny] = imageops::nominal_position(W, W, imageops::Relation::right_of, p.nominal_overlap_frac);
  const std::set<int> corrupted{17, 41};
  const std::int64_t slip = 40;

  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::int64_t> offset(-8, 8);
  int exact = 0, flagged = 0, false_flags = 0;
  for (int i = 0; i < 50; ++i) {
    const auto world = sim::textured_image(2 * W + 64, W + 120, 100 + static_cast<std::uint64_t>(i));
    const std::int64_t dx = offset(rng);
    const std::int64_t dy = offset(rng) + (corrupted.count(i) ? slip : 0);
    const auto a = sim::crop(world, 24, 24, W, W);
    const auto b = sim::crop(world, 24 + nx + dx, 24 + ny + dy, W, W);
    const auto d = imageops::ncc_displacement(a, b, imageops::Relation::right_of, p);
    if (d.dx == dx && d.dy == dy) ++exact;
    const auto r = imageops::montage_tiles({a, b}, 1, 2, i, p);
    const bool failed = r.report.status == imageops::MontageStatus::fail;
    if (corrupted.count(i)) {
      flagged += failed;
    } else {
      false_flags += failed;
    }
  }
  const double secs = seconds_since(t0);
  return {exact >= 48 && flagged == 2 && false_flags == 0 && secs < 60.0,
          std::to_string(exact) + "/50 offsets exact, " + std::to_string(flagged) + "/2 corrupted flagged, " +
              std::to_string(false_flags) + " clean sections flagged, " + fmt_double(secs, 1) + " s"};
}

// --- sweep -----------------------------------------------------------------

Verdict sweep_trend() {
  const auto t0 = Clock::now();
  TempDir tmp("acc_sweep");
  const sim::SweepCorpusParams cp;
  const auto sections = sim::generate_sweep_corpus(tmp / "corpus", cp);

  workflow::SweepSpec spec;
  spec.id = "acceptance";
  spec.corpus = tmp / "corpus";
  const std::vector<std::int64_t> max_octaves{128, 256, 512, 1024};
  for (auto m : max_octaves) spec.parameter_sets.push_back({{"min_octave_px", 64}, {"max_octave_px", m}});
  const auto report = workflow::run_sweep(spec);

  std::size_t slips = 0;
  for (const auto& s : sections) slips += s.tier == sim::CorpusTier::slip;
  const double floor = static_cast<double>(slips) / static_cast<double>(sections.size());

  const json report_json = report;
  bool shape = report.rows.size() == max_octaves.size() && report.sections == sections.size();
  bool monotone = true, expected = true;
  std::string table;
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const auto& r = report.rows[k];
    const auto& row = report_json.at("rows").at(k);
    shape = shape && row.contains("params") && row.contains("runtime_s") && row.contains("error_rate") &&
            row.contains("accumulated_error");
    if (k > 0 && r.accumulated_error > report.rows[k - 1].accumulated_error) monotone = false;
    std::set<std::int64_t> want;
    for (const auto& s : sections)
      if (sim::expected_failure(s.tier, cp.tile_size, max_octaves[k])) want.insert(s.index);
    if (std::set<std::int64_t>(r.failed_sections.begin(), r.failed_sections.end()) != want) expected = false;
    table += (k ? ", " : "") + std::to_string(max_octaves[k]) + ":" + fmt_double(100 * r.error_rate, 1) + "/" +
             fmt_double(100 * r.accumulated_error, 1) + "%";
  }
  const bool at_floor = !report.rows.empty() && std::abs(report.rows.back().accumulated_error - floor) < 1e-12;
  const bool trend = !report.rows.empty() && report.rows.front().accumulated_error > floor;
  const double secs = seconds_since(t0);
  return {shape && monotone && expected && at_floor && trend && secs < 300.0,
          std::to_string(report.rows.size()) + " settings over " + std::to_string(report.sections) +
              " sections, max octave:error/accumulated " + table + ", floor " + fmt_double(100 * floor, 1) +
              "%, failures as constructed: " + (expected ? "yes" : "no") + ", " + fmt_double(secs, 1) + " s"};
}

// --- alignment ---------------------------------------------------------------

double bilinear(const volume::GrayImage& im, double x, double y) {
  const auto x0 = static_cast<std::int64_t>(std::floor(x)), y0 = static_cast<std::int64_t>(std::floor(y));
  const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
  auto px = [&](std::int64_t xx, std::int64_t yy) {
    xx = std::clamp<std::int64_t>(xx, 0, im.width() - 1);
    yy = std::clamp<std::int64_t>(yy, 0, im.height() - 1);
    return static_cast<double>(im(xx, yy));
  };
  return (1 - fy) * ((1 - fx) * px(x0, y0) + fx * px(x0 + 1, y0)) +
         fy * ((1 - fx) * px(x0, y0 + 1) + fx * px(x0 + 1, y0 + 1));
}

Verdict alignment() {
  const auto t0 = Clock::now();
  const std::int64_t S = 256, margin = 40;
  const auto world = sim::textured_image(S + 2 * margin, S + 2 * margin, 31);
  imageops::AlignParams p;
  p.match = {32, 12, 6};
  p.intra_stiffness = 0.1;
  std::vector<volume::GrayImage> stack;
  for (int s = 0; s < 16; ++s) {
    volume::GrayImage im(S, S);
    const double phase = s * 1.3;
    for (std::int64_t y = 0; y < S; ++y)
      for (std::int64_t x = 0; x < S; ++x) {
        const double wx = 2.5 * std::sin(static_cast<double>(y) / 45.0 + phase);
        const double wy = 2.0 * std::cos(static_cast<double>(x) / 55.0 + phase);
        const double v = bilinear(world, static_cast<double>(margin + x) - wx, static_cast<double>(margin + y) - wy);
        im(x, y) = static_cast<std::uint8_t>(std::floor(v + 0.5));
      }
    stack.push_back(im);
  }
  const auto aligned = imageops::align_stack(stack, p);
  double before = 0, after = 0;
  bool energy_ok = aligned.meshes.size() == stack.size();
  std::size_t iterations = 0;
  auto prev = stack[0];
  for (std::size_t i = 1; i < stack.size(); ++i) {
    before += imageops::mean_residual(imageops::block_match_field(stack[i - 1], stack[i], p.match));
    auto cur = imageops::render_aligned(stack[i], aligned.meshes[i]);
    after += imageops::mean_residual(imageops::block_match_field(prev, cur, p.match));
    prev = cur;
    const auto& e = aligned.energies[i];
    iterations += e.size() - 1;
    for (std::size_t k = 1; k < e.size(); ++k) energy_ok = energy_ok && e[k] <= e[k - 1];
  }
  const double n = static_cast<double>(stack.size() - 1);
  const double reduction = before > 0 ? 1.0 - after / before : 0.0;
  const double secs = seconds_since(t0);
  return {reduction >= 0.8 && energy_ok && secs < 120.0,
          "mean residual " + fmt_double(before / n, 3) + " -> " + fmt_double(after / n, 3) + " px (" +
              fmt_double(100 * reduction, 1) + "% reduction), energy non-increasing over " +
              std::to_string(iterations) + " iterations: " + (energy_ok ? "yes" : "no") + ", " + fmt_double(secs, 1) +
              " s"};
}

// --- reconciliation ------------------------------------------------------------

template <class T>
volume::Grid3<T> extract(const volume::Grid3<T>& g, const segmenter::SubvolumeSpec& s) {
  volume::Grid3<T> out(s.dims);
  for (std::int64_t z = 0; z < s.dims.z; ++z)
    for (std::int64_t y = 0; y < s.dims.y; ++y)
      for (std::int64_t x = 0; x < s.dims.x; ++x) out(x, y, z) = g(s.offset.x + x, s.offset.y + y, s.offset.z + z);
  return out;
}

// 6-connectivity of the blob's voxels inside [lo, hi).
bool piece_connected(const sim::Ellipsoid& b, Vec3i lo, Vec3i hi) {
  const Vec3i d{hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
  if (d.x <= 0 || d.y <= 0 || d.z <= 0) return true;
  volume::Grid3<std::uint8_t> m(d);
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x) m(x, y, z) = b.contains(lo.x + x, lo.y + y, lo.z + z);
  const auto l = segmenter::connected_components(m);
  return *std::max_element(l.data().begin(), l.data().end()) <= 1;
}

std::size_t piece_size(const sim::Ellipsoid& b, Vec3i lo, Vec3i hi) {
  std::size_t n = 0;
  for (std::int64_t z = lo.z; z < hi.z; ++z)
    for (std::int64_t y = lo.y; y < hi.y; ++y)
      for (std::int64_t x = lo.x; x < hi.x; ++x) n += b.contains(x, y, z);
  return n;
}

// The oracle's precondition: every blob piece inside a cube is one
// component, and the pieces that own output voxels (each voxel belongs to
// the smallest-index cube covering it) are linked into one group by
// face-adjacent overlaps the blob crosses on at least the merge minimum.
bool reconcilable(const std::vector<sim::Ellipsoid>& blobs, const std::vector<segmenter::SubvolumeSpec>& grid,
                  std::uint64_t merge_min) {
  for (const auto& b : blobs) {
    const auto blo = b.bbox_lo(), bhi = b.bbox_hi();
    auto clip = [&](Vec3i lo, Vec3i hi) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(lo[a], blo[a]);
        hi[a] = std::min(hi[a], bhi[a]);
      }
      return std::pair{lo, hi};
    };
    auto empty = [](Vec3i lo, Vec3i hi) { return lo.x >= hi.x || lo.y >= hi.y || lo.z >= hi.z; };
    std::vector<std::size_t> group(grid.size());
    std::iota(group.begin(), group.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (group[x] != x) x = group[x] = group[group[x]];
      return x;
    };
    std::vector<bool> present(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto [lo, hi] = clip(grid[i].offset, grid[i].end());
      if (empty(lo, hi) || piece_size(b, lo, hi) == 0) continue;
      present[i] = true;
      if (!piece_connected(b, lo, hi)) return false;
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        if (!present[i] || !present[j] || !segmenter::face_adjacent(grid[i], grid[j])) continue;
        Vec3i olo, ohi;
        if (!segmenter::intersect(grid[i], grid[j], olo, ohi)) continue;
        const auto [lo, hi] = clip(olo, ohi);
        if (!empty(lo, hi) && piece_size(b, lo, hi) >= merge_min) group[find(j)] = find(i);
      }
    std::set<std::size_t> roots;
    for (std::int64_t z = blo.z; z < bhi.z; ++z)
      for (std::int64_t y = blo.y; y < bhi.y; ++y)
        for (std::int64_t x = blo.x; x < bhi.x; ++x) {
          if (!b.contains(x, y, z)) continue;
          std::size_t owner = grid.size();
          for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto lo = grid[i].offset, hi = grid[i].end();
            const bool inside = x >= lo.x && y >= lo.y && z >= lo.z && x < hi.x && y < hi.y && z < hi.z;
            if (inside && (owner == grid.size() || grid[i].index < grid[owner].index)) owner = i;
          }
          roots.insert(find(owner));
        }
    if (roots.size() > 1) return false;
  }
  return true;
}

Verdict reconciliation_oracle() {
  const auto t0 = Clock::now();
  const Vec3i dims{192, 192, 192}, cube{64, 64, 64}, overlap{16, 16, 16};
  const auto grid = segmenter::generate_grid(dims, cube, overlap);
  const segmenter::MergeParams mp;
  int checked = 0, matched = 0, redrawn = 0;
  std::size_t objects = 0;
  for (std::uint64_t seed = 1; checked < 20 && seed < 200; ++seed) {
    const auto blobs = sim::random_ellipsoids(dims, 30, 4.0, 24.0, 2, seed);
    if (!reconcilable(blobs, grid, mp.merge_min_voxels)) {
      ++redrawn;
      continue;
    }
    ++checked;
    objects += blobs.size();
    const auto gray = sim::render_ellipsoids(dims, blobs, 230, 15);
    std::vector<segmenter::LabeledSubvolume> parts;
    for (const auto& s : grid) {
      parts.emplace_back(s, segmenter::flood_fill_segment(extract(gray, s), nullptr,
                                                          segmenter::GridSeeds{1, s.offset}, 128));
    }
    const auto r = segmenter::reconcile(std::move(parts), mp);
    const auto whole = segmenter::flood_fill_segment(gray, nullptr, segmenter::GridSeeds{1, {}}, 128);
    matched += segmenter::canonical_labels(r.labels) == segmenter::canonical_labels(whole);
  }
  const double secs = seconds_since(t0);
  return {checked == 20 && matched == 20 && secs < 120.0,
          std::to_string(matched) + "/" + std::to_string(checked) + " volumes match the whole-volume fill (" +
              std::to_string(grid.size()) + " cubes each, " + std::to_string(objects) + " blobs, " +
              std::to_string(redrawn) + " draws rejected by the precondition), " + fmt_double(secs, 1) + " s"};
}

// --- watershed -------------------------------------------------------------------

Verdict watershed_split() {
  const Vec3i dims{41, 15, 15};
  const double cx1 = 10, cx2 = 30, sigma = 8.0, floor = 0.1;
  segmenter::ProbabilityMap m{volume::GrayGrid(dims), segmenter::ProbabilitySource::synthetic};
  const double cy = 7, cz = 7;
  for (std::int64_t z = 0; z < dims.z; ++z)
    for (std::int64_t y = 0; y < dims.y; ++y)
      for (std::int64_t x = 0; x < dims.x; ++x) {
        const double r2 = (y - cy) * (y - cy) + (z - cz) * (z - cz);
        const double g1 = std::exp(-((x - cx1) * (x - cx1) + r2) / (2 * sigma * sigma));
        const double g2 = std::exp(-((x - cx2) * (x - cx2) + r2) / (2 * sigma * sigma));
        m.grid(x, y, z) = static_cast<std::uint8_t>(std::lround(255.0 * std::max(g1, g2)));
      }
  const segmenter::SeedList seeds{{{10, 7, 7}, std::nullopt, std::nullopt}, {{30, 7, 7}, std::nullopt, std::nullopt}};
  const auto l = segmenter::watershed3d(m, seeds, floor);
  const auto level = static_cast<std::uint8_t>(std::ceil(floor * 255 - 1e-9));

  std::int64_t worst = 0;
  bool halves = true;
  for (std::int64_t z = 0; z < dims.z; ++z)
    for (std::int64_t y = 0; y < dims.y; ++y) {
      std::int64_t first_two = dims.x;
      for (std::int64_t x = 0; x < dims.x; ++x)
        if (l(x, y, z) == 2) {
          first_two = x;
          break;
        }
      worst = std::max<std::int64_t>(worst, std::llabs(first_two - 20));
      for (std::int64_t x = 0; x < dims.x; ++x) halves = halves && l(x, y, z) == (x < first_two ? 1u : 2u);
    }

  // every above-floor voxel connected to a seed carries exactly one label
  const auto comp = emflow::testing::components_oracle(dims, [&](std::size_t i) { return m.grid[i] >= level; });
  std::set<std::int64_t> seeded;
  for (const auto& s : seeds) seeded.insert(comp[m.grid.index(s.position.x, s.position.y, s.position.z)]);
  std::size_t violations = 0, labeled = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const bool reachable = comp[i] >= 0 && seeded.count(comp[i]) > 0;
    labeled += l[i] != 0;
    if (reachable != (l[i] != 0) || l[i] > 2) ++violations;
  }
  return {worst <= 1 && halves && violations == 0,
          "boundary within " + std::to_string(worst) + " voxel of the ridge, " + std::to_string(labeled) +
              " voxels labeled, " + std::to_string(violations) + " conservation violations"};
}

// --- geometry ------------------------------------------------------------------

Verdict geometry_shapes() {
  volume::LabelGrid ball({25, 25, 25});
  const double r = 10;
  for (std::int64_t z = 0; z < 25; ++z)
    for (std::int64_t y = 0; y < 25; ++y)
      for (std::int64_t x = 0; x < 25; ++x)
        if ((x - 12) * (x - 12) + (y - 12) * (y - 12) + (z - 12) * (z - 12) <= r * r) ball(x, y, z) = 1;
  const auto mesh = geometry::marching_cubes(ball, 1, {1, 1, 1});
  const auto es = geometry::edge_stats(mesh);
  const bool watertight = es.edges > 0 && es.boundary_edges == 0 && es.nonmanifold_edges == 0;
  const auto euler = geometry::euler_characteristic(mesh);
  const double sphere = 4 * std::numbers::pi * r * r;
  const double area_err = std::abs(geometry::surface_area(mesh) - sphere) / sphere;

  // axis along x through (y, z) = (7, 7), voxels x in [5, 55)
  volume::LabelGrid cyl({60, 15, 15});
  for (std::int64_t z = 0; z < 15; ++z)
    for (std::int64_t y = 0; y < 15; ++y)
      for (std::int64_t x = 5; x < 55; ++x)
        if ((y - 7) * (y - 7) + (z - 7) * (z - 7) <= 9) cyl(x, y, z) = 1;
  const auto sk = geometry::teasar_skeletonize(cyl, 1, {}, {1, 1, 1});
  double deviation = 0;
  for (const auto& n : sk.nodes) deviation = std::max(deviation, std::hypot(n.position.y - 7, n.position.z - 7));
  const auto deg = sk.degrees();
  std::vector<Vec3d> ends;
  for (std::size_t i = 0; i < deg.size(); ++i)
    if (deg[i] == 1) ends.push_back(sk.nodes[i].position);
  double end_err = ends.size() == 2 ? 0.0 : 1e9;
  for (const Vec3d c : {Vec3d{5, 7, 7}, Vec3d{54, 7, 7}}) {
    double best = 1e9;
    for (const auto& e : ends) best = std::min(best, std::sqrt((e.x - c.x) * (e.x - c.x) + (e.y - c.y) * (e.y - c.y) +
                                                               (e.z - c.z) * (e.z - c.z)));
    end_err = std::max(end_err, best);
  }
  return {watertight && euler == 2 && area_err <= 0.15 && deviation <= 1.5 && end_err <= 3.0,
          std::string("ball: watertight ") + (watertight ? "yes" : "no") + ", Euler " + std::to_string(euler) +
              ", area error " + fmt_double(100 * area_err, 1) + "%; cylinder: axis deviation " +
              fmt_double(deviation, 2) + " voxels, " + std::to_string(ends.size()) + " endpoints within " +
              fmt_double(end_err, 2) + " voxels"};
}

// --- workflow --------------------------------------------------------------------

Verdict workflow_safety() {
  TempDir tmp("acc_dag");
  const auto path = tmp / "jobs.db";
  std::mutex mu;
  std::map<std::string, int> runs;
  std::atomic<int> concurrent{0}, peak{0};
  workflow::AppRegistry apps;
  apps.add({"work", workflow::Granularity::volume, {"ms"}, [&](const workflow::JobContext& ctx) {
              const int now = ++concurrent;
              int p = peak.load();
              while (now > p && !peak.compare_exchange_weak(p, now)) {
              }
              {
                std::lock_guard lock(mu);
                ++runs[ctx.job.id];
              }
              std::this_thread::sleep_for(std::chrono::milliseconds(ctx.job.args.at("ms").get<int>()));
              --concurrent;
              return json::object();
            }});
  const auto dag = emflow::testing::random_dag(200, 3, 11);
  std::vector<std::string> ids;
  {
    workflow::JobStore store(path);
    apps.register_with(store);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> ms(5, 40);
    for (const auto& deps : dag) {
      workflow::JobSpec spec;
      spec.app = "work";
      spec.args = {{"ms", ms(rng)}};
      for (auto d : deps) spec.deps.push_back(ids[d]);
      ids.push_back(store.submit(spec).id);
    }
  }
  workflow::LauncherOptions o;
  o.policy = {1, 8, 1.0, 0.3};
  o.tick_s = 0.01;
  o.poll_s = 0.005;
  o.stop_when_idle = true;
  o.wall_limit_s = 120.0;
  const auto s = workflow::Launcher(path, apps, o).run();

  workflow::JobStore store(path);
  std::size_t double_claims = 0;
  for (const auto& [id, n] : runs) double_claims += n > 1;
  std::map<std::string, int> running_entries;
  for (const auto& t : store.transitions())
    if (t.to == workflow::JobState::running) ++running_entries[t.job_id];
  for (const auto& [id, n] : running_entries) double_claims += n > 1;
  const auto problems = emflow::testing::audit_log(store);
  bool bounds = !s.timeline.empty();
  for (const auto& p : s.timeline) bounds = bounds && p.workers >= 1 && p.workers <= 8;
  double last_end = 0;
  for (const auto& r : s.runs) last_end = std::max(last_end, r.end_s);
  bool back_to_min = false;
  for (const auto& p : s.timeline) back_to_min = back_to_min || (p.t_s > last_end && p.workers == 1);
  const auto done = store.count(workflow::JobState::done);
  return {double_claims == 0 && done == ids.size() && problems.empty() && bounds && back_to_min &&
              s.peak_workers == 8 && peak.load() <= 8,
          std::to_string(done) + "/" + std::to_string(ids.size()) + " DONE, " + std::to_string(double_claims) +
              " double claims, " + std::to_string(problems.size()) + " log violations, peak pool " +
              std::to_string(s.peak_workers) + " (peak concurrency " + std::to_string(peak.load()) +
              "), pool within [1,8]: " + (bounds ? "yes" : "no") + ", back at min after idle: " +
              (back_to_min ? "yes" : "no")};
}

// --- ingestion -------------------------------------------------------------------

struct IngestRun {
  workflow::LauncherSummary summary;
  double last_arrival_s = 0.0;  // launcher clock
  double last_done_s = 0.0;     // launcher clock
  std::size_t arrived = 0;
  std::size_t done = 0;
  double mean_runtime_s = 0.0;
};

double epoch_now() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

// Sections arrive on the cadence; each montage job runs the real montage
// stage and then idles until `runtime_s` has passed.
IngestRun ingest_scenario(const fs::path& dir, double runtime_s, double cadence_s, int sections, bool drain) {
  sim::EmDatasetParams dp;
  dp.name = "ingest";
  dp.sections = sections;
  dp.seed = 9;
  const sim::EmSimulator microscope(dp);
  const auto root = dir / "ds";
  workflow::create_dataset(root, microscope.config());

  const auto stages = workflow::pipeline_apps();
  auto montage = stages.get("montage");
  const auto inner = montage.entry;
  montage.entry = [inner, runtime_s](const workflow::JobContext& ctx) {
    const auto t0 = Clock::now();
    auto out = inner(ctx);
    const double left = runtime_s - seconds_since(t0);
    if (left > 0) std::this_thread::sleep_for(std::chrono::duration<double>(left));
    return out;
  };
  workflow::AppRegistry apps;
  apps.add(montage);

  const auto path = dir / "jobs.db";
  workflow::JobStore store(path);
  workflow::register_dataset(store, root);
  apps.register_with(store);

  workflow::LauncherOptions o;
  o.policy = {1, 4, 1.0, 5.0};
  o.tick_s = 0.05;
  o.poll_s = 0.02;
  workflow::Launcher launcher(path, apps, o);
  IngestRun out;
  const double t0 = epoch_now();
  std::thread lt([&] { out.summary = launcher.run(); });

  workflow::IngestWatcher watcher(store, dp.name, json::object());
  workflow::IngestOptions io;
  io.cadence_s = cadence_s;
  io.num_sections = sections;
  workflow::ingest_simulated(watcher, microscope, io);
  out.arrived = watcher.accepted().size();
  out.last_arrival_s = watcher.accepted().back().arrival - t0;

  if (drain) {
    const auto deadline = Clock::now() + std::chrono::seconds(30);
    while (store.count(workflow::JobState::done) < out.arrived && Clock::now() < deadline)
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  launcher.request_stop();
  lt.join();
  out.done = store.count(workflow::JobState::done);
  double total = 0;
  for (const auto& r : out.summary.runs) {
    out.last_done_s = std::max(out.last_done_s, r.end_s);
    total += r.wall_s();
  }
  if (!out.summary.runs.empty()) out.mean_runtime_s = total / static_cast<double>(out.summary.runs.size());
  return out;
}

std::size_t ready_at(const workflow::LauncherSummary& s, double t) {
  std::size_t v = 0;
  for (const auto& p : s.timeline) {
    if (p.t_s > t) break;
    v = p.ready;
  }
  return v;
}

Verdict online_ingestion() {
  const double cadence = 2.0;
  const int sections = 30;  // 60 s of arrivals
  const int max_pool = 4;
  TempDir fast_dir("acc_ingest_fast"), slow_dir("acc_ingest_slow");
  auto slow_future = std::async(std::launch::async, [&] {
    return ingest_scenario(slow_dir.path(), 10.0, cadence, sections, false);
  });
  const auto fast = ingest_scenario(fast_dir.path(), 1.0, cadence, sections, true);
  const auto slow = slow_future.get();

  std::size_t fast_max_ready = 0;
  for (const auto& p : fast.summary.timeline) fast_max_ready = std::max(fast_max_ready, p.ready);
  const double lag = fast.last_done_s - fast.last_arrival_s;
  const bool fast_ok = fast.done == static_cast<std::size_t>(sections) &&
                       fast_max_ready <= static_cast<std::size_t>(2 * max_pool) && lag <= 10.0;

  const auto mid = ready_at(slow.summary, slow.last_arrival_s / 2);
  const auto end = ready_at(slow.summary, slow.last_arrival_s);
  const bool slow_ok = slow.summary.peak_workers == max_pool && end > mid && end > 0;

  const bool bound_ok = workflow::minimum_pool(1.0, cadence) <= max_pool && workflow::minimum_pool(10.0, cadence) > max_pool;
  return {fast_ok && slow_ok && bound_ok,
          "runtime " + fmt_double(fast.mean_runtime_s) + " s: " + std::to_string(fast.done) + "/" +
              std::to_string(sections) + " DONE, max READY " + std::to_string(fast_max_ready) + " (limit " +
              std::to_string(2 * max_pool) + "), last DONE " + fmt_double(lag, 1) +
              " s after last arrival, peak pool " + std::to_string(fast.summary.peak_workers) + "; runtime " +
              fmt_double(slow.mean_runtime_s) + " s: peak pool " + std::to_string(slow.summary.peak_workers) +
              ", READY " + std::to_string(mid) + " at mid-run -> " + std::to_string(end) +
              " at last arrival; minimum pool " + std::to_string(workflow::minimum_pool(1.0, cadence)) + " and " +
              std::to_string(workflow::minimum_pool(10.0, cadence))};
}

// --- end to end ------------------------------------------------------------------

int run_cli(const fs::path& cwd, const std::string& args, std::string* out = nullptr) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" EMFLOW_CLI_PATH "' " + args + " 2>>'" +
                          (cwd / "cli_stderr.txt").string() + "'";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  char buf[4096];
  std::size_t n = 0;
  std::string text;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) text.append(buf, n);
  const int status = ::pclose(pipe);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict end_to_end() {
  const auto t0 = Clock::now();
  TempDir tmp("acc_e2e");
  sim::EmDatasetParams dp;
  dp.name = "e2e";
  dp.sections = 4;
  dp.seed = 4;
  const sim::EmSimulator microscope(dp);
  const auto layout = workflow::create_dataset(tmp / "ds", microscope.config());
  for (int s = 0; s < dp.sections; ++s) microscope.acquire(layout, s);

  std::string defined, ran;
  const int rc_define = run_cli(tmp.path(), "--store jobs.db --json pipeline define -d ds", &defined);
  const int rc_run = run_cli(tmp.path(),
                             "--store jobs.db --json launcher run --stop-when-idle --max-workers 4 "
                             "--scale-down-idle 0.5 --wall-limit 590",
                             &ran);
  if (rc_define != 0 || rc_run != 0) {
    return {false, "cli exit codes: define " + std::to_string(rc_define) + ", launcher " + std::to_string(rc_run)};
  }
  const auto jobs = json::parse(defined);
  workflow::JobStore store(tmp / "jobs.db");
  const auto done = store.count(workflow::JobState::done);
  std::set<std::string> stages;
  for (const auto& j : store.list()) stages.insert(j.tags.count("stage") ? j.tags.at("stage") : j.app);

  std::size_t objs = 0, skeletons = 0;
  if (fs::exists(layout.meshes_dir()))
    for (const auto& e : fs::directory_iterator(layout.meshes_dir())) {
      if (e.path().extension() != ".obj") continue;
      const auto m = geometry::import_mesh(e.path());
      objs += !m.faces.empty();
    }
  if (fs::exists(layout.skeletons_dir()))
    for (const auto& e : fs::directory_iterator(layout.skeletons_dir())) {
      if (e.path().extension() != ".json") continue;
      const auto s = geometry::import_skeleton(e.path());
      skeletons += !s.nodes.empty();
    }
  const std::set<std::string> want{"montage", "align", "relax", "mask", "segment", "reconcile", "mesh", "skeletonize"};
  const double secs = seconds_since(t0);
  return {done == jobs.size() && stages == want && objs > 0 && skeletons > 0 && secs < 600.0,
          std::to_string(done) + "/" + std::to_string(jobs.size()) + " jobs DONE across " +
              std::to_string(stages.size()) + " stages, " + std::to_string(objs) + " nonempty OBJ meshes, " +
              std::to_string(skeletons) + " nonempty skeletons, " + fmt_double(secs, 1) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  set_log_level("warn");
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"montage-recovery", montage_recovery},
      {"sweep-report", sweep_trend},
      {"alignment", alignment},
      {"reconciliation-oracle", reconciliation_oracle},
      {"watershed", watershed_split},
      {"geometry", geometry_shapes},
      {"workflow-safety-liveness", workflow_safety},
      {"online-ingestion", online_ingestion},
      {"end-to-end", end_to_end},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
