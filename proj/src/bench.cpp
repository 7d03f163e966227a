#include "pbs/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "pbs/error.hpp"
#include "pbs/metrics.hpp"
#include "pbs/procedural.hpp"
#include "pbs/sampling.hpp"

namespace pbs {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

struct Frame {
  RenderStats stats;
  double ms = 0;
};

Frame timed_frame(const Scene& scene, const CameraModel& cam, const SelectionParams& sel, FrameBuffer& fb) {
  const auto t0 = Clock::now();
  const auto actions = select_render_actions(scene, cam, sel);
  Frame f;
  f.stats = render_frame(scene, actions, cam, fb);
  f.ms = ms_since(t0);
  return f;
}

}  // namespace

std::vector<ViewRow> run_views(const Scene& scene, const std::vector<CameraModel>& views,
                               const std::vector<Resolution>& resolutions, const ViewBenchParams& params) {
  std::vector<ViewRow> rows;
  for (std::size_t v = 0; v < views.size(); ++v)
    for (const auto& res : resolutions) {
      CameraModel cam = views[v];
      cam.width = res.width;
      cam.height = res.height;
      FrameBuffer reference(res.width, res.height), fb(res.width, res.height);
      RgbImage reference_image;
      for (bool lod : {false, true}) {
        SelectionParams sel;
        sel.surfel_size = params.surfel_size;
        sel.rule = params.rule;
        sel.use_lods = lod;
        FrameBuffer& target = lod ? fb : reference;
        Frame best;
        for (int r = 0; r < std::max(1, params.repetitions); ++r) {
          const Frame f = timed_frame(scene, cam, sel, target);
          if (r == 0 || f.ms < best.ms) best = f;
        }
        ViewRow row;
        row.view = v;
        row.width = res.width;
        row.height = res.height;
        row.lod = lod;
        row.actions = best.stats.actions;
        row.triangles = best.stats.triangles;
        row.surfels = best.stats.surfels;
        row.frame_ms = best.ms;
        if (!lod) reference_image = reference.to_image();
        row.ssim = ssim(target.to_image(), reference_image).mean_index;
        rows.push_back(row);
      }
    }
  return rows;
}

FrameTimeSummary run_position_grid(const Scene& scene, const Box3& region, std::size_t count, double height,
                                   const GridBenchParams& params) {
  if (count < 1) throw Error("position grid needs at least one position");
  if (region.empty()) throw Error("position grid needs a non-empty region");
  const auto nx = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
  const std::size_t nz = (count + nx - 1) / nx;
  const Vec3d dirs[4] = {{1, 0, 0}, {-1, 0, 0}, {0, 0, 1}, {0, 0, -1}};

  BudgetController ctrl(params.t_target_ms, params.initial_size);
  FrameBuffer fb(params.width, params.height);
  FrameTimeSummary out;
  for (std::size_t p = 0; p < count; ++p) {
    const std::size_t ix = p % nx, iz = p / nx;
    const Vec3d eye{region.min.x + (ix + 0.5) / nx * (region.max.x - region.min.x), region.min.y + height,
                    region.min.z + (iz + 0.5) / nz * (region.max.z - region.min.z)};
    for (int d = 0; d < 4; ++d) {
      CameraModel cam;
      cam.position = eye;
      cam.forward = dirs[d];
      cam.up = {0, 1, 0};
      cam.fov_y = params.fov_y;
      cam.width = params.width;
      cam.height = params.height;
      SelectionParams sel;
      sel.surfel_size = ctrl.size();
      sel.rule = params.rule;
      const Frame f = timed_frame(scene, cam, sel, fb);
      GridSample s;
      s.position = p;
      s.eye = eye;
      s.direction = d;
      s.frame_ms = f.ms;
      s.surfel_size = sel.surfel_size;
      s.actions = f.stats.actions;
      s.triangles = f.stats.triangles;
      s.surfels = f.stats.surfels;
      out.samples.push_back(s);
      if (params.adaptive) ctrl.update(std::max(f.ms, 1e-6));
    }
  }
  std::vector<double> t;
  for (const auto& s : out.samples) t.push_back(s.frame_ms);
  std::sort(t.begin(), t.end());
  out.min = t.front();
  out.max = t.back();
  out.q1 = quantile_sorted(t, 0.25);
  out.median = quantile_sorted(t, 0.5);
  out.q3 = quantile_sorted(t, 0.75);
  return out;
}

std::vector<PreprocessRow> time_preprocessing(const TriangleMesh& mesh, const std::vector<std::uint32_t>& targets,
                                              const CaptureConfig& capture, const SamplingConfig& sampling,
                                              int repetitions) {
  const Scene scene = make_single_mesh_scene(std::make_shared<const TriangleMesh>(mesh));
  std::vector<PreprocessRow> rows;
  for (std::uint32_t target : targets) {
    std::vector<double> cap, cand, samp;
    PreprocessRow row;
    row.target = target;
    for (int r = 0; r < std::max(1, repetitions); ++r) {
      auto t0 = Clock::now();
      const GBufferSet buffers = capture_gbuffers(scene, scene.root(), capture);
      cap.push_back(ms_since(t0));
      t0 = Clock::now();
      const CandidateSet candidates = collect_candidates(buffers);
      cand.push_back(ms_since(t0));
      SamplingConfig cfg = sampling;
      cfg.target_count = target;
      t0 = Clock::now();
      const auto order = progressive_order(candidates, cfg);
      samp.push_back(ms_since(t0));
      row.candidates = candidates.size();
      row.surfels = order.size();
    }
    row.capture_ms = median_of(cap);
    row.candidate_ms = median_of(cand);
    row.sampling_ms = median_of(samp);
    row.total_ms = row.capture_ms + row.candidate_ms + row.sampling_ms;
    rows.push_back(row);
  }
  return rows;
}

void write_views_csv(std::ostream& out, const std::vector<ViewRow>& rows) {
  out << "view,width,height,mode,actions,triangles,surfels,frame_ms,ssim\n";
  for (const auto& r : rows)
    out << r.view << ',' << r.width << ',' << r.height << ',' << (r.lod ? "lod" : "nolod") << ',' << r.actions << ','
        << r.triangles << ',' << r.surfels << ',' << r.frame_ms << ',' << r.ssim << '\n';
}

void write_grid_csv(std::ostream& out, const FrameTimeSummary& summary) {
  out << "position,x,y,z,direction,frame_ms,surfel_size,actions,triangles,surfels\n";
  static const char* names[4] = {"+x", "-x", "+z", "-z"};
  for (const auto& s : summary.samples)
    out << s.position << ',' << s.eye.x << ',' << s.eye.y << ',' << s.eye.z << ',' << names[s.direction] << ','
        << s.frame_ms << ',' << s.surfel_size << ',' << s.actions << ',' << s.triangles << ',' << s.surfels << '\n';
}

void write_preprocess_csv(std::ostream& out, const std::vector<PreprocessRow>& rows) {
  out << "target,candidates,surfels,capture_ms,candidate_ms,sampling_ms,total_ms\n";
  for (const auto& r : rows)
    out << r.target << ',' << r.candidates << ',' << r.surfels << ',' << r.capture_ms << ',' << r.candidate_ms << ','
        << r.sampling_ms << ',' << r.total_ms << '\n';
}

std::vector<CameraModel> orbit_views(const Box3& bounds, std::size_t count, double distance_factor) {
  std::vector<CameraModel> views;
  const Vec3d c = bounds.center();
  const double radius = std::max(bounds.diagonal() * 0.5, 1e-6) * distance_factor;
  for (std::size_t i = 0; i < count; ++i) {
    const double a = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
    CameraModel cam;
    cam.position = c + Vec3d{radius * std::cos(a), 0.5 * radius, radius * std::sin(a)};
    cam.forward = normalize(c - cam.position);
    cam.up = {0, 1, 0};
    views.push_back(cam);
  }
  return views;
}

}  // namespace pbs
