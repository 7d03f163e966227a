#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "pbs/lodpipe.hpp"
#include "pbs/prefixmath.hpp"
#include "pbs/renderer.hpp"
#include "pbs/scene.hpp"

namespace pbs {

struct ViewRow {
  std::size_t view = 0;
  int width = 0, height = 0;
  bool lod = false;
  std::size_t actions = 0;
  std::uint64_t triangles = 0;
  std::uint64_t surfels = 0;
  double frame_ms = 0;
  double ssim = 0;  // against the no-LOD render of the same view and resolution
};

struct Resolution {
  int width = 0, height = 0;
};

struct ViewBenchParams {
  double surfel_size = 1.0;
  RadiusRule rule = RadiusRule::Consistent;
  int repetitions = 1;  // frame time is the minimum over repetitions
};

/// For each view and resolution renders once without LODs and once with,
/// reporting action counts, primitive counts, CPU frame time and SSIM of the
/// LOD render against the no-LOD render.
std::vector<ViewRow> run_views(const Scene& scene, const std::vector<CameraModel>& views,
                               const std::vector<Resolution>& resolutions, const ViewBenchParams& params = {});

struct GridSample {
  std::size_t position = 0;
  Vec3d eye;
  int direction = 0;  // 0 +x, 1 -x, 2 +z, 3 -z
  double frame_ms = 0;
  double surfel_size = 0;
  std::size_t actions = 0;
  std::uint64_t triangles = 0;
  std::uint64_t surfels = 0;
};

struct FrameTimeSummary {
  std::vector<GridSample> samples;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct GridBenchParams {
  int width = 320, height = 240;
  double fov_y = 1.0471975511965976;
  double t_target_ms = 11.1;
  double initial_size = 1.0;
  bool adaptive = true;
  RadiusRule rule = RadiusRule::Consistent;
};

/// Cameras on a near-uniform grid of `count` positions over the xz extent of
/// `region`, `height` above its bottom, looking in the four cardinal
/// directions. The budget controller carries over from frame to frame.
FrameTimeSummary run_position_grid(const Scene& scene, const Box3& region, std::size_t count, double height,
                                   const GridBenchParams& params = {});

struct PreprocessRow {
  std::uint32_t target = 0;
  std::size_t candidates = 0;
  std::size_t surfels = 0;
  double capture_ms = 0;
  double candidate_ms = 0;
  double sampling_ms = 0;
  double total_ms = 0;
};

/// Stage timings of capture, candidate collection and sampling for each
/// target count. Each stage time is the median over `repetitions` runs.
std::vector<PreprocessRow> time_preprocessing(const TriangleMesh& mesh, const std::vector<std::uint32_t>& targets,
                                              const CaptureConfig& capture, const SamplingConfig& sampling,
                                              int repetitions = 3);

void write_views_csv(std::ostream& out, const std::vector<ViewRow>& rows);
void write_grid_csv(std::ostream& out, const FrameTimeSummary& summary);
void write_preprocess_csv(std::ostream& out, const std::vector<PreprocessRow>& rows);

/// Default camera ring around a scene: `count` perspective views on a circle
/// above the bounds, looking at the center.
std::vector<CameraModel> orbit_views(const Box3& bounds, std::size_t count, double distance_factor = 1.2);

}  // namespace pbs
