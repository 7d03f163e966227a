#include <sstream>

#include "doctest.h"
#include "pbs/bench.hpp"
#include "pbs/procedural.hpp"

using namespace pbs;

namespace {

const Scene& built_grid() {
  static Scene s = [] {
    Scene g = make_named_scene("grid");
    CaptureConfig cap;
    cap.resolution = 48;
    generate_lods(g, LodPolicy{}, cap, SamplingConfig{});
    return g;
  }();
  return s;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("view benchmark: no-LOD rows draw no surfels and score SSIM 1") {
  const Scene& s = built_grid();
  const auto views = orbit_views(s.node(s.root()).bounds, 3);
  const auto rows = run_views(s, views, {{64, 48}, {96, 72}});
  REQUIRE(rows.size() == 12);
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    const auto& nolod = rows[i];
    const auto& lod = rows[i + 1];
    CHECK_FALSE(nolod.lod);
    CHECK(lod.lod);
    CHECK(nolod.view == lod.view);
    CHECK(nolod.surfels == 0);
    CHECK(nolod.ssim == 1.0);
    CHECK(lod.triangles <= nolod.triangles);
    CHECK(lod.ssim <= 1.0);
    CHECK(lod.ssim > 0.0);
  }
  std::ostringstream out;
  write_views_csv(out, rows);
  CHECK(first_line(out.str()) == "view,width,height,mode,actions,triangles,surfels,frame_ms,ssim");
}

TEST_CASE("position grid: one position gives four directions with sizes in range") {
  const Scene& s = built_grid();
  GridBenchParams p;
  p.width = 64;
  p.height = 48;
  const auto sum = run_position_grid(s, s.node(s.root()).bounds, 1, 2.0, p);
  REQUIRE(sum.samples.size() == 4);
  for (int d = 0; d < 4; ++d) CHECK(sum.samples[d].direction == d);
  for (const auto& g : sum.samples) {
    CHECK(g.surfel_size >= 1.0);
    CHECK(g.surfel_size <= 8.0);
  }
  CHECK(sum.min <= sum.q1);
  CHECK(sum.q1 <= sum.median);
  CHECK(sum.median <= sum.q3);
  CHECK(sum.q3 <= sum.max);

  const auto nine = run_position_grid(s, s.node(s.root()).bounds, 9, 2.0, p);
  CHECK(nine.samples.size() == 36);
  std::ostringstream out;
  write_grid_csv(out, nine);
  CHECK(first_line(out.str()) == "position,x,y,z,direction,frame_ms,surfel_size,actions,triangles,surfels");
}

TEST_CASE("position grid without adaptation keeps the initial size") {
  const Scene& s = built_grid();
  GridBenchParams p;
  p.width = 32;
  p.height = 24;
  p.adaptive = false;
  p.initial_size = 3;
  for (const auto& g : run_position_grid(s, s.node(s.root()).bounds, 4, 2.0, p).samples) CHECK(g.surfel_size == 3.0);
}

TEST_CASE("preprocessing table shape") {
  CaptureConfig cap;
  cap.resolution = 64;
  const auto rows = time_preprocessing(make_torus(1.0, 0.35, 40, 20), {100, 1000, 2000}, cap, SamplingConfig{}, 1);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.candidates == rows[0].candidates);
    CHECK(r.surfels == std::min<std::size_t>(r.target, r.candidates));
    CHECK(r.total_ms == doctest::Approx(r.capture_ms + r.candidate_ms + r.sampling_ms));
  }
  std::ostringstream out;
  write_preprocess_csv(out, rows);
  CHECK(first_line(out.str()) == "target,candidates,surfels,capture_ms,candidate_ms,sampling_ms,total_ms");
}
