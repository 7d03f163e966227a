#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "pbs/metrics.hpp"
#include "pbs/procedural.hpp"
#include "pbs/renderer.hpp"
#include "pbs/sampling.hpp"

using namespace pbs;

namespace {

CameraModel ortho(double pixel, int size = 64) {
  CameraModel c;
  c.projection = CameraModel::Projection::Orthographic;
  c.position = {0, 0, 10};
  c.ortho_pixel_size = pixel;
  c.width = c.height = size;
  return c;
}

std::uint32_t key(const Rgba8& c) { return c[0] | c[1] << 8 | c[2] << 16 | std::uint32_t(c[3]) << 24; }

}  // namespace

TEST_CASE("an empty action list leaves the frame unpainted") {
  const Scene s = make_single_mesh_scene(std::make_shared<const TriangleMesh>(make_box()));
  FrameBuffer fb(32, 32);
  const auto st = render_frame(s, {}, ortho(0.1, 32), fb);
  CHECK(fb.painted_count() == 0);
  CHECK(st.actions == 0);
}

TEST_CASE("a quad drawn as geometry shows its vertex color") {
  const Rgba col{0.2f, 0.6f, 0.9f, 1};
  const Scene s = make_single_mesh_scene(std::make_shared<const TriangleMesh>(make_quad(1.0, col)));
  FrameBuffer fb(64, 64);
  const auto st = render_frame(s, {{s.root(), RenderAction::Kind::Geometry}}, ortho(1.0 / 32), fb);
  CHECK(st.actions == 1);
  CHECK(st.triangles == 2);
  CHECK(fb.painted_count() == 32u * 32u);
  CHECK(fb.color[fb.index(32, 32)] == to_rgba8(col));
  CHECK(fb.depth[fb.index(32, 32)] == doctest::Approx(10.0));
}

TEST_CASE("a disc facing the camera stays within its s x s square") {
  SurfelCloud c;
  c.surfels.push_back({{0, 0, 0}, {0, 0, 1}, {255, 0, 0, 255}});
  const auto view = ortho(0.01).view();
  for (double s : {1.0, 2.0, 5.0}) {
    FrameBuffer fb(64, 64);
    splat_surfels(c, 1, s, 10.0, Mat4::identity(), view, fb);
    CHECK(fb.painted_count() == static_cast<std::size_t>(s * s));
  }
  FrameBuffer small(64, 64);
  splat_surfels(c, 1, 9, 0.02, Mat4::identity(), view, small);
  // Radius 2 px around a pixel corner: offsets (+-0.5, +-0.5) and (+-0.5, +-1.5) qualify.
  CHECK(small.painted_count() == 12);
}

TEST_CASE("an edge-on disc draws nothing") {
  SurfelCloud c;
  c.surfels.push_back({{0, 0, 0}, {1, 0, 0}, {255, 0, 0, 255}});
  FrameBuffer fb(64, 64);
  splat_surfels(c, 1, 8, 1.0, Mat4::identity(), ortho(0.01).view(), fb);
  CHECK(fb.painted_count() == 0);
}

TEST_CASE("overlapping discs: the nearer wins, equal depth goes to the lower index") {
  const auto view = ortho(0.01).view();
  SurfelCloud c;
  c.surfels.push_back({{0, 0, 0}, {0, 0, 1}, {255, 0, 0, 255}});
  c.surfels.push_back({{0, 0, 0.5f}, {0, 0, 1}, {0, 255, 0, 255}});
  FrameBuffer fb(64, 64);
  splat_surfels(c, 2, 4, 1.0, Mat4::identity(), view, fb);
  CHECK(fb.color[fb.index(32, 32)] == Rgba8{0, 255, 0, 255});
  std::swap(c.surfels[0], c.surfels[1]);
  splat_surfels(c, 2, 4, 1.0, Mat4::identity(), view, fb);
  CHECK(fb.color[fb.index(32, 32)] == Rgba8{0, 255, 0, 255});

  SurfelCloud tie;
  tie.surfels.push_back({{0, 0, 0}, {0, 0, 1}, {0, 0, 255, 255}});
  tie.surfels.push_back({{0, 0, 0}, {0, 0, 1}, {255, 255, 0, 255}});
  FrameBuffer t(64, 64);
  splat_surfels(tie, 2, 4, 1.0, Mat4::identity(), view, t);
  CHECK(t.color[t.index(32, 32)] == Rgba8{0, 0, 255, 255});
}

TEST_CASE("splats are opaque: every painted pixel carries one surfel's color") {
  std::mt19937_64 rng(8);
  SurfelCloud c;
  std::set<std::uint32_t> colors;
  std::uniform_real_distribution<float> u(-0.3f, 0.3f);
  for (int i = 0; i < 300; ++i) {
    const Rgba8 col{std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng()), 255};
    c.surfels.push_back({{u(rng), u(rng), u(rng)}, Vec3f(normalize(Vec3d{u(rng), u(rng), 0.5})), col});
    colors.insert(key(col));
  }
  FrameBuffer fb(64, 64);
  splat_surfels(c, c.size(), 6, 0.05, Mat4::identity(), ortho(0.01).view(), fb);
  CHECK(fb.painted_count() > 0);
  for (std::size_t i = 0; i < fb.color.size(); ++i)
    if (fb.painted(i)) CHECK(colors.count(key(fb.color[i])) == 1);
}

TEST_CASE("a full 1 px prefix resembles the geometry") {
  auto mesh = std::make_shared<const TriangleMesh>(make_torus(1.0, 0.35, 96, 48));
  Scene s = make_single_mesh_scene(mesh);
  CaptureConfig cap;
  cap.resolution = 384;
  SamplingConfig smp;
  smp.target_count = 60000;
  const auto cloud = std::make_shared<SurfelCloud>(
      sample_progressive(collect_candidates(capture_gbuffers(s, s.root(), cap)), smp));
  s.node(s.root()).lod = cloud;

  CameraModel cam;
  cam.position = {0, 2.2, 2.2};
  cam.forward = normalize(Vec3d{0, -1, -1});
  cam.width = cam.height = 128;
  FrameBuffer geo(128, 128), pts(128, 128);
  render_frame(s, {{s.root(), RenderAction::Kind::Geometry}}, cam, geo);
  RenderAction full{s.root(), RenderAction::Kind::SurfelPrefix, cloud->size(), 1.0, full_cloud_radius(*cloud), 0};
  render_frame(s, {full}, cam, pts);
  CHECK(ssim(geo.to_image(), pts.to_image()).mean_index >= 0.8);
}

TEST_CASE("triangles crossing the near plane are clipped") {
  const Scene s = make_single_mesh_scene(std::make_shared<const TriangleMesh>(make_ground(40, 4)),
                                         Mat4::translation({0, -1, 0}));
  CameraModel cam;
  cam.position = {0, 0, 0};
  cam.forward = normalize(Vec3d{0, -0.3, -1});
  cam.width = 80;
  cam.height = 60;
  cam.near_plane = 0.1;
  FrameBuffer fb(80, 60);
  render_frame(s, {{s.root(), RenderAction::Kind::Geometry}}, cam, fb);
  CHECK(fb.painted_count() > 80u * 20u);
  for (std::size_t i = 0; i < fb.depth.size(); ++i)
    if (fb.painted(i)) CHECK(fb.depth[i] >= 0.1f - 1e-6f);
  // The ground fills the bottom row.
  for (int x = 0; x < 80; ++x) CHECK(fb.painted(fb.index(x, 59)));
}
