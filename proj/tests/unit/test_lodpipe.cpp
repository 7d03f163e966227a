#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "pbs/error.hpp"
#include "pbs/lodpipe.hpp"
#include "pbs/procedural.hpp"

using namespace pbs;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pbs_lod_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Two 12k-triangle tori under one group: both children and the group want a LOD.
Scene two_tori() {
  auto torus = std::make_shared<const TriangleMesh>(make_torus(1.0, 0.35, 100, 60));
  Scene s;
  const NodeId a = s.add_leaf(torus, Mat4::translation({-1.5, 0, 0}), "left");
  const NodeId b = s.add_leaf(torus, Mat4::translation({1.5, 0, 0}) * Mat4::rotation({1, 0, 0}, 1.0), "right");
  s.set_root(s.add_group({a, b}, Mat4::identity(), "both"));
  s.finalize();
  return s;
}

SurfelCloud random_cloud(std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(-100, 100);
  SurfelCloud c;
  const std::size_t n = rng() % 300;
  for (std::size_t i = 0; i < n; ++i)
    c.surfels.push_back({{u(rng), u(rng), u(rng)},
                         {u(rng), u(rng), u(rng)},
                         {std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng())}});
  c.p_m = static_cast<std::uint32_t>(rng());
  c.r_m = std::uniform_real_distribution<double>(0, 1)(rng);
  if (n) c.bounds = Box3({u(rng), u(rng), u(rng)}, {u(rng) + 200, u(rng) + 200, u(rng) + 200});
  c.seed = rng();
  return c;
}

}  // namespace

TEST_CASE("LOD policy examples") {
  LodPolicy p;
  CHECK_FALSE(p.wants_lod(500));
  CHECK_FALSE(p.wants_lod(10000));
  CHECK(p.wants_lod(30000));
  CHECK(p.surfel_count(30000) == 15000);
  CHECK(p.surfel_count(10'000'000) == 200000);
  p.max_surfels = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("bottom-up: parents are captured from child surfels") {
  Scene s = two_tori();
  CaptureConfig cap;
  cap.resolution = 128;
  SamplingConfig smp;
  const auto report = generate_lods(s, LodPolicy{}, cap, smp);
  CHECK(report.nodes.size() == 3);
  for (const auto& st : report.nodes) {
    REQUIRE(s.node(st.node).lod);
    const std::size_t want = std::min<std::size_t>(s.node(st.node).triangle_count / 2, st.candidates);
    CHECK(s.node(st.node).lod->size() == want);
    CHECK(st.surfels == want);
  }
  CHECK(s.node(s.root()).lod->size() == 12000);
  std::set<std::uint32_t> child_colors;
  auto key = [](const Rgba8& c) { return std::uint32_t(c[0]) | std::uint32_t(c[1]) << 8 | std::uint32_t(c[2]) << 16; };
  for (NodeId c : s.node(s.root()).children)
    for (const auto& sf : s.node(c).lod->surfels) child_colors.insert(key(sf.color));
  for (const auto& sf : s.node(s.root()).lod->surfels) CHECK(child_colors.count(key(sf.color)) == 1);
}

TEST_CASE("bottom-up and top-down agree on which nodes get a LOD") {
  auto placement = [](bool bottom_up) {
    Scene s = make_named_scene("grid");
    LodPolicy pol;
    pol.bottom_up = bottom_up;
    CaptureConfig cap;
    cap.resolution = 32;
    generate_lods(s, pol, cap, SamplingConfig{});
    std::vector<NodeId> with;
    for (NodeId id = 0; id < s.size(); ++id)
      if (s.node(id).lod) with.push_back(id);
    return with;
  };
  const auto a = placement(true);
  CHECK_FALSE(a.empty());
  CHECK(a == placement(false));
  // Oracle: exactly the nodes whose subtree exceeds the threshold.
  const Scene s = make_named_scene("grid");
  std::vector<NodeId> want;
  for (NodeId id = 0; id < s.size(); ++id)
    if (subtree_triangle_count(s, id) > 10000) want.push_back(id);
  CHECK(a == want);
}

TEST_CASE("LOD generation is deterministic across thread counts") {
  Scene a = two_tori(), b = two_tori();
  CaptureConfig cap;
  cap.resolution = 96;
  LodPolicy pol;
  generate_lods(a, pol, cap, SamplingConfig{});
  pol.threads = 3;
  generate_lods(b, pol, cap, SamplingConfig{});
  for (NodeId id = 0; id < a.size(); ++id) CHECK(*a.node(id).lod == *b.node(id).lod);
  CHECK(node_seed(0, 1) != node_seed(0, 2));
}

TEST_CASE("surfel files round-trip bit-exactly") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 30; ++i) {
    const auto c = random_cloud(rng);
    const std::string bytes = encode_surfel_file(c);
    CHECK(bytes.size() == kSurfelFileHeaderBytes + kSurfelRecordBytes * c.size());
    CHECK(bytes.substr(0, 4) == "PBS1");
    CHECK(decode_surfel_file(bytes) == c);
  }
  const auto dir = temp_dir("io");
  const auto c = random_cloud(rng);
  write_surfel_file(c, dir / "x.pbs");
  CHECK(read_surfel_file(dir / "x.pbs") == c);
}

TEST_CASE("surfel file errors") {
  SurfelCloud c;
  c.surfels.resize(3);
  const std::string bytes = encode_surfel_file(c);
  CHECK(decode_surfel_file(encode_surfel_file(SurfelCloud{})).empty());
  CHECK_THROWS_AS(decode_surfel_file(bytes.substr(0, 40)), ParseError);
  try {
    decode_surfel_file(bytes.substr(0, bytes.size() - 1), "cut.pbs");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("cut.pbs") != std::string::npos);
  }
  CHECK_THROWS_AS(decode_surfel_file(bytes + "x"), ParseError);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_surfel_file(bad), ParseError);
}

TEST_CASE("manifest round trip with a shared mesh") {
  Scene s = two_tori();
  CaptureConfig cap;
  cap.resolution = 64;
  generate_lods(s, LodPolicy{}, cap, SamplingConfig{});
  const auto dir = temp_dir("manifest");
  BuildInfo info;
  info.resolution = 64;
  info.seed = 9;
  write_manifest(s, dir, &info);
  CHECK(std::distance(fs::directory_iterator(dir / "meshes"), fs::directory_iterator{}) == 1);
  CHECK(std::distance(fs::directory_iterator(dir / "lods"), fs::directory_iterator{}) == 3);

  BuildInfo back_info;
  const Scene back = read_manifest(dir, &back_info);
  CHECK(back_info.resolution == 64);
  CHECK(back_info.seed == 9);
  REQUIRE(back.size() == s.size());
  CHECK(back.root() == s.root());
  for (NodeId id = 0; id < s.size(); ++id) {
    const auto& x = s.node(id);
    const auto& y = back.node(id);
    CHECK(x.name == y.name);
    CHECK(x.children == y.children);
    CHECK(x.transform == y.transform);
    CHECK(x.bounds == y.bounds);
    CHECK(x.triangle_count == y.triangle_count);
    REQUIRE(y.lod);
    CHECK(*x.lod == *y.lod);
  }
  CHECK(back.node(0).mesh == back.node(1).mesh);  // loaded once
  CHECK(back.node(0).mesh->triangles == s.node(0).mesh->triangles);
}

TEST_CASE("manifest referencing a missing file is an error") {
  Scene s = make_single_mesh_scene(std::make_shared<const TriangleMesh>(make_box()));
  const auto dir = temp_dir("missing");
  write_manifest(s, dir);
  for (const auto& e : fs::directory_iterator(dir / "meshes")) fs::remove(e.path());
  CHECK_THROWS_AS(read_manifest(dir), Error);
  CHECK_THROWS_AS(read_manifest(dir / "nope"), Error);
  {
    std::ofstream f(dir / kManifestName);
    f << "{ not json";
  }
  CHECK_THROWS_AS(read_manifest(dir), ParseError);
}
