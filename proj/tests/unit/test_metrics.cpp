#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "pbs/error.hpp"
#include "pbs/metrics.hpp"

using namespace pbs;

namespace {

SurfelCloud cloud_of(const std::vector<Vec3f>& pts) {
  SurfelCloud c;
  for (const auto& p : pts) c.surfels.push_back({p});
  return c;
}

RgbImage noise(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0, 1);
  RgbImage img(w, h);
  for (auto& v : img.data) v = u(rng);
  return img;
}

}  // namespace

TEST_CASE("nearest-neighbour distances match brute force") {
  for (std::size_t n : {2u, 17u, 500u, 2000u}) {
    const auto pts = oracle::random_points(n, n);
    const auto stats = min_neighbor_distances(cloud_of(pts), n);
    const auto want = oracle::nn_distances(pts, n);
    REQUIRE(stats.distances.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(stats.distances[i] == doctest::Approx(want[i]).epsilon(1e-12));
    CHECK(stats.median == doctest::Approx(oracle::median(want)).epsilon(1e-12));
    CHECK(stats.min == doctest::Approx(*std::min_element(want.begin(), want.end())));
    CHECK(stats.max == doctest::Approx(*std::max_element(want.begin(), want.end())));
  }
}

TEST_CASE("r_m of square corners and of a regular grid") {
  CHECK(compute_r_m(cloud_of({{0, 0, 0}, {2, 0, 0}, {0, 2, 0}, {2, 2, 0}}), 4) == doctest::Approx(2.0));
  std::vector<Vec3f> grid;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) grid.push_back({x * 0.5f, y * 0.5f, 0});
  CHECK(compute_r_m(cloud_of(grid), 1000) == doctest::Approx(0.5));
  // Only the first p_m surfels count: two close points first, then far ones.
  CHECK(compute_r_m(cloud_of({{0, 0, 0}, {0.1f, 0, 0}, {5, 0, 0}, {9, 0, 0}}), 2) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("r_m needs at least two surfels") {
  CHECK_THROWS_AS(compute_r_m(cloud_of({{0, 0, 0}}), 1000), Error);
  auto c = cloud_of({{0, 0, 0}});
  update_prefix_statistics(c, 10);
  CHECK(c.r_m == 0.0);
  CHECK(c.p_m == 10);
  CHECK_THROWS_AS(min_neighbor_distances(cloud_of({{0, 0, 0}, {1, 0, 0}}), 3), Error);
}

TEST_CASE("relative distances are scaled by the bounds diagonal") {
  auto c = cloud_of({{0, 0, 0}, {3, 4, 0}});
  c.bounds = Box3({0, 0, 0}, {3, 4, 0});
  CHECK(min_neighbor_distances(c, 2, true).median == doctest::Approx(1.0));
}

TEST_CASE("SSIM of an image with itself is exactly 1") {
  const auto a = noise(40, 30, 1);
  CHECK(ssim(a, a).mean_index == 1.0);
}

TEST_CASE("SSIM is symmetric") {
  const auto a = noise(33, 21, 2), b = noise(33, 21, 3);
  CHECK(std::abs(ssim(a, b).mean_index - ssim(b, a).mean_index) <= 1e-12);
}

TEST_CASE("SSIM of two constant images has a closed form") {
  const double C1 = 1e-4;
  for (auto [x, y] : {std::pair{0.2f, 0.7f}, {0.0f, 1.0f}, {0.5f, 0.5f}}) {
    const RgbImage a(16, 12, x), b(16, 12, y);
    const double want = (2.0 * x * y + C1) / (double(x) * x + double(y) * y + C1);
    CHECK(std::abs(ssim(a, b).mean_index - want) <= 1e-9);
  }
}

TEST_CASE("SSIM agrees with the per-window reference") {
  const auto a = noise(24, 20, 4);
  auto b = a;
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g(0, 0.1f);
  for (auto& v : b.data) v = std::clamp(v + g(rng), 0.0f, 1.0f);
  const auto r = ssim(a, b);
  CHECK(r.map_width == 17);
  CHECK(r.map_height == 13);
  CHECK(r.mean_index == doctest::Approx(oracle::ssim(a, b)).epsilon(1e-9));
}

TEST_CASE("SSIM rejects mismatched or tiny images") {
  CHECK_THROWS_AS(ssim(RgbImage(16, 16), RgbImage(16, 15)), Error);
  CHECK_THROWS_AS(ssim(RgbImage(7, 16), RgbImage(7, 16)), Error);
}

TEST_CASE("quantiles interpolate linearly") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
  CHECK(quantile_sorted(v, 1.0) == 4);
}

TEST_CASE("distance stats CSV") {
  const auto s = min_neighbor_distances(cloud_of({{0, 0, 0}, {1, 0, 0}, {3, 0, 0}}), 3);
  std::ostringstream out;
  write_distance_stats_csv(out, std::span(&s, 1));
  CHECK(out.str() == "prefix,min,q1,median,q3,max\n3,1,1,1,1.5,2\n");
}
