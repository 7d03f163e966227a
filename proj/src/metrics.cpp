#include "pbs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pbs/error.hpp"
#include "pbs/point_octree.hpp"

namespace pbs {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error("quantile of empty sequence");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

DistanceStats min_neighbor_distances(std::span<const Surfel> surfels, double scale) {
  if (surfels.size() < 2) throw Error("nearest-neighbour statistics need at least two surfels");
  Box3 bounds;
  for (const auto& s : surfels) bounds.extend(Vec3d(s.position));
  PointOctree tree(bounds);
  for (std::uint32_t i = 0; i < surfels.size(); ++i) tree.insert(i, surfels[i].position);

  DistanceStats st;
  st.prefix_length = surfels.size();
  st.distances.resize(surfels.size());
  for (std::uint32_t i = 0; i < surfels.size(); ++i)
    st.distances[i] = std::sqrt(tree.nearest(surfels[i].position, i).dist_sq) / scale;

  std::vector<double> sorted = st.distances;
  std::sort(sorted.begin(), sorted.end());
  st.min = sorted.front();
  st.max = sorted.back();
  st.q1 = quantile_sorted(sorted, 0.25);
  st.median = quantile_sorted(sorted, 0.5);
  st.q3 = quantile_sorted(sorted, 0.75);
  return st;
}

DistanceStats min_neighbor_distances(const SurfelCloud& cloud, std::size_t prefix, bool relative) {
  if (prefix < 2) throw Error("prefix must be at least 2");
  if (prefix > cloud.size())
    throw Error("prefix " + std::to_string(prefix) + " exceeds cloud size " + std::to_string(cloud.size()));
  double scale = 1.0;
  if (relative) {
    scale = cloud.bounds.diagonal();
    if (!(scale > 0)) throw Error("relative distances need non-degenerate cloud bounds");
  }
  return min_neighbor_distances(std::span<const Surfel>(cloud.surfels.data(), prefix), scale);
}

double compute_r_m(const SurfelCloud& cloud, std::uint32_t p_m) {
  if (cloud.size() < 2) throw Error("r_m needs at least two surfels");
  const std::size_t prefix = std::max<std::size_t>(2, std::min<std::size_t>(p_m, cloud.size()));
  return min_neighbor_distances(cloud, prefix).median;
}

void update_prefix_statistics(SurfelCloud& cloud, std::uint32_t p_m) {
  cloud.p_m = p_m;
  cloud.r_m = cloud.size() >= 2 ? compute_r_m(cloud, p_m) : 0.0;
}

void write_distance_stats_csv(std::ostream& out, std::span<const DistanceStats> stats, bool header) {
  if (header) out << "prefix,min,q1,median,q3,max\n";
  const auto old = out.precision(17);
  for (const auto& s : stats)
    out << s.prefix_length << ',' << s.min << ',' << s.q1 << ',' << s.median << ',' << s.q3 << ',' << s.max << '\n';
  out.precision(old);
}

std::vector<double> luma(const RgbImage& image) {
  std::vector<double> y(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const float* p = &image.data[i * 3];
    y[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return y;
}

namespace {

// Sums over every 8x8 window, separably: rows first, then columns. Each
// window sum is formed from scratch so the result does not drift.
std::vector<double> window_sums(const std::vector<double>& v, int w, int h) {
  const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      const double* p = &v[static_cast<std::size_t>(y) * w + x];
      for (int k = 0; k < kSsimWindow; ++k) s += p[k];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kSsimWindow; ++k) s += rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

SsimResult ssim(const RgbImage& a, const RgbImage& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error("ssim: image sizes differ (" + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                std::to_string(b.width) + "x" + std::to_string(b.height) + ")");
  if (a.width < kSsimWindow || a.height < kSsimWindow) throw Error("ssim: images must be at least 8x8");

  constexpr double L = 1.0;
  constexpr double C1 = (0.01 * L) * (0.01 * L);
  constexpr double C2 = (0.03 * L) * (0.03 * L);
  constexpr double N = kSsimWindow * kSsimWindow;

  const int w = a.width, h = a.height;
  const auto ya = luma(a), yb = luma(b);
  std::vector<double> aa(ya.size()), bb(ya.size()), ab(ya.size());
  for (std::size_t i = 0; i < ya.size(); ++i) {
    aa[i] = ya[i] * ya[i];
    bb[i] = yb[i] * yb[i];
    ab[i] = ya[i] * yb[i];
  }
  const auto sa = window_sums(ya, w, h), sb = window_sums(yb, w, h);
  const auto saa = window_sums(aa, w, h), sbb = window_sums(bb, w, h), sab = window_sums(ab, w, h);

  SsimResult r;
  r.map_width = w - kSsimWindow + 1;
  r.map_height = h - kSsimWindow + 1;
  r.map.resize(sa.size());
  double total = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double mx = sa[i] / N, my = sb[i] / N;
    const double vx = saa[i] / N - mx * mx;
    const double vy = sbb[i] / N - my * my;
    const double cxy = sab[i] / N - mx * my;
    const double v = ((2 * mx * my + C1) * (2 * cxy + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2));
    r.map[i] = v;
    total += v;
  }
  r.mean_index = total / static_cast<double>(r.map.size());
  return r;
}

void write_ssim_map(const SsimResult& result, const std::filesystem::path& path) {
  write_image(grayscale_image(result.map, result.map_width, result.map_height, 0.0, 1.0), path);
}

}  // namespace pbs
