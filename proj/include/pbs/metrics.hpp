#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "pbs/image.hpp"
#include "pbs/surfel.hpp"

namespace pbs {

struct DistanceStats {
  std::size_t prefix_length = 0;
  std::vector<double> distances;  // per surfel, in prefix order
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Linear-interpolated quantile of an ascending sequence (q in [0, 1]).
double quantile_sorted(std::span<const double> sorted, double q);

/// Distance from every surfel of the first `prefix` surfels to its nearest
/// other surfel in that prefix, with summary statistics. With `relative`,
/// distances are divided by the cloud's bounds diagonal.
/// Throws pbs::Error when prefix < 2 or prefix > cloud size.
DistanceStats min_neighbor_distances(const SurfelCloud& cloud, std::size_t prefix, bool relative = false);
DistanceStats min_neighbor_distances(std::span<const Surfel> surfels, double scale = 1.0);

/// Median nearest-neighbour distance over the first min(p_m, size) surfels.
/// Throws pbs::Error when the cloud has fewer than two surfels.
double compute_r_m(const SurfelCloud& cloud, std::uint32_t p_m);

/// Computes r_m and stores it together with p_m in the cloud. Clouds with
/// fewer than two surfels get r_m = 0 (invalid).
void update_prefix_statistics(SurfelCloud& cloud, std::uint32_t p_m);

void write_distance_stats_csv(std::ostream& out, std::span<const DistanceStats> stats, bool header = true);

struct SsimResult {
  double mean_index = 0;
  int map_width = 0;
  int map_height = 0;
  std::vector<double> map;  // one value per 8x8 window position
};

inline constexpr int kSsimWindow = 8;

/// Rec. 601 luma.
std::vector<double> luma(const RgbImage& image);

/// Single-scale SSIM on luma with 8x8 uniform windows at stride 1,
/// C1 = (0.01 L)^2, C2 = (0.03 L)^2, L = 1.
/// Throws pbs::Error on size mismatch or images smaller than 8x8.
SsimResult ssim(const RgbImage& a, const RgbImage& b);

void write_ssim_map(const SsimResult& result, const std::filesystem::path& path);

}  // namespace pbs
