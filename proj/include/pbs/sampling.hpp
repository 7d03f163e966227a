#pragma once

#include <cstdint>
#include <vector>

#include "pbs/raster.hpp"
#include "pbs/surfel.hpp"

namespace pbs {

/// Candidates closer than this (node-local units) are treated as one.
inline constexpr double kCandidateDedupTolerance = 1e-7;

struct SamplingConfig {
  std::uint32_t target_count = 10000;
  std::uint32_t sample_size = 200;
  /// Every `heuristic_period` rounds, one more surfel is taken per round.
  std::uint32_t heuristic_period = 500;
  /// When > 0, draw members closer than factor * (round's best distance) to
  /// the chosen set are dropped from the input after the round. 0 disables.
  double removal_radius_factor = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t p_m = kDefaultReferencePrefix;

  void validate() const;
};

/// One candidate per covered pixel across all buffers (buffer order, then
/// row-major), with positions closer than kCandidateDedupTolerance merged
/// into the earliest occurrence.
CandidateSet collect_candidates(const GBufferSet& buffers);

/// Removes near-duplicate positions in place, keeping the first occurrence.
void deduplicate_candidates(std::vector<Surfel>& surfels, double tolerance = kCandidateDedupTolerance);

/// Approximate greedy permutation by randomized sampling. Returns candidate
/// indices in selection order.
///
/// The first index is uniform at random. Each round draws
/// min(sample_size, remaining) distinct candidates uniformly from the
/// remaining input and takes the 1 + floor(round / heuristic_period) draw
/// members farthest from everything chosen so far, one after another,
/// distances updated after every pick. Ties go to the lowest candidate
/// index. Deterministic for a fixed seed.
std::vector<std::uint32_t> progressive_order(const CandidateSet& candidates, const SamplingConfig& config);

SurfelCloud sample_progressive(const CandidateSet& candidates, const SamplingConfig& config);

/// Exact farthest-first traversal from `start` (ties: lowest index). Stops
/// after `count` points; 0 means all candidates.
std::vector<std::uint32_t> exact_greedy_order(const CandidateSet& candidates, std::uint32_t start,
                                              std::uint32_t count = 0);

SurfelCloud exact_greedy_permutation(const CandidateSet& candidates, std::uint32_t start, std::uint32_t count = 0,
                                     std::uint32_t p_m = kDefaultReferencePrefix);

/// Uniformly random prefix of length min(target_count, size).
std::vector<std::uint32_t> random_order(const CandidateSet& candidates, std::uint32_t target_count,
                                        std::uint64_t seed);

SurfelCloud sample_random(const CandidateSet& candidates, std::uint32_t target_count, std::uint64_t seed,
                          std::uint32_t p_m = kDefaultReferencePrefix);

/// Builds a cloud from an index order and fills p_m / r_m / bounds.
SurfelCloud make_cloud(const CandidateSet& candidates, const std::vector<std::uint32_t>& order,
                       std::uint32_t p_m, std::uint64_t seed);

}  // namespace pbs
