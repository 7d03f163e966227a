#pragma once

#include <cstdint>
#include <vector>

#include "pbs/geometry.hpp"

namespace pbs {

/// One surface sample. Colors are stored at capture precision (RGBA8).
struct Surfel {
  Vec3f position;
  Vec3f normal{0, 0, 1};
  Rgba8 color{128, 128, 128, 255};

  bool operator==(const Surfel&) const = default;
};

inline constexpr std::uint32_t kDefaultReferencePrefix = 1000;

/// Ordered surfel approximation of one scene node. Every prefix of
/// `surfels` is itself a usable approximation; the order is fixed at
/// generation time.
struct SurfelCloud {
  std::vector<Surfel> surfels;
  std::uint32_t p_m = kDefaultReferencePrefix;  // reference prefix length
  double r_m = 0.0;  // median nearest-neighbour distance within the first min(p_m, size) surfels
  Box3 bounds;       // node-local
  std::uint64_t seed = 0;

  std::size_t size() const { return surfels.size(); }
  bool empty() const { return surfels.empty(); }
  /// r_m is meaningful only for clouds with at least two surfels.
  bool has_valid_r_m() const { return surfels.size() >= 2 && r_m > 0.0; }

  bool operator==(const SurfelCloud&) const = default;
};

/// Unordered candidate surfels read from capture buffers.
struct CandidateSet {
  std::vector<Surfel> surfels;
  std::uint32_t source_resolution = 0;
  std::uint32_t source_directions = 0;

  std::size_t size() const { return surfels.size(); }
  bool empty() const { return surfels.empty(); }
  Box3 bounds() const;
};

}  // namespace pbs
