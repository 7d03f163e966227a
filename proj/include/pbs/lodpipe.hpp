#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pbs/raster.hpp"
#include "pbs/sampling.hpp"
#include "pbs/scene.hpp"
#include "pbs/surfel.hpp"

namespace pbs {

struct LodPolicy {
  std::uint64_t min_triangles_for_lod = 1000;
  std::uint64_t lod_triangle_threshold = 10000;
  std::uint32_t max_surfels = 200000;
  bool bottom_up = true;
  unsigned threads = 1;

  void validate() const;
  /// Whether a node with this many triangles gets its own LOD.
  bool wants_lod(std::uint64_t triangle_count) const;
  /// min(max_surfels, triangle_count / 2), before capping by candidate count.
  std::uint32_t surfel_count(std::uint64_t triangle_count) const;
};

struct NodeLodStats {
  NodeId node = kNoNode;
  std::uint64_t triangle_count = 0;
  std::size_t candidates = 0;
  std::size_t surfels = 0;
  double capture_ms = 0;
  double candidate_ms = 0;
  double sampling_ms = 0;
};

struct LodReport {
  std::vector<NodeLodStats> nodes;  // nodes that received a LOD, in completion order per level
  std::vector<std::string> warnings;
};

/// Per-node sampling seed derived from the global seed.
std::uint64_t node_seed(std::uint64_t seed, NodeId node);

/// Attaches a surfel cloud to every node the policy selects. Bottom-up mode
/// processes deeper levels first and captures descendants that already carry
/// a LOD from their surfels; top-down mode captures original geometry only.
/// `sampling.target_count` is ignored (the policy decides) and
/// `sampling.seed` is combined with the node id.
LodReport generate_lods(Scene& scene, const LodPolicy& policy, const CaptureConfig& capture,
                        const SamplingConfig& sampling);

/// Little-endian binary file: "PBS1", version, count, p_m, r_m, bounds,
/// seed, then count records of position (3 x f32), normal (3 x f32) and
/// color (4 x u8).
void write_surfel_file(const SurfelCloud& cloud, const std::filesystem::path& path);
SurfelCloud read_surfel_file(const std::filesystem::path& path);
std::string encode_surfel_file(const SurfelCloud& cloud);
SurfelCloud decode_surfel_file(const std::string& bytes, const std::string& source_name = "<surfels>");

inline constexpr std::uint32_t kSurfelFileVersion = 1;
inline constexpr std::size_t kSurfelFileHeaderBytes = 88;
inline constexpr std::size_t kSurfelRecordBytes = 28;

inline constexpr const char* kManifestName = "scene.json";

/// Settings recorded alongside a built scene (informational).
struct BuildInfo {
  std::uint32_t resolution = 0;
  std::uint32_t sample_size = 0;
  std::uint32_t heuristic_period = 0;
  std::uint32_t max_surfels = 0;
  std::uint64_t seed = 0;
  bool bottom_up = true;
};

/// Writes `dir/scene.json` plus one PLY per distinct mesh (named by content
/// hash, under meshes/) and one surfel file per LOD (under lods/).
void write_manifest(const Scene& scene, const std::filesystem::path& dir, const BuildInfo* info = nullptr);

/// Reads a manifest from a directory (or a direct path to the JSON file).
/// Missing referenced files are errors.
Scene read_manifest(const std::filesystem::path& dir_or_file, BuildInfo* info = nullptr);

}  // namespace pbs
