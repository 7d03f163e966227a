#include "pbs/lodpipe.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "pbs/error.hpp"

namespace pbs {

void LodPolicy::validate() const {
  if (min_triangles_for_lod > lod_triangle_threshold)
    throw Error("minTrianglesForLod (" + std::to_string(min_triangles_for_lod) +
                ") must not exceed lodTriangleThreshold (" + std::to_string(lod_triangle_threshold) + ")");
  if (max_surfels < 1) throw Error("maxSurfels must be >= 1");
}

bool LodPolicy::wants_lod(std::uint64_t triangle_count) const {
  return triangle_count > lod_triangle_threshold && triangle_count >= min_triangles_for_lod;
}

std::uint32_t LodPolicy::surfel_count(std::uint64_t triangle_count) const {
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(max_surfels, triangle_count / 2));
}

std::uint64_t node_seed(std::uint64_t seed, NodeId node) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (std::uint64_t{node} + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Height above the deepest leaf below each node.
std::vector<int> node_heights(const Scene& scene) {
  std::vector<int> h(scene.size(), 0);
  for (NodeId id : scene.post_order()) {
    int v = 0;
    for (NodeId c : scene.node(id).children) v = std::max(v, h[c] + 1);
    h[id] = v;
  }
  return h;
}

}  // namespace

LodReport generate_lods(Scene& scene, const LodPolicy& policy, const CaptureConfig& capture,
                        const SamplingConfig& sampling) {
  policy.validate();
  sampling.validate();
  LodReport report;
  if (scene.empty() || scene.root() == kNoNode) return report;

  const auto heights = node_heights(scene);
  std::vector<std::vector<NodeId>> levels;
  for (NodeId id : scene.post_order()) {
    if (!policy.wants_lod(scene.node(id).triangle_count)) continue;
    const auto level = static_cast<std::size_t>(policy.bottom_up ? heights[id] : 0);
    if (levels.size() <= level) levels.resize(level + 1);
    levels[level].push_back(id);
  }

  const CaptureSource source = policy.bottom_up ? CaptureSource::ChildSurfelLods : CaptureSource::Geometry;
  std::mutex report_mutex;

  auto build_one = [&](NodeId id) {
    NodeLodStats st;
    st.node = id;
    st.triangle_count = scene.node(id).triangle_count;

    auto t0 = Clock::now();
    const GBufferSet buffers = capture_gbuffers(scene, id, capture, source);
    st.capture_ms = ms_since(t0);

    t0 = Clock::now();
    const CandidateSet candidates = collect_candidates(buffers);
    st.candidate_ms = ms_since(t0);
    st.candidates = candidates.size();
    if (candidates.empty()) {
      std::lock_guard lock(report_mutex);
      report.warnings.push_back("node " + std::to_string(id) + " (" + scene.node(id).name +
                                "): capture produced no candidates, LOD skipped");
      return;
    }

    SamplingConfig cfg = sampling;
    cfg.seed = node_seed(sampling.seed, id);
    cfg.target_count =
        static_cast<std::uint32_t>(std::min<std::size_t>(policy.surfel_count(st.triangle_count), candidates.size()));
    t0 = Clock::now();
    auto cloud = std::make_shared<SurfelCloud>(sample_progressive(candidates, cfg));
    st.sampling_ms = ms_since(t0);
    st.surfels = cloud->size();

    std::lock_guard lock(report_mutex);
    scene.node(id).lod = std::move(cloud);
    report.nodes.push_back(st);
  };

  const unsigned threads = std::max(1u, policy.threads);
  for (const auto& level : levels) {
    if (threads == 1 || level.size() < 2) {
      for (NodeId id : level) build_one(id);
      continue;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto workers = std::min<std::size_t>(threads, level.size());
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < level.size();) {
          try {
            build_one(level[i]);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  return report;
}

}  // namespace pbs
