#include "pbs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "pbs/error.hpp"
#include "pbs/metrics.hpp"
#include "pbs/point_octree.hpp"

namespace pbs {

Box3 CandidateSet::bounds() const {
  Box3 b;
  for (const auto& s : surfels) b.extend(Vec3d(s.position));
  return b;
}

void SamplingConfig::validate() const {
  if (target_count < 1) throw Error("target count must be >= 1");
  if (sample_size < 1) throw Error("sample size must be >= 1");
  if (heuristic_period < 1) throw Error("heuristic period must be >= 1");
  if (removal_radius_factor < 0) throw Error("removal radius factor must be >= 0");
}

void deduplicate_candidates(std::vector<Surfel>& surfels, double tolerance) {
  const std::size_t n = surfels.size();
  if (n < 2) return;
  std::vector<std::uint32_t> by_x(n);
  std::iota(by_x.begin(), by_x.end(), 0u);
  std::sort(by_x.begin(), by_x.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& pa = surfels[a].position;
    const auto& pb = surfels[b].position;
    if (pa.x != pb.x) return pa.x < pb.x;
    return a < b;
  });

  // A candidate is dropped when some earlier candidate (in input order) lies
  // within the tolerance. Only x-neighbours within the tolerance can qualify.
  const double tol_sq = tolerance * tolerance;
  std::vector<char> drop(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = by_x[i];
    const auto& pa = surfels[a].position;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = by_x[j];
      const auto& pb = surfels[b].position;
      if (double(pb.x) - double(pa.x) > tolerance) break;
      if (distance_sq(pa, pb) <= tol_sq) drop[std::max(a, b)] = 1;
    }
  }
  std::size_t out = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) surfels[out++] = surfels[i];
  surfels.resize(out);
}

CandidateSet collect_candidates(const GBufferSet& buffers) {
  CandidateSet set;
  set.source_directions = static_cast<std::uint32_t>(buffers.size());
  std::size_t total = 0;
  for (const auto& gb : buffers) {
    set.source_resolution = std::max(set.source_resolution, static_cast<std::uint32_t>(gb.width));
    total += gb.covered_count();
  }
  set.surfels.reserve(total);
  for (const auto& gb : buffers)
    for (std::size_t i = 0; i < gb.covered.size(); ++i) {
      if (!gb.covered[i]) continue;
      set.surfels.push_back({gb.position[i], gb.normal[i], to_rgba8(gb.color[i])});
    }
  deduplicate_candidates(set.surfels);
  return set;
}

namespace {

std::uint32_t uniform_index(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return static_cast<std::uint32_t>(std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng));
}

}  // namespace

std::vector<std::uint32_t> progressive_order(const CandidateSet& candidates, const SamplingConfig& config) {
  config.validate();
  if (candidates.empty()) throw Error("progressive sampling needs at least one candidate");
  const auto& pts = candidates.surfels;
  const auto n = static_cast<std::uint32_t>(pts.size());
  const std::uint32_t target = std::min(config.target_count, n);

  std::mt19937_64 rng(config.seed);
  std::vector<std::uint32_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0u);
  std::vector<std::uint32_t> where(n);  // position of a candidate in `remaining`
  std::iota(where.begin(), where.end(), 0u);
  auto remove = [&](std::uint32_t cand) {
    const std::uint32_t at = where[cand];
    const std::uint32_t last = remaining.back();
    remaining[at] = last;
    where[last] = at;
    remaining.pop_back();
  };

  PointOctree chosen_tree(candidates.bounds());
  std::vector<std::uint32_t> order;
  order.reserve(target);
  auto choose = [&](std::uint32_t cand) {
    order.push_back(cand);
    chosen_tree.insert(cand, pts[cand].position);
    remove(cand);
  };

  choose(uniform_index(rng, 0, n - 1));

  std::vector<std::uint32_t> draw;
  std::vector<double> dist;
  std::vector<char> taken;
  for (std::uint64_t round = 0; order.size() < target && !remaining.empty(); ++round) {
    const auto m = static_cast<std::uint32_t>(std::min<std::size_t>(config.sample_size, remaining.size()));
    // Partial Fisher-Yates over the remaining input: positions [0, m) form the draw.
    for (std::uint32_t j = 0; j < m; ++j) {
      const std::uint32_t r = uniform_index(rng, j, remaining.size() - 1);
      std::swap(remaining[j], remaining[r]);
      where[remaining[j]] = j;
      where[remaining[r]] = r;
    }
    draw.assign(remaining.begin(), remaining.begin() + m);
    const auto per_round = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(1 + round / config.heuristic_period, m));

    dist.assign(m, 0.0);
    taken.assign(m, 0);
    if (per_round == 1) {
      // Only the farthest member matters, so queries may stop as soon as
      // they prove a member cannot beat the current best.
      double best = -1;
      for (std::uint32_t i = 0; i < m; ++i) {
        const auto nn = chosen_tree.nearest(pts[draw[i]].position, PointOctree::kNone, best);
        dist[i] = nn.dist_sq;
        best = std::max(best, nn.dist_sq);
      }
    } else {
      for (std::uint32_t i = 0; i < m; ++i) dist[i] = chosen_tree.nearest(pts[draw[i]].position).dist_sq;
    }

    double round_best = -1;
    for (std::uint32_t pick = 0; pick < per_round && order.size() < target; ++pick) {
      std::uint32_t arg = m;
      for (std::uint32_t i = 0; i < m; ++i) {
        if (taken[i]) continue;
        if (arg == m || dist[i] > dist[arg] || (dist[i] == dist[arg] && draw[i] < draw[arg])) arg = i;
      }
      if (arg == m) break;
      taken[arg] = 1;
      if (pick == 0) round_best = dist[arg];
      const std::uint32_t cand = draw[arg];
      choose(cand);
      if (pick + 1 < per_round)
        for (std::uint32_t i = 0; i < m; ++i)
          if (!taken[i]) dist[i] = std::min(dist[i], distance_sq(pts[draw[i]].position, pts[cand].position));
    }

    if (config.removal_radius_factor > 0 && round_best > 0) {
      const double f = config.removal_radius_factor;
      const double limit = f * f * round_best;
      for (std::uint32_t i = 0; i < m; ++i)
        if (!taken[i] && chosen_tree.nearest(pts[draw[i]].position).dist_sq < limit) remove(draw[i]);
    }
  }
  return order;
}

std::vector<std::uint32_t> exact_greedy_order(const CandidateSet& candidates, std::uint32_t start,
                                              std::uint32_t count) {
  const auto n = static_cast<std::uint32_t>(candidates.size());
  if (n == 0) throw Error("greedy permutation needs at least one candidate");
  if (start >= n)
    throw Error("start index " + std::to_string(start) + " out of range (" + std::to_string(n) + " candidates)");
  const std::uint32_t target = count == 0 ? n : std::min(count, n);

  // Structure-of-arrays copy keeps the O(n) sweep per step cache friendly.
  std::vector<float> xs(n), ys(n), zs(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    xs[i] = candidates.surfels[i].position.x;
    ys[i] = candidates.surfels[i].position.y;
    zs[i] = candidates.surfels[i].position.z;
  }
  std::vector<double> mind(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> order;
  order.reserve(target);
  std::uint32_t cur = start;
  for (;;) {
    order.push_back(cur);
    mind[cur] = -1.0;  // chosen marker; real distances are >= 0 and min() keeps it
    if (order.size() == target) break;
    const double px = xs[cur], py = ys[cur], pz = zs[cur];
    double best = -1.0;
    std::uint32_t arg = n;
    for (std::uint32_t i = 0; i < n; ++i) {
      // Same arithmetic as distance_sq().
      const double dx = double(xs[i]) - px;
      const double dy = double(ys[i]) - py;
      const double dz = double(zs[i]) - pz;
      const double m = std::min(mind[i], dx * dx + dy * dy + dz * dz);
      mind[i] = m;
      if (m > best) {  // strict: the lowest index wins ties
        best = m;
        arg = i;
      }
    }
    cur = arg;
  }
  return order;
}

std::vector<std::uint32_t> random_order(const CandidateSet& candidates, std::uint32_t target_count,
                                        std::uint64_t seed) {
  const auto n = static_cast<std::uint32_t>(candidates.size());
  if (n == 0) throw Error("random sampling needs at least one candidate");
  const std::uint32_t target = std::min(target_count, n);
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::uint32_t j = 0; j < target; ++j) std::swap(idx[j], idx[uniform_index(rng, j, n - 1)]);
  idx.resize(target);
  return idx;
}

SurfelCloud make_cloud(const CandidateSet& candidates, const std::vector<std::uint32_t>& order, std::uint32_t p_m,
                       std::uint64_t seed) {
  SurfelCloud cloud;
  cloud.surfels.reserve(order.size());
  for (auto i : order) cloud.surfels.push_back(candidates.surfels[i]);
  cloud.bounds = candidates.bounds();
  cloud.seed = seed;
  update_prefix_statistics(cloud, p_m);
  return cloud;
}

SurfelCloud sample_progressive(const CandidateSet& candidates, const SamplingConfig& config) {
  return make_cloud(candidates, progressive_order(candidates, config), config.p_m, config.seed);
}

SurfelCloud exact_greedy_permutation(const CandidateSet& candidates, std::uint32_t start, std::uint32_t count,
                                     std::uint32_t p_m) {
  return make_cloud(candidates, exact_greedy_order(candidates, start, count), p_m, 0);
}

SurfelCloud sample_random(const CandidateSet& candidates, std::uint32_t target_count, std::uint64_t seed,
                          std::uint32_t p_m) {
  return make_cloud(candidates, random_order(candidates, target_count, seed), p_m, seed);
}

}  // namespace pbs
