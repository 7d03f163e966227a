// Acceptance suite: one PASS/FAIL line per criterion, details on indented
// lines. Exit status is non-zero when any criterion fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pbs/bench.hpp"
#include "pbs/lodpipe.hpp"
#include "pbs/metrics.hpp"
#include "pbs/prefixmath.hpp"
#include "pbs/procedural.hpp"
#include "pbs/renderer.hpp"
#include "pbs/sampling.hpp"

using namespace pbs;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void info(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

void report(const char* name, bool ok, const std::string& details) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, details.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename F>
double timed_ms(F&& f) {
  const auto t0 = Clock::now();
  f();
  return ms_since(t0);
}

// Shared fixture: the ~35k-triangle torus captured at 1024^2.
struct Fixture {
  std::shared_ptr<const TriangleMesh> mesh;
  Scene scene;
  CandidateSet candidates;
  double capture_ms = 0;
};

Fixture make_fixture() {
  Fixture f;
  f.mesh = std::make_shared<const TriangleMesh>(make_torus());
  f.scene = make_single_mesh_scene(f.mesh);
  CaptureConfig cap;
  cap.resolution = 1024;
  const auto t0 = Clock::now();
  f.candidates = collect_candidates(capture_gbuffers(f.scene, f.scene.root(), cap));
  f.capture_ms = ms_since(t0);
  info("fixture: torus %zu triangles, %zu candidates from 8 x 1024^2 buffers (%.0f ms)", f.mesh->triangle_count(),
       f.candidates.size(), f.capture_ms);
  return f;
}

// ---------------------------------------------------------------------------

void oracle_equivalence() {
  std::mt19937_64 rng(1);
  int instances = 0, matches = 0;
  for (int inst = 0; inst < 120; ++inst) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<Vec3f> pts;
    if (inst % 10 == 9) {
      // Lattice instances exercise tie-breaking.
      for (std::size_t i = 0; i < n; ++i) pts.push_back({float(i % 6), float((i / 6) % 6), float(i / 36)});
    } else {
      pts = oracle::random_points(n, 7000 + inst);
    }
    const auto cand = oracle::as_candidates(pts);
    SamplingConfig cfg;
    cfg.target_count = static_cast<std::uint32_t>(n);
    cfg.sample_size = static_cast<std::uint32_t>(n + inst % 3);
    cfg.seed = inst;
    const SurfelCloud prog = sample_progressive(cand, cfg);
    const auto order = progressive_order(cand, cfg);
    const SurfelCloud exact = exact_greedy_permutation(cand, order[0], 0, cfg.p_m);
    const auto want = oracle::greedy(pts, order[0]);
    bool same = prog.surfels == exact.surfels && order == want;
    ++instances;
    matches += same;
  }
  report("oracle-equivalence", matches == instances,
         fmt("%d/%d instances identical to exact greedy and the from-scratch oracle (n <= 200)", matches, instances));
}

void r_net() {
  int prefixes = 0, bad = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 500;
    const auto pts = oracle::random_points(n, 900 + seed);
    const auto order = exact_greedy_order(oracle::as_candidates(pts), static_cast<std::uint32_t>(seed % n));
    if (order.size() != n) {
      ++bad;
      continue;
    }
    for (std::size_t k = 2; k <= n; ++k) {
      double r2 = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) r2 = std::min(r2, oracle::dist2(pts[order[a]], pts[order[b]]));
      double cover2 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) d = std::min(d, oracle::dist2(pts[i], pts[order[j]]));
        cover2 = std::max(cover2, d);
      }
      ++prefixes;
      if (cover2 > r2) ++bad;  // packing holds by the choice of r
    }
  }
  report("r-net", bad == 0,
         fmt("%d prefixes over 20 seeds (n = 500); %d violate covering radius <= min pairwise distance", prefixes, bad));
}

struct ExactRun {
  std::vector<std::uint32_t> order;
  double ms = 0;
};

void distribution(const Fixture& f, const ExactRun& exact) {
  const std::size_t prefixes[] = {1000, 5000, 10000};
  std::vector<Surfel> ex;
  for (auto i : exact.order) ex.push_back(f.candidates.surfels[i]);
  double exact_min[3];
  for (int p = 0; p < 3; ++p) exact_min[p] = min_neighbor_distances(std::span(ex.data(), prefixes[p])).min;

  bool ok = true;
  double worst_vs_random = std::numeric_limits<double>::infinity(), worst_vs_exact = worst_vs_random;
  std::vector<double> med_prog[3], med_rand[3];
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SamplingConfig cfg;
    cfg.target_count = 10000;
    cfg.seed = seed;
    const auto prog = sample_progressive(f.candidates, cfg);
    const auto rnd = sample_random(f.candidates, 10000, seed);
    for (int p = 0; p < 3; ++p) {
      const double mp = min_neighbor_distances(prog, prefixes[p]).median;
      const double mr = min_neighbor_distances(rnd, prefixes[p]).median;
      med_prog[p].push_back(mp);
      med_rand[p].push_back(mr);
      ok = ok && mp > mr && mp >= 0.5 * exact_min[p];
      worst_vs_random = std::min(worst_vs_random, mp / mr);
      worst_vs_exact = std::min(worst_vs_exact, mp / exact_min[p]);
    }
  }
  // Spot check of the library metric against brute force.
  {
    SamplingConfig cfg;
    cfg.target_count = 1000;
    const auto prog = sample_progressive(f.candidates, cfg);
    std::vector<Vec3f> pts;
    for (const auto& s : prog.surfels) pts.push_back(s.position);
    const double brute = oracle::median(oracle::nn_distances(pts, pts.size()));
    const double lib = min_neighbor_distances(prog, 1000).median;
    info("brute-force median check at 1k: %.9g vs %.9g", brute, lib);
    ok = ok && std::abs(brute - lib) <= 1e-12 * std::max(1.0, brute);
  }
  for (int p = 0; p < 3; ++p)
    info("prefix %5zu: progressive median %.5f (seed range %.5f..%.5f), random median %.5f, exact min %.5f",
         prefixes[p], oracle::median(med_prog[p]), *std::min_element(med_prog[p].begin(), med_prog[p].end()),
         *std::max_element(med_prog[p].begin(), med_prog[p].end()), oracle::median(med_rand[p]), exact_min[p]);
  report("distribution-quality", ok,
         fmt("20 seeds x {1k,5k,10k}: min progressive/random median ratio %.3f (> 1), min progressive median / "
             "exact min %.3f (>= 0.5)",
             worst_vs_random, worst_vs_exact));
}

void speed(const Fixture& f, const ExactRun& exact) {
  SamplingConfig cfg;
  cfg.target_count = 10000;
  auto median_time = [&](const CandidateSet& c) {
    std::vector<double> t;
    for (int r = 0; r < 3; ++r) t.push_back(timed_ms([&] { (void)progressive_order(c, cfg); }));
    return oracle::median(t);
  };
  const double prog_full = median_time(f.candidates);
  CandidateSet tenth;
  for (std::size_t i = 0; i < f.candidates.size(); i += 10) tenth.surfels.push_back(f.candidates.surfels[i]);
  const double prog_tenth = median_time(tenth);
  const double speedup = exact.ms / prog_full;
  const double growth = prog_full / prog_tenth;
  info("exact greedy 10k from %zu candidates: %.0f ms", f.candidates.size(), exact.ms);
  info("progressive 10k: %.1f ms from %zu candidates, %.1f ms from %zu", prog_full, f.candidates.size(), prog_tenth,
       tenth.size());
  report("speed", f.candidates.size() >= 1'000'000 && speedup >= 10 && growth < 2,
         fmt("progressive %.1fx faster than exact (>= 10); time grows %.2fx for 10x candidates (< 2)", speedup,
             growth));
}

void prefix_formula(const SurfelCloud& cloud) {
  const PrefixModel m = PrefixModel::of(cloud);
  bool ok = m.total >= 4ull * m.p_m;
  const auto at_rm = prefix_for_radius(m, m.r_m).count;
  const auto at_half = prefix_for_radius(m, m.r_m / 2).count;
  ok = ok && at_rm == m.p_m && at_half == 4ull * m.p_m;
  std::uint64_t last = std::numeric_limits<std::uint64_t>::max();
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const double r = m.r_m * std::pow(2.0, -5.0 + 10.0 * i / 99.0);
    const auto c = prefix_for_radius(m, r).count;
    violations += c > last;
    last = c;
  }
  ok = ok && violations == 0;
  report("prefix-formula", ok,
         fmt("p_m %u, r_m %.6f, total %llu: p(r_m) = %llu, p(r_m/2) = %llu, %d increases over 100 radii", m.p_m,
             m.r_m, (unsigned long long)m.total, (unsigned long long)at_rm, (unsigned long long)at_half, violations));
}

CameraModel coverage_camera(double dist, int size) {
  CameraModel cam;
  const Vec3d dir = normalize(Vec3d{0, 0.6, 1});
  cam.position = dir * dist;
  cam.forward = -dir;
  cam.width = cam.height = size;
  return cam;
}

void coverage(const Fixture& f, const std::shared_ptr<const SurfelCloud>& cloud) {
  Scene s = make_single_mesh_scene(f.mesh);
  s.node(s.root()).lod = cloud;
  const int size = 512;
  const double s_px = 2.0;
  bool ok = true;
  std::string holes_txt;
  for (double dist : {7.0, 10.0, 16.0}) {
    const CameraModel cam = coverage_camera(dist, size);
    FrameBuffer geo(size, size), pts(size, size);
    render_frame(s, {{s.root(), RenderAction::Kind::Geometry}}, cam, geo);
    SelectionParams sp;
    sp.surfel_size = s_px;
    auto acts = select_render_actions(s, cam, sp);
    const bool plain = acts.size() == 1 && acts[0].kind == RenderAction::Kind::SurfelPrefix;
    render_frame(s, acts, cam, pts);
    std::size_t mask = 0, holes = 0;
    for (std::size_t i = 0; i < geo.depth.size(); ++i)
      if (geo.painted(i)) {
        ++mask;
        holes += !pts.painted(i);
      }
    const double frac = double(holes) / double(mask);
    ok = ok && plain && frac <= 0.05;
    info("distance %.0f: prefix %llu of %zu, surfel size %.0f px, %zu mask pixels, holes %.3f%%", dist,
         (unsigned long long)(acts.empty() ? 0 : acts[0].prefix), cloud->size(), s_px, mask, 100 * frac);
    holes_txt += fmt("%s%.2f%%", holes_txt.empty() ? "" : ", ", 100 * frac);

    // Informational: the radius rule as printed.
    sp.rule = RadiusRule::AsPrinted;
    acts = select_render_actions(s, cam, sp);
    render_frame(s, acts, cam, pts);
    std::size_t holes_ap = 0;
    for (std::size_t i = 0; i < geo.depth.size(); ++i) holes_ap += geo.painted(i) && !pts.painted(i);
    info("  as-printed rule: prefix %llu, holes %.1f%% (not asserted)",
         (unsigned long long)(acts.empty() ? 0 : acts[0].prefix), 100.0 * holes_ap / mask);
  }

  // SSIM against the triangle render as the prefix grows.
  const CameraModel cam = coverage_camera(4.0, size);
  FrameBuffer geo(size, size), pts(size, size);
  render_frame(s, {{s.root(), RenderAction::Kind::Geometry}}, cam, geo);
  const RgbImage ref = geo.to_image();
  const double d_p = projected_pixel_distance(cam, s.node(s.root()));
  std::vector<double> scores;
  std::string ssim_txt;
  for (std::uint64_t p : {100ull, 1000ull, 10000ull, 100000ull}) {
    const double r = cloud->r_m * std::sqrt(double(cloud->p_m) / double(p));
    const double sz = std::max(1.0, 2 * r / d_p);
    render_frame(s, {{s.root(), RenderAction::Kind::SurfelPrefix, p, sz, r, 0}}, cam, pts);
    scores.push_back(ssim(ref, pts.to_image()).mean_index);
    info("prefix %6llu: radius %.5f, surfel size %.1f px, SSIM %.4f", (unsigned long long)p, r, sz, scores.back());
    ssim_txt += fmt("%s%.3f", ssim_txt.empty() ? "" : " -> ", scores.back());
  }
  for (std::size_t i = 1; i < scores.size(); ++i) ok = ok && scores[i] >= scores[i - 1] - 0.01;
  report("coverage", ok,
         fmt("holes at distances 7/10/16: %s (<= 5%%); SSIM over prefixes 100/1k/10k/100k: %s (monotone within 0.01)",
             holes_txt.c_str(), ssim_txt.c_str()));
}

void controller() {
  bool ok = true;
  int deadband_checked = 0;
  for (int i = 0; i <= 40; ++i) {
    const double ratio = 0.9 + 0.2 * i / 40.0;
    for (double s0 : {1.0, 2.5, 4.0, 8.0}) {
      BudgetController c(10.0, s0);
      ok = ok && c.update(10.0 * ratio) == s0;
      ++deadband_checked;
    }
  }
  BudgetController four(10.0, 4.0);
  const double five = four.update(20.0);
  ok = ok && five == 5.0;
  BudgetController hi(10.0, 7.5), lo(10.0, 1.5);
  double top = 0, bottom = 0;
  for (int i = 0; i < 10; ++i) {
    top = hi.update(1000.0);
    bottom = lo.update(0.01);
  }
  ok = ok && top == 8.0 && bottom == 1.0;

  // Constant load: frame cost proportional to surfel count, i.e. to 1/s^2.
  int worst = 0, cases = 0, converged = 0;
  for (double load : {5.0, 20.0, 40.0, 90.0, 160.0, 250.0, 400.0, 640.0, 2000.0})
    for (double s0 : {1.0, 3.0, 8.0}) {
      BudgetController c(10.0, s0);
      double s = c.size();
      int last_change = -1;
      for (int it = 0; it < 200; ++it) {
        const double next = c.update(load / (s * s));
        if (next != s) last_change = it;
        s = next;
      }
      ++cases;
      const int settle = last_change + 1;
      converged += settle <= 60;
      worst = std::max(worst, settle);
    }
  ok = ok && converged == cases;
  report("controller", ok,
         fmt("%d deadband cases unchanged; 4 @ ratio 2 -> %.17g; clamps %.17g / %.17g; %d/%d load cases settle, "
             "slowest after %d iterations (<= 60)",
             deadband_checked, five, top, bottom, converged, cases, worst));
}

void ssim_checks(const Fixture& f) {
  // Rendered and random images.
  const CameraModel cam = coverage_camera(5.0, 96);
  FrameBuffer fb(96, 96);
  render_frame(f.scene, {{f.scene.root(), RenderAction::Kind::Geometry}}, cam, fb);
  std::vector<RgbImage> imgs{fb.to_image()};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0, 1);
  for (int k = 0; k < 4; ++k) {
    RgbImage im(96, 96);
    for (auto& v : im.data) v = u(rng);
    imgs.push_back(im);
  }
  bool ok = true;
  double worst_sym = 0, worst_closed = 0;
  for (const auto& a : imgs) ok = ok && ssim(a, a).mean_index == 1.0;
  for (std::size_t i = 0; i < imgs.size(); ++i)
    for (std::size_t j = i + 1; j < imgs.size(); ++j)
      worst_sym = std::max(worst_sym, std::abs(ssim(imgs[i], imgs[j]).mean_index - ssim(imgs[j], imgs[i]).mean_index));
  const double C1 = 1e-4;
  for (int k = 0; k < 20; ++k) {
    const float x = u(rng), y = u(rng);
    const double want = (2.0 * x * y + C1) / (double(x) * x + double(y) * y + C1);
    worst_closed = std::max(worst_closed, std::abs(ssim(RgbImage(32, 24, x), RgbImage(32, 24, y)).mean_index - want));
  }
  ok = ok && worst_sym <= 1e-12 && worst_closed <= 1e-9;
  report("ssim", ok,
         fmt("self = 1 exactly on %zu images; max asymmetry %.3g (<= 1e-12); max constant-image error %.3g (<= 1e-9)",
             imgs.size(), worst_sym, worst_closed));
}

SurfelCloud random_cloud(std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(-1000, 1000);
  auto f = [&] {
    switch (rng() % 16) {
      case 0: return -0.0f;
      case 1: return std::numeric_limits<float>::denorm_min() * float(rng() % 100);
      case 2: return std::numeric_limits<float>::max();
      default: return u(rng);
    }
  };
  SurfelCloud c;
  const std::size_t n = rng() % 2000;
  for (std::size_t i = 0; i < n; ++i)
    c.surfels.push_back({{f(), f(), f()},
                         {f(), f(), f()},
                         {std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng())}});
  c.p_m = static_cast<std::uint32_t>(rng());
  c.r_m = std::bit_cast<double>(rng() & 0x7fefffffffffffffull);
  c.seed = rng();
  if (n) c.bounds = Box3({f(), f(), f()}, {1e30, 1e30, 1e30});
  return c;
}

void persistence() {
  std::mt19937_64 rng(99);
  const fs::path dir = fs::temp_directory_path() / "pbs_acceptance_persistence";
  auto mesh = std::make_shared<const TriangleMesh>(make_box());
  int file_ok = 0, manifest_ok = 0;
  for (int i = 0; i < 100; ++i) {
    const SurfelCloud c = random_cloud(rng);
    const std::string bytes = encode_surfel_file(c);
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_surfel_file(c, dir / "c.pbs");
    const SurfelCloud back = read_surfel_file(dir / "c.pbs");
    file_ok += encode_surfel_file(back) == bytes && back.size() == c.size() &&
               std::memcmp(back.surfels.data(), c.surfels.data(), c.size() * sizeof(Surfel)) == 0;

    Scene s = make_single_mesh_scene(mesh);
    s.node(s.root()).lod = std::make_shared<const SurfelCloud>(c);
    write_manifest(s, dir / "scene");
    const Scene r = read_manifest(dir / "scene");
    const auto& lod = r.node(r.root()).lod;
    manifest_ok += lod && encode_surfel_file(*lod) == bytes && r.node(r.root()).transform == s.node(s.root()).transform;
  }
  fs::remove_all(dir);
  report("persistence", file_ok == 100 && manifest_ok == 100,
         fmt("surfel file %d/100 and manifest %d/100 clouds byte-identical after reload", file_ok, manifest_ok));
}

void preprocessing(const Fixture& f) {
  CaptureConfig cap;
  cap.resolution = 1024;
  const std::vector<std::uint32_t> targets{1000, 10000, 50000, 100000};
  const auto rows = time_preprocessing(*f.mesh, targets, cap, SamplingConfig{}, 3);
  std::vector<double> front;
  for (const auto& r : rows) front.push_back(r.capture_ms + r.candidate_ms);
  const double mid = oracle::median(front);
  bool ok = true;
  double worst = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double dev = std::abs(front[i] / mid - 1);
    worst = std::max(worst, dev);
    ok = ok && dev <= 0.2;
    if (i) ok = ok && rows[i].sampling_ms > rows[i - 1].sampling_ms;
    info("target %6u: candidates %zu, capture %.0f ms, candidates %.0f ms, sampling %.0f ms, total %.0f ms",
         rows[i].target, rows[i].candidates, rows[i].capture_ms, rows[i].candidate_ms, rows[i].sampling_ms,
         rows[i].total_ms);
  }
  report("preprocessing-table", ok,
         fmt("capture+candidate within %.1f%% of the median (<= 20%%); sampling strictly increasing: %s",
             100 * worst, ok ? "yes" : "see rows"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  oracle_equivalence();
  r_net();
  controller();
  persistence();

  const Fixture f = make_fixture();
  ExactRun exact;
  exact.ms = timed_ms([&] { exact.order = exact_greedy_order(f.candidates, 0, 10000); });
  distribution(f, exact);
  speed(f, exact);

  SamplingConfig cfg;
  cfg.target_count = 100000;
  const auto cloud = std::make_shared<const SurfelCloud>(sample_progressive(f.candidates, cfg));
  info("progressive 100k cloud: r_m %.5f at p_m %u", cloud->r_m, cloud->p_m);
  prefix_formula(*cloud);
  coverage(f, cloud);
  ssim_checks(f);
  preprocessing(f);

  std::printf("acceptance: %d failing criteria, %.0f s\n", failures, ms_since(t0) / 1000);
  return failures == 0 ? 0 : 1;
}
