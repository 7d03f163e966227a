#include "pbs/prefixmath.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

#include "pbs/error.hpp"

namespace pbs {

void CameraModel::validate() const {
  if (width < 1 || height < 1) throw Error("camera viewport must be at least 1x1");
  if (!(length(forward) > 0)) throw Error("camera forward direction is zero");
  if (projection == Projection::Perspective && !(fov_y > 0 && fov_y < 3.14159)) throw Error("camera fov out of range");
  if (projection == Projection::Orthographic && !(ortho_pixel_size > 0)) throw Error("orthographic scale must be > 0");
}

ViewProjection CameraModel::view() const {
  validate();
  ViewProjection v;
  v.kind = projection == Projection::Perspective ? ViewProjection::Kind::Perspective
                                                 : ViewProjection::Kind::Orthographic;
  v.eye = position;
  v.forward = normalize(forward);
  make_view_basis(v.forward, up, v.right, v.up);
  v.width = width;
  v.height = height;
  v.pixel_size = ortho_pixel_size;
  v.focal = 0.5 * height / std::tan(0.5 * fov_y);
  return v;
}

double projected_pixel_distance(const CameraModel& camera, const Box3& bounds_world, const Mat4& local_to_world) {
  const ViewProjection v = camera.view();
  if (bounds_world.empty()) throw Error("projected pixel distance needs non-empty bounds");
  double depth = 0;
  if (!bounds_world.contains(camera.position)) {
    const Vec3d closest = bounds_world.closest_point(camera.position);
    depth = std::max(0.0, dot(closest - v.eye, v.forward));
  }
  const double spacing = v.pixel_spacing_at(depth);
  const Vec3d local = local_to_world.affine_inverse().transform_vector(v.right * spacing);
  return length(local);
}

double projected_pixel_distance(const CameraModel& camera, const SceneNode& node) {
  return projected_pixel_distance(camera, node.bounds, node.transform);
}

double radius_for_screen(double s, double d_p, RadiusRule rule) {
  if (!(d_p > 0)) throw Error("pixel distance must be > 0 (got " + std::to_string(d_p) + ")");
  if (!(s >= 1)) throw Error("surfel size must be >= 1 px (got " + std::to_string(s) + ")");
  return rule == RadiusRule::Consistent ? s * d_p / 2 : s / (2 * d_p);
}

void PrefixModel::validate() const {
  if (p_m < 2) throw Error("prefix model needs p_m >= 2");
  if (!(r_m > 0) || !std::isfinite(r_m)) throw Error("prefix model needs r_m > 0");
  if (total < 1) throw Error("prefix model needs a non-empty cloud");
}

double PrefixModel::r_min() const { return r_m * std::sqrt(static_cast<double>(p_m) / static_cast<double>(total)); }

PrefixChoice prefix_for_radius(const PrefixModel& model, double r) {
  model.validate();
  if (!(r > 0)) throw Error("radius must be > 0");
  PrefixChoice c;
  const double q = model.r_m / r;
  c.estimate = model.p_m * (q * q);
  const double rounded = std::floor(c.estimate + 0.5);
  const auto total = static_cast<double>(model.total);
  c.saturated = rounded > total;
  c.count = static_cast<std::uint64_t>(std::clamp(rounded, 1.0, total));
  return c;
}

BudgetController::BudgetController(double t_target_ms, double initial_size)
    : target_(t_target_ms), size_(std::clamp(initial_size, kSizeMin, kSizeMax)) {
  if (!(t_target_ms > 0)) throw Error("target frame time must be > 0");
  window_.fill(size_);
}

double BudgetController::window_mean() const {
  double s = 0;
  for (double w : window_) s += w;
  return s / static_cast<double>(kWindow);
}

double budget_formula(double s_old, double t_frame, double t_target) {
  return (s_old * 3 + s_old * t_frame / t_target) / 4;
}

double BudgetController::update(double t_frame_ms) {
  if (!(t_frame_ms > 0)) throw Error("frame time must be > 0");
  const double ratio = t_frame_ms / target_;
  if (ratio < kDeadbandLow || ratio > kDeadbandHigh)
    size_ = std::clamp(budget_formula(window_mean(), t_frame_ms, target_), kSizeMin, kSizeMax);
  std::rotate(window_.begin(), window_.begin() + 1, window_.end());
  window_.back() = size_;
  return size_;
}

void FoveaZones::validate() const {
  for (std::size_t i = 0; i < rings.size(); ++i) {
    if (!(rings[i].radius >= 0)) throw Error("fovea ring radius must be >= 0");
    if (!(rings[i].multiplier >= 1)) throw Error("fovea multipliers must be >= 1");
    if (i > 0 && !(rings[i].radius > rings[i - 1].radius)) throw Error("fovea ring radii must increase strictly");
    if (i > 0 && rings[i].multiplier < rings[i - 1].multiplier)
      throw Error("fovea multipliers must not decrease outward");
  }
}

double FoveaZones::multiplier_at(double x, double y) const {
  if (rings.empty()) return 1.0;
  const double d = std::hypot(x - center_x, y - center_y);
  if (d <= rings.front().radius) return rings.front().multiplier;
  for (std::size_t i = 1; i < rings.size(); ++i) {
    if (d <= rings[i].radius) {
      const auto& a = rings[i - 1];
      const auto& b = rings[i];
      if (d == b.radius) return b.multiplier;
      const double t = (d - a.radius) / (b.radius - a.radius);
      return a.multiplier + (b.multiplier - a.multiplier) * t;
    }
  }
  return rings.back().multiplier;
}

double foveated_size(double s, double screen_x, double screen_y, const FoveaZones& zones) {
  zones.validate();
  return s * zones.multiplier_at(screen_x, screen_y);
}

const char* to_string(RenderAction::Kind kind) {
  switch (kind) {
    case RenderAction::Kind::Skip: return "skip";
    case RenderAction::Kind::Geometry: return "geometry";
    case RenderAction::Kind::SurfelPrefix: return "surfels";
    case RenderAction::Kind::BlendParentChild: return "blend";
  }
  return "?";
}

double blend_alpha(double r_min, double r, double beta) {
  if (!(beta > 0)) throw Error("blend width must be > 0");
  return std::clamp((r_min / r - 1) / beta, 0.0, 1.0);
}

bool box_in_frustum(const CameraModel& camera, const Box3& b) {
  if (b.empty()) return false;
  const ViewProjection v = camera.view();
  std::array<Vec3d, 8> c;
  for (int i = 0; i < 8; ++i) {
    const Vec3d d = b.corner(i) - v.eye;
    c[i] = {dot(d, v.right), dot(d, v.up), dot(d, v.forward)};
  }
  // Each plane as a function that is > 0 outside.
  const double hx = 0.5 * v.width, hy = 0.5 * v.height;
  auto all_outside = [&](auto&& outside) {
    for (const auto& p : c)
      if (!outside(p)) return false;
    return true;
  };
  if (all_outside([&](const Vec3d& p) { return p.z < camera.near_plane; })) return false;
  if (v.kind == ViewProjection::Kind::Perspective) {
    const double tx = hx / v.focal, ty = hy / v.focal;
    if (all_outside([&](const Vec3d& p) { return p.x > tx * p.z; })) return false;
    if (all_outside([&](const Vec3d& p) { return -p.x > tx * p.z; })) return false;
    if (all_outside([&](const Vec3d& p) { return p.y > ty * p.z; })) return false;
    if (all_outside([&](const Vec3d& p) { return -p.y > ty * p.z; })) return false;
  } else {
    const double ex = hx * v.pixel_size, ey = hy * v.pixel_size;
    if (all_outside([&](const Vec3d& p) { return p.x > ex; })) return false;
    if (all_outside([&](const Vec3d& p) { return -p.x > ex; })) return false;
    if (all_outside([&](const Vec3d& p) { return p.y > ey; })) return false;
    if (all_outside([&](const Vec3d& p) { return -p.y > ey; })) return false;
  }
  return true;
}

namespace {

std::uint64_t weighted(std::uint64_t count, double weight) {
  if (weight >= 1.0) return count;
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(count) * weight + 0.5));
}

struct Selector {
  const Scene& scene;
  const CameraModel& camera;
  const SelectionParams& params;
  ViewProjection view;
  std::vector<RenderAction> out;

  double size_for(const SceneNode& n) const {
    if (!params.zones) return params.surfel_size;
    const auto p = view.project(n.bounds.center());
    // Objects around or behind the eye get the innermost setting.
    if (!(p.depth > 0)) return params.surfel_size * (params.zones->rings.empty() ? 1.0 : params.zones->rings.front().multiplier);
    return foveated_size(params.surfel_size, p.x, p.y, *params.zones);
  }

  void descend(const SceneNode& n, double weight) {
    if (n.is_leaf()) {
      out.push_back({n.id, RenderAction::Kind::Geometry, 0, 0, 0, 0});
      return;
    }
    for (NodeId c : n.children) visit(c, weight);
  }

  void visit(NodeId id, double weight) {
    const SceneNode& n = scene.node(id);
    if (!box_in_frustum(camera, n.bounds)) {
      out.push_back({id, RenderAction::Kind::Skip, 0, 0, 0, 0});
      return;
    }
    const bool has_lod = params.use_lods && n.lod && n.lod->has_valid_r_m();
    if (!has_lod) {
      descend(n, weight);
      return;
    }
    const PrefixModel model = PrefixModel::of(*n.lod);
    const double s = size_for(n);
    const double d_p = projected_pixel_distance(camera, n);
    double alpha = 1.0, r = 0.0;
    if (d_p > 0) {
      r = radius_for_screen(s, d_p, params.rule);
      const PrefixChoice choice = prefix_for_radius(model, r);
      if (!choice.saturated) {
        out.push_back({id, RenderAction::Kind::SurfelPrefix, weighted(choice.count, weight), s, r, 0});
        return;
      }
      alpha = blend_alpha(model.r_min(), r, params.blend_width);
    }
    // Saturated: the whole cloud at its covering radius fades out while the
    // children fade in.
    const double r_min = model.r_min();
    const double parent_size = r > 0 ? s * r_min / r : s;
    out.push_back({id, RenderAction::Kind::BlendParentChild, weighted(model.total, weight * (1 - alpha)), parent_size,
                   r_min, alpha});
    descend(n, weight * alpha);
  }
};

}  // namespace

std::vector<RenderAction> select_render_actions(const Scene& scene, const CameraModel& camera,
                                                const SelectionParams& params) {
  if (!(params.surfel_size >= 1)) throw Error("surfel size must be >= 1 px");
  if (params.zones) params.zones->validate();
  Selector sel{scene, camera, params, camera.view(), {}};
  if (!scene.empty() && scene.root() != kNoNode) sel.visit(scene.root(), 1.0);
  return std::move(sel.out);
}

std::string export_test_vectors() {
  using json = nlohmann::ordered_json;
  json doc;
  doc["version"] = 1;
  doc["tolerance"] = 1e-6;
  std::mt19937_64 rng(20241019);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  json radius = json::array();
  const double fixed[][2] = {{2, 1}, {4, 0.5}, {1, 2}, {1, 1}, {8, 0.01}};
  for (auto [s, d] : fixed)
    for (auto rule : {RadiusRule::Consistent, RadiusRule::AsPrinted})
      radius.push_back({{"s", s}, {"d_p", d}, {"rule", rule == RadiusRule::Consistent ? "consistent" : "as_printed"},
                        {"r", radius_for_screen(s, d, rule)}});
  for (int i = 0; i < 20; ++i) {
    const double s = 1 + 7 * unit(rng), d = std::pow(10.0, -3 + 4 * unit(rng));
    for (auto rule : {RadiusRule::Consistent, RadiusRule::AsPrinted})
      radius.push_back({{"s", s}, {"d_p", d}, {"rule", rule == RadiusRule::Consistent ? "consistent" : "as_printed"},
                        {"r", radius_for_screen(s, d, rule)}});
  }
  doc["radius"] = radius;

  json prefix = json::array();
  auto add_prefix = [&](PrefixModel m, double r) {
    const auto c = prefix_for_radius(m, r);
    prefix.push_back({{"p_m", m.p_m}, {"r_m", m.r_m}, {"total", m.total}, {"r", r}, {"count", c.count},
                      {"saturated", c.saturated}});
  };
  add_prefix({1000, 0.1, 100000}, 0.1);
  add_prefix({1000, 0.1, 100000}, 0.05);
  add_prefix({1000, 0.1, 100000}, 0.2);
  add_prefix({1000, 0.1, 2000}, 0.01);
  add_prefix({1000, 0.1, 100000}, 1e6);
  for (int i = 0; i < 30; ++i) {
    const PrefixModel m{static_cast<std::uint32_t>(2 + rng() % 5000), std::pow(10.0, -3 + 3 * unit(rng)),
                        1 + rng() % 300000};
    add_prefix(m, m.r_m * std::pow(2.0, -4 + 8 * unit(rng)));
  }
  doc["prefix"] = prefix;

  json budget = json::array();
  auto add_budget = [&](double target, double initial, const std::vector<double>& frames) {
    BudgetController ctrl(target, initial);
    std::vector<double> sizes;
    for (double t : frames) sizes.push_back(ctrl.update(t));
    budget.push_back({{"t_target", target}, {"initial", initial}, {"frames", frames}, {"sizes", sizes}});
  };
  add_budget(11.1, 4, {11.1});
  add_budget(10, 4, {20});
  add_budget(10, 7.8, {15});
  add_budget(10, 1, {5, 5, 5});
  for (int i = 0; i < 10; ++i) {
    std::vector<double> frames;
    for (int k = 0; k < 12; ++k) frames.push_back(2 + 30 * unit(rng));
    add_budget(11.1, 1 + 7 * unit(rng), frames);
  }
  doc["budget"] = budget;

  json fovea = json::array();
  auto add_fovea = [&](const FoveaZones& z, double s, double x, double y) {
    json rings = json::array();
    for (const auto& r : z.rings) rings.push_back({{"radius", r.radius}, {"multiplier", r.multiplier}});
    fovea.push_back({{"center", {z.center_x, z.center_y}}, {"rings", rings}, {"s", s}, {"x", x}, {"y", y},
                     {"result", foveated_size(s, x, y, z)}});
  };
  const FoveaZones two{500, 400, {{100, 1}, {300, 2}}};
  add_fovea(two, 2, 500, 400);
  add_fovea(two, 2, 600, 400);
  add_fovea(two, 2, 700, 400);
  add_fovea(two, 2, 800, 400);
  add_fovea(two, 2, 1000, 400);
  const FoveaZones three{256, 256, {{50, 1}, {150, 1.5}, {250, 3}}};
  for (int i = 0; i < 20; ++i) add_fovea(three, 1 + 3 * unit(rng), 512 * unit(rng), 512 * unit(rng));
  doc["foveation"] = fovea;

  return doc.dump(1) + "\n";
}

}  // namespace pbs
