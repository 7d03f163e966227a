#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbs/scene.hpp"
#include "pbs/surfel.hpp"
#include "pbs/view.hpp"

namespace pbs {

/// Viewer camera. Orientation is given by a forward direction and an up hint.
struct CameraModel {
  enum class Projection { Perspective, Orthographic };

  Projection projection = Projection::Perspective;
  Vec3d position;
  Vec3d forward{0, 0, -1};
  Vec3d up{0, 1, 0};
  double fov_y = 1.0471975511965976;  // radians, perspective
  double ortho_pixel_size = 1.0;      // world units per pixel, orthographic
  int width = 1;
  int height = 1;
  double near_plane = 1e-3;

  void validate() const;
  ViewProjection view() const;
};

/// World distance of two horizontally adjacent center pixels, unprojected
/// onto the plane perpendicular to the view direction through the point of
/// `bounds_world` closest to the camera, expressed in the frame of
/// `local_to_world`. A camera inside the box (or a closest point behind the
/// eye) yields the plane through the eye.
double projected_pixel_distance(const CameraModel& camera, const Box3& bounds_world, const Mat4& local_to_world);
double projected_pixel_distance(const CameraModel& camera, const SceneNode& node);

enum class RadiusRule {
  Consistent,  // r = s * d_p / 2
  AsPrinted    // r = s / (2 * d_p)
};

/// Object-space surfel radius for a surfel size of `s` pixels.
/// Throws pbs::Error when d_p <= 0 or s < 1.
double radius_for_screen(double s, double d_p, RadiusRule rule = RadiusRule::Consistent);

struct PrefixModel {
  std::uint32_t p_m = kDefaultReferencePrefix;
  double r_m = 0;
  std::uint64_t total = 0;

  static PrefixModel of(const SurfelCloud& cloud) { return {cloud.p_m, cloud.r_m, cloud.size()}; }
  void validate() const;
  /// Radius at which the whole cloud is needed: r_m * sqrt(p_m / total).
  double r_min() const;
};

struct PrefixChoice {
  std::uint64_t count = 0;   // clamped to [1, total]
  double estimate = 0;       // p_m * (r_m / r)^2 before rounding
  bool saturated = false;    // rounded estimate exceeds total
};

/// p = round_half_up(p_m * (r_m / r)^2), clamped to [1, total].
/// Throws pbs::Error for r <= 0 or an invalid model.
PrefixChoice prefix_for_radius(const PrefixModel& model, double r);

/// Adaptive surfel size controller.
class BudgetController {
 public:
  static constexpr double kDeadbandLow = 0.9;
  static constexpr double kDeadbandHigh = 1.1;
  static constexpr double kSizeMin = 1.0;
  static constexpr double kSizeMax = 8.0;
  static constexpr std::size_t kWindow = 3;

  explicit BudgetController(double t_target_ms, double initial_size = kSizeMin);

  /// Feeds one frame time and returns the new size.
  double update(double t_frame_ms);

  double size() const { return size_; }
  double target() const { return target_; }
  /// Mean of the last three sizes.
  double window_mean() const;
  const std::array<double, kWindow>& window() const { return window_; }

 private:
  double target_;
  double size_;
  std::array<double, kWindow> window_;
};

/// One step of the controller formula for a given s_old (no window, no clamp).
double budget_formula(double s_old, double t_frame, double t_target);

struct FoveaRing {
  double radius = 0;      // pixels
  double multiplier = 1;  // >= 1
};

/// Concentric zones around `center` (pixels). Between two ring radii the
/// multiplier is interpolated linearly; inside the first ring the first
/// multiplier applies, outside the last ring the last.
struct FoveaZones {
  double center_x = 0, center_y = 0;
  std::vector<FoveaRing> rings;

  void validate() const;
  double multiplier_at(double x, double y) const;
};

double foveated_size(double s, double screen_x, double screen_y, const FoveaZones& zones);

struct RenderAction {
  enum class Kind { Skip, Geometry, SurfelPrefix, BlendParentChild };

  NodeId node = kNoNode;
  Kind kind = Kind::Skip;
  std::uint64_t prefix = 0;  // surfels drawn (SurfelPrefix, BlendParentChild)
  double surfel_size = 0;    // pixels
  double radius = 0;         // node-local disc radius
  double alpha = 0;          // BlendParentChild: weight given to the children
};

const char* to_string(RenderAction::Kind kind);

struct SelectionParams {
  double surfel_size = 1.0;
  RadiusRule rule = RadiusRule::Consistent;
  double blend_width = 0.3;  // beta
  bool use_lods = true;
  const FoveaZones* zones = nullptr;
};

/// Blend weight for a saturated node: clamp((r_min / r - 1) / beta, 0, 1).
double blend_alpha(double r_min, double r, double beta);

/// Depth-first selection of what to draw for every node. Each action
/// carries the node's weight: a node reached through a blend renders
/// round(weight * prefix) surfels.
std::vector<RenderAction> select_render_actions(const Scene& scene, const CameraModel& camera,
                                                const SelectionParams& params);

/// Whether the world box can intersect the camera frustum.
bool box_in_frustum(const CameraModel& camera, const Box3& bounds_world);

/// JSON document with input/output pairs for the radius, prefix, budget
/// and foveation operations, consumed by other implementations.
std::string export_test_vectors();

}  // namespace pbs
