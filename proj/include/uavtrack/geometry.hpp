#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace uavtrack::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point2 ground() const { return {x, y}; }

  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Solid vertical cylinder standing on the ground plane (z in [0, height]).
struct Cylinder {
  Point2 center;
  double radius = 1.0;
  double height = 1.0;

  friend bool operator==(const Cylinder&, const Cylinder&) = default;
};

/// Camera half-angle measured from the nadir, configured in degrees.
class FovSpec {
 public:
  explicit FovSpec(double theta_deg);

  double degrees() const { return theta_deg_; }
  double tangent() const { return tan_theta_; }

 private:
  double theta_deg_;
  double tan_theta_;
};

/// Which occlusion predicate the reward and visibility checks use.
enum class OcclusionModel {
  exact,       // closed 3D segment against the solid finite cylinder
  paper_form,  // literal closed-form line test, kept for comparison
};

double ground_distance(const Point2& a, const Point2& b);

/// Side of the square ground footprint seen from altitude z.
double fov_diameter(double z, const FovSpec& fov);

bool check_collision(const Point3& uav, const Cylinder& obs);

/// Exact test of the closed segment [a, b] against the solid cylinder.
/// Symmetric in (a, b) bit-for-bit: the endpoints are put in canonical order first.
bool segment_cylinder_intersect(const Point3& a, const Point3& b, const Cylinder& obs);

/// Sight line from the UAV down to the target on the ground.
bool check_occlusion(const Point3& uav, const Point2& target, const Cylinder& obs,
                     OcclusionModel model = OcclusionModel::exact);

/// Literal closed-form line/cylinder condition. Non-finite intermediate values
/// (target directly below the UAV on x) evaluate to false.
bool check_occlusion_paper_form(const Point3& uav, const Point2& target, const Cylinder& obs);

/// Target inside the square footprint centred on the UAV's ground projection.
bool check_visibility(const Point3& uav, const Point2& target, const FovSpec& fov);

struct VisibilityReport {
  bool visible = false;
  bool in_fov = false;
  std::optional<std::size_t> occluded_by;
};

VisibilityReport target_visible(const Point3& uav, const Point2& target,
                                std::span<const Cylinder> obstacles, const FovSpec& fov,
                                OcclusionModel model = OcclusionModel::exact);

}  // namespace uavtrack::geometry
