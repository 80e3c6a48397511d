#include "uavtrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace uavtrack::geometry {

namespace {

// Closed interval [lo, hi]; empty when lo > hi.
struct Interval {
  double lo;
  double hi;

  bool empty() const { return lo > hi; }
};

Interval intersect(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

constexpr Interval kEmpty{1.0, 0.0};

bool lexicographically_less(const Point3& a, const Point3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

}  // namespace

FovSpec::FovSpec(double theta_deg) : theta_deg_(theta_deg) {
  if (!(theta_deg > 0.0 && theta_deg < 90.0)) {
    throw std::invalid_argument("FOV angle must lie in (0, 90) degrees, got " +
                                std::to_string(theta_deg));
  }
  // Extended precision so that exact angles such as 45 degrees give exact tangents.
  tan_theta_ = static_cast<double>(
      std::tan(static_cast<long double>(theta_deg) * std::numbers::pi_v<long double> / 180.0L));
}

double ground_distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double fov_diameter(double z, const FovSpec& fov) {
  if (!(z >= 0.0)) {
    throw std::invalid_argument("fov_diameter: altitude must be non-negative");
  }
  return 2.0 * z * fov.tangent();
}

bool check_collision(const Point3& uav, const Cylinder& obs) {
  return ground_distance(uav.ground(), obs.center) <= obs.radius && uav.z <= obs.height;
}

bool segment_cylinder_intersect(const Point3& a_in, const Point3& b_in, const Cylinder& obs) {
  if (a_in == b_in) {
    throw std::invalid_argument("segment_cylinder_intersect: degenerate segment");
  }
  Point3 a = a_in;
  Point3 b = b_in;
  if (lexicographically_less(b, a)) std::swap(a, b);

  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double dz = b.z - a.z;
  const double ox = a.x - obs.center.x;
  const double oy = a.y - obs.center.y;

  Interval t_range{0.0, 1.0};

  // Lateral: |(o + t d)_xy|^2 <= r^2.
  const double qa = dx * dx + dy * dy;
  const double qb = 2.0 * (ox * dx + oy * dy);
  const double qc = ox * ox + oy * oy - obs.radius * obs.radius;
  if (qa == 0.0) {
    if (qc > 0.0) return false;
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return false;
    const double root = std::sqrt(disc);
    // Numerically stable pair of roots.
    const double q = -0.5 * (qb + std::copysign(root, qb));
    double t1 = q / qa;
    double t2 = q != 0.0 ? qc / q : t1;
    if (t1 > t2) std::swap(t1, t2);
    t_range = intersect(t_range, {t1, t2});
    if (t_range.empty()) return false;
  }

  // Vertical slab 0 <= z <= h.
  if (dz == 0.0) {
    if (a.z < 0.0 || a.z > obs.height) return false;
  } else {
    double t_floor = (0.0 - a.z) / dz;
    double t_top = (obs.height - a.z) / dz;
    if (t_floor > t_top) std::swap(t_floor, t_top);
    t_range = intersect(t_range, {t_floor, t_top});
  }
  return !t_range.empty();
}

bool check_occlusion(const Point3& uav, const Point2& target, const Cylinder& obs,
                     OcclusionModel model) {
  if (model == OcclusionModel::paper_form) return check_occlusion_paper_form(uav, target, obs);
  const Point3 ground_target{target.x, target.y, 0.0};
  if (uav == ground_target) {
    throw std::invalid_argument("check_occlusion: UAV coincides with the target");
  }
  return segment_cylinder_intersect(uav, ground_target, obs);
}

bool check_occlusion_paper_form(const Point3& uav, const Point2& target, const Cylinder& obs) {
  const double ddx = target.x - uav.x;
  const double ddy = target.y - uav.y;
  const double height_term = uav.z * (-obs.center.x + uav.x) / ddx + uav.z;
  const double lateral_term =
      (ddx * obs.center.y + ddy * obs.center.x) / std::sqrt(ddx * ddx + ddy * ddy);
  if (!std::isfinite(height_term) || !std::isfinite(lateral_term)) return false;
  return height_term <= obs.height && lateral_term <= obs.radius;
}

bool check_visibility(const Point3& uav, const Point2& target, const FovSpec& fov) {
  const double half = 0.5 * fov_diameter(uav.z, fov);
  return std::abs(target.x - uav.x) <= half && std::abs(target.y - uav.y) <= half;
}

VisibilityReport target_visible(const Point3& uav, const Point2& target,
                                std::span<const Cylinder> obstacles, const FovSpec& fov,
                                OcclusionModel model) {
  VisibilityReport report;
  report.in_fov = check_visibility(uav, target, fov);
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (check_occlusion(uav, target, obstacles[i], model)) {
      report.occluded_by = i;
      break;
    }
  }
  report.visible = report.in_fov && !report.occluded_by;
  return report;
}

}  // namespace uavtrack::geometry
