#pragma once

// Independent reference implementations used as test oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "uavtrack/geometry.hpp"
#include "uavtrack/qnet.hpp"
#include "uavtrack/rng.hpp"

namespace oracle {

using uavtrack::geometry::Cylinder;
using uavtrack::geometry::Point3;

inline Point3 lerp(const Point3& a, const Point3& b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
}

inline bool point_in_cylinder(const Point3& p, const Cylinder& c) {
  const double dx = p.x - c.center.x;
  const double dy = p.y - c.center.y;
  return dx * dx + dy * dy <= c.radius * c.radius && p.z >= 0.0 && p.z <= c.height;
}

/// Dense point sampling along the closed segment, endpoints included.
inline bool sampled_intersect(const Point3& a, const Point3& b, const Cylinder& c,
                              int samples = 10'000) {
  for (int i = 0; i < samples; ++i) {
    if (point_in_cylinder(lerp(a, b, static_cast<double>(i) / (samples - 1)), c)) return true;
  }
  return false;
}

/// Signed distance to the solid cylinder surface; negative inside.
inline double signed_distance(const Point3& p, const Cylinder& c) {
  const double radial = std::hypot(p.x - c.center.x, p.y - c.center.y) - c.radius;
  const double vertical = std::abs(p.z - 0.5 * c.height) - 0.5 * c.height;
  const double outside = std::hypot(std::max(radial, 0.0), std::max(vertical, 0.0));
  return std::min(std::max(radial, vertical), 0.0) + outside;
}

/// Minimum signed distance along the segment. The signed distance of a convex
/// solid is convex, so its restriction to a line is unimodal.
inline double min_signed_distance(const Point3& a, const Point3& b, const Cylinder& c) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (signed_distance(lerp(a, b, m1), c) < signed_distance(lerp(a, b, m2), c)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::min({signed_distance(a, c), signed_distance(b, c),
                   signed_distance(lerp(a, b, 0.5 * (lo + hi)), c)});
}

struct SegmentCase {
  Point3 a;
  Point3 b;
  Cylinder cylinder;
};

/// Arena-scale segment and cylinder; half the segments end on the ground like a sight line.
inline SegmentCase random_segment_case(uavtrack::Rng& rng) {
  using uavtrack::uniform;
  SegmentCase c;
  c.cylinder.center = {uniform(rng, 30.0, 70.0), uniform(rng, 30.0, 70.0)};
  c.cylinder.radius = uniform(rng, 2.5, 10.0);
  c.cylinder.height = uniform(rng, 1.0, 50.0);
  c.a = {uniform(rng, 0.0, 100.0), uniform(rng, 0.0, 100.0), uniform(rng, 0.0, 60.0)};
  c.b = {uniform(rng, 0.0, 100.0), uniform(rng, 0.0, 100.0), uniform(rng, 0.0, 60.0)};
  if (uniform(rng, 0.0, 1.0) < 0.5) c.b.z = 0.0;
  return c;
}

/// Straight-line re-evaluation of a dense network: explicit loops, no Eigen products.
inline std::vector<double> forward_loops(const uavtrack::qnet::QNetwork& net,
                                         const std::vector<double>& input) {
  std::vector<double> x = input;
  const auto& layers = net.dense_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& W = layers[l].weights;
    const auto& b = layers[l].bias;
    std::vector<double> y(static_cast<std::size_t>(W.rows()));
    for (int i = 0; i < W.rows(); ++i) {
      long double acc = b(i);
      for (int j = 0; j < W.cols(); ++j) acc += static_cast<long double>(W(i, j)) * x[j];
      double v = static_cast<double>(acc);
      if (l + 1 < layers.size() && v < 0.0) v = 0.0;
      y[i] = v;
    }
    x = std::move(y);
  }
  return x;
}

/// Central finite differences of f over every parameter of net.
inline std::vector<double> numeric_gradient(uavtrack::qnet::QNetwork net,
                                            const std::function<double(const uavtrack::qnet::QNetwork&)>& f,
                                            double step = 1e-5) {
  std::vector<double> theta = net.flatten();
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + step;
    net.assign(theta);
    const double up = f(net);
    theta[i] = keep - step;
    net.assign(theta);
    const double down = f(net);
    theta[i] = keep;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor). The floor keeps round-off in
/// near-zero entries from dominating.
inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

}  // namespace oracle
