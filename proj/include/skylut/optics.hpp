#pragma once

// Ray / shell geometry, optical depth along straight segments, and the
// Pickering air-mass path stretch. Positions are planet-centred, in metres.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <optional>

#include "skylut/errors.hpp"
#include "skylut/spectral.hpp"

namespace skylut {

using Vec3 = Eigen::Vector3d;

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  // Normalizes `direction`; throws DomainError for a zero vector.
  static Ray make(const Vec3& origin, const Vec3& direction);
};

struct ShellGeometry {
  double planet_radius_m = 6360e3;
  double atmosphere_radius_m = 6420e3;

  double thickness_m() const { return atmosphere_radius_m - planet_radius_m; }
  // Distance from the ground to the top boundary along a horizontal ray.
  double horizon_span_m() const {
    return std::sqrt(atmosphere_radius_m * atmosphere_radius_m -
                     planet_radius_m * planet_radius_m);
  }
  void validate() const;
};

// Points numerically inside the shell within this much are accepted.
inline constexpr double kGroundToleranceM = 1.0;

struct Hit {
  double t_near;
  double t_far;
};

// Intersections of the ray line with the origin-centred sphere. With
// `cull_negative`, roots behind the origin are dropped: an origin inside
// the sphere returns t_near = 0.
std::optional<Hit> ray_sphere_intersect(const Ray& ray, double radius, bool cull_negative = false);

// Distance from radius r along direction cosine mu to the sphere of radius
// `radius` (the far root). Valid when r <= radius.
inline double distance_to_sphere_exit(double r, double mu, double radius) {
  const double disc = r * r * (mu * mu - 1.0) + radius * radius;
  return std::max(-r * mu + std::sqrt(std::max(disc, 0.0)), 0.0);
}

// Distance from r along mu to the ground (near root). Only meaningful when
// ray_hits_ground(r, mu, rg).
inline double distance_to_ground(double r, double mu, double rg) {
  const double disc = r * r * (mu * mu - 1.0) + rg * rg;
  return std::max(-r * mu - std::sqrt(std::max(disc, 0.0)), 0.0);
}

inline bool ray_hits_ground(double r, double mu, double rg) {
  return mu < 0.0 && r * r * (mu * mu - 1.0) + rg * rg >= 0.0;
}

// Trapezoidal integral of `extinction(altitude_km)` along a -> b.
template <typename F>
SpectralTriple optical_depth_of(const ShellGeometry& geom, const Vec3& a, const Vec3& b,
                                F&& extinction, int samples) {
  if (samples < 2) throw DomainError("optical_depth: need at least 2 samples");
  const double rg = geom.planet_radius_m;
  const double rt = geom.atmosphere_radius_m;
  const double ra = a.norm();
  const double rb = b.norm();
  if (ra < rg - kGroundToleranceM || rb < rg - kGroundToleranceM ||
      ra > rt + kGroundToleranceM || rb > rt + kGroundToleranceM) {
    throw DomainError("optical_depth: segment end point outside the atmosphere shell");
  }
  const Vec3 d = b - a;
  const double len = d.norm();
  if (len == 0.0) return {};
  // Closest approach to the centre along the segment.
  const double t_min = std::clamp(-a.dot(d) / (len * len), 0.0, 1.0);
  if ((a + t_min * d).norm() < rg - kGroundToleranceM) {
    throw DomainError("optical_depth: segment passes below the planet surface");
  }
  const double dx = len / (samples - 1);
  SpectralTriple sum{};
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    const double alt_km = std::max((a + t * d).norm() - rg, 0.0) / 1000.0;
    const double w = (i == 0 || i == samples - 1) ? 0.5 : 1.0;
    sum += extinction(alt_km) * w;
  }
  return sum * dx;
}

SpectralTriple transmittance(const SpectralTriple& depth);

// Pickering (2002) air mass for a ground observer; zenith angle in degrees.
double pickering_air_mass(double zenith_deg);

// Stretched slant length AM(theta) * (Rt - Rg), metres.
double curved_path_length(const ShellGeometry& geom, double zenith_deg);

// Ratio of the curved length to the straight ground-to-top distance.
double curved_path_stretch(const ShellGeometry& geom, double zenith_deg);

}  // namespace skylut
