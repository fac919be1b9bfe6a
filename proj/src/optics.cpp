#include "skylut/optics.hpp"

#include <algorithm>

namespace skylut {

Ray Ray::make(const Vec3& origin, const Vec3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("ray direction must be non-zero");
  return Ray{origin, direction / n};
}

void ShellGeometry::validate() const {
  if (!(planet_radius_m > 0.0)) throw DomainError("planet radius must be > 0");
  if (!(atmosphere_radius_m > planet_radius_m)) {
    throw DomainError("atmosphere radius must exceed planet radius");
  }
}

std::optional<Hit> ray_sphere_intersect(const Ray& ray, double radius, bool cull_negative) {
  if (!(radius > 0.0)) throw DomainError("ray_sphere_intersect: radius must be > 0");
  // Solve t^2 + 2 b t + c = 0 with b = o.d and c = |o|^2 - R^2. The
  // discriminant is formed from the perpendicular offset, which keeps
  // digits for rays grazing a planet-sized sphere.
  const Vec3& o = ray.origin;
  const Vec3& d = ray.direction;
  const double b = o.dot(d);
  const Vec3 perp = o - b * d;
  const double disc = (radius - perp.norm()) * (radius + perp.norm());
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  const double c = (o.norm() - radius) * (o.norm() + radius);
  // Stable pair of roots.
  double t0, t1;
  const double q = (b > 0.0) ? -(b + s) : -(b - s);
  if (q != 0.0) {
    t0 = q;
    t1 = c / q;
  } else {
    t0 = -b - s;
    t1 = -b + s;
  }
  if (t0 > t1) std::swap(t0, t1);
  if (cull_negative) {
    if (t1 < 0.0) return std::nullopt;
    t0 = std::max(t0, 0.0);
  }
  return Hit{t0, t1};
}

SpectralTriple transmittance(const SpectralTriple& depth) {
  if (depth.min_component() < 0.0) throw DomainError("transmittance: negative optical depth");
  return exp(depth * -1.0);
}

double pickering_air_mass(double zenith_deg) {
  if (!(zenith_deg >= 0.0 && zenith_deg <= 90.0)) {
    throw DomainError("pickering_air_mass: zenith angle outside [0, 90] degrees");
  }
  const double h = 90.0 - zenith_deg;
  const double arg_deg = h + 244.0 / (165.0 + 47.0 * std::pow(h, 1.1));
  return 1.0 / std::sin(arg_deg * M_PI / 180.0);
}

double curved_path_length(const ShellGeometry& geom, double zenith_deg) {
  return pickering_air_mass(zenith_deg) * geom.thickness_m();
}

double curved_path_stretch(const ShellGeometry& geom, double zenith_deg) {
  const double mu = std::cos(zenith_deg * M_PI / 180.0);
  const double straight =
      distance_to_sphere_exit(geom.planet_radius_m, mu, geom.atmosphere_radius_m);
  return curved_path_length(geom, zenith_deg) / straight;
}

}  // namespace skylut
