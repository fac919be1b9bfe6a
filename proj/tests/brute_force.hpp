#pragma once
// Table-free reference for two scattering orders. The inner single-scatter
// integrals come from validation's brute-force oracle; the gathering sphere
// and the ground bounce are integrated here directly.
#include <algorithm>
#include <cmath>
#include <vector>

#include "skylut/atmosphere.hpp"
#include "oracles.hpp"
#include "skylut/validation.hpp"

namespace oracle {

struct DoubleScatterOptions {
  int path_samples = 24;
  int sphere_zenith = 24;
  int sphere_azimuth = 24;
  int inner_path_samples = 48;
  int inner_sun_samples = 48;
};

// Direct sun on the ground at unit normal `n`, through a straight path.
inline skylut::SpectralTriple direct_ground_irradiance(const skylut::AtmosphereModel& m,
                                                       const skylut::Vec3& g,
                                                       const skylut::Vec3& sun, int samples) {
  using namespace skylut;
  const Vec3 n = g.normalized();
  const double cos_s = n.dot(sun);
  if (cos_s <= 0.0) return {};
  const Medium medium(m);
  const double len = distance_to_sphere_exit(g.norm(), cos_s, m.geometry.atmosphere_radius_m);
  const Vec3 top = g + len * sun;
  const SpectralTriple tau = optical_depth_of(
      m.geometry, g, top, [&](double h) { return medium.extinction(h); }, samples);
  return m.sun_irradiance * transmittance(tau) * cos_s;
}

// Second-order radiance arriving at `x` along `-view`: light scattered once,
// or reflected once by the ground, before the final scattering event.
inline skylut::SpectralTriple double_scatter(const skylut::AtmosphereModel& m,
                                             const skylut::Vec3& x, const skylut::Vec3& view,
                                             const skylut::Vec3& sun,
                                             const DoubleScatterOptions& o = {}) {
  using namespace skylut;
  const ShellGeometry& g = m.geometry;
  const Medium medium(m);
  const Vec3 v = view.normalized();
  const double r0 = x.norm();
  const double mu0 = x.dot(v) / r0;
  double t_end = distance_to_sphere_exit(r0, mu0, g.atmosphere_radius_m);
  if (ray_hits_ground(r0, mu0, g.planet_radius_m)) t_end = distance_to_ground(r0, mu0, g.planet_radius_m);
  if (!(t_end > 0.0)) return {};

  BruteForceOptions inner;
  inner.path_samples = o.inner_path_samples;
  inner.sun_samples = o.inner_sun_samples;

  // Orthonormal frame for the gathering sphere at each point.
  const auto frame = [](const Vec3& z, Vec3* a, Vec3* b) {
    const Vec3 h = std::fabs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    *a = z.cross(h).normalized();
    *b = z.cross(*a);
  };

  // Outer nodes crowd quadratically toward the lowest point of the path,
  // where the density peaks (the Mie layer is thin next to the step size).
  struct Node {
    double t, w;
  };
  std::vector<Node> nodes;
  const double t_low = std::clamp(-r0 * mu0, 0.0, t_end);
  const auto piece = [&](double len, double sign, int count) {
    if (len <= 0.0 || count <= 0) return;
    for (int i = 0; i < count; ++i) {
      const double u = (i + 0.5) / count;
      nodes.push_back({t_low + sign * len * u * u, 2.0 * len * u / count});
    }
  };
  const bool both = t_low > 0.0 && t_low < t_end;
  const int n = o.path_samples;
  piece(t_low, -1.0, both ? n / 2 : n);
  piece(t_end - t_low, 1.0, both ? n - n / 2 : n);

  SpectralTriple total{};
  LD acc[3] = {0, 0, 0};
  for (const Node& node : nodes) {
    const Vec3 p = x + node.t * v;
    const double alt = std::max(p.norm() - g.planet_radius_m, 0.0) / 1000.0;
    const MediumSample ms = medium.at(alt);
    const SpectralTriple tau_here = optical_depth_of(
        g, x, p, [&](double h) { return medium.extinction(h); }, 4 * o.inner_path_samples);
    const Vec3 up = p.normalized();
    Vec3 e1, e2;
    frame(up, &e1, &e2);
    LD gathered[3] = {0, 0, 0};
    const LD d_theta = kPiL / o.sphere_zenith;
    const LD d_phi = 2 * kPiL / o.sphere_azimuth;
    for (int a = 0; a < o.sphere_zenith; ++a) {
      const double th = static_cast<double>((a + 0.5L) * d_theta);
      for (int b = 0; b < o.sphere_azimuth; ++b) {
        const double ph = static_cast<double>((b + 0.5L) * d_phi);
        const Vec3 w = (std::sin(th) * (std::cos(ph) * e1 + std::sin(ph) * e2) + std::cos(th) * up)
                           .normalized();
        SpectralTriple lin = brute_force_single_scatter(m, p, w, sun, inner);
        const double rp = p.norm();
        const double mu_w = p.dot(w) / rp;
        if (ray_hits_ground(rp, mu_w, g.planet_radius_m)) {
          const double dg = distance_to_ground(rp, mu_w, g.planet_radius_m);
          const Vec3 gp = p + dg * w;
          const Vec3 gp_on = gp.normalized() * g.planet_radius_m;
          const SpectralTriple tau = optical_depth_of(
              g, p, gp_on, [&](double h) { return medium.extinction(h); }, o.inner_path_samples);
          lin += transmittance(tau) * m.ground_albedo / kPi *
                 direct_ground_irradiance(m, gp_on, sun, o.inner_sun_samples);
        }
        const double c = std::clamp(v.dot(w), -1.0, 1.0);
        const double pr = rayleigh_phase(c, m.rayleigh_phase);
        const SpectralTriple pm = mie_phase(m.mie, c);
        const LD dw = std::sin(static_cast<LD>(th)) * d_theta * d_phi;
        for (std::size_t k = 0; k < 3; ++k) {
          gathered[k] += dw * (ms.rayleigh_scattering[k] * pr + ms.mie_scattering[k] * pm[k]) * lin[k];
        }
      }
    }
    const SpectralTriple tv = transmittance(tau_here);
    for (std::size_t k = 0; k < 3; ++k) acc[k] += gathered[k] * tv[k] * node.w;
  }
  for (std::size_t k = 0; k < 3; ++k) total[k] = static_cast<double>(acc[k]);
  return total;
}

}  // namespace oracle
