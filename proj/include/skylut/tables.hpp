#pragma once

// Table layout, texel parameterization and the sampler shared by the
// builder, the renderer and the validation scans.
//
// Fractional indices run from 0 to size-1, texel i sits exactly at
// x = i / (size - 1). With H = sqrt(Rt^2 - Rg^2) and rho = sqrt(r^2 - Rg^2):
//
//   transmittance (w = mu, h = r), top-exit rays only:
//     x_r  = rho / H
//     x_mu = (d - d_min) / (d_max - d_min), d = distance to the top,
//            d_min = Rt - r, d_max = rho + H
//   irradiance (w = mu_s, h = r):
//     x_mu_s = (mu_s + 1) / 2,  x_r = (r - Rg) / (Rt - Rg)
//   inscatter, stored [r][mu][nu][mu_s]:
//     x_r = rho / H
//     mu, lower half (rays hitting the ground), d = distance to the ground,
//       d_min = r - Rg, d_max = rho: index = (MU/2 - 1)(1 - x)
//       (nadir at MU/2 - 1, horizon at 0)
//     mu, upper half, d = distance to the top: index = MU/2 + x (MU/2 - 1)
//       (zenith at MU/2, horizon at MU - 1)
//     x_mu_s = max((1 - exp(-3 mu_s - 0.6)) / (1 - exp(-3.6)), 0)
//     x_nu = (nu + 1) / 2
//
// Interpolation is linear per axis and never crosses the horizon split.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "skylut/atmosphere.hpp"
#include "skylut/optics.hpp"
#include "skylut/spectral.hpp"

namespace skylut {

struct TableDims {
  int transmittance_w = 256;  // mu
  int transmittance_h = 64;   // r
  int irradiance_w = 64;      // mu_s
  int irradiance_h = 32;      // r
  int r = 32;
  int mu = 128;
  int mu_s = 32;
  int nu = 8;

  std::size_t transmittance_texels() const {
    return static_cast<std::size_t>(transmittance_w) * transmittance_h;
  }
  std::size_t irradiance_texels() const {
    return static_cast<std::size_t>(irradiance_w) * irradiance_h;
  }
  std::size_t inscatter_texels() const {
    return static_cast<std::size_t>(r) * mu * mu_s * nu;
  }
  void validate() const;
  bool operator==(const TableDims&) const = default;
};

// Grids hold 3 floats per texel in (680, 550, 440) order.
struct ScatteringTables {
  TableDims dims;
  std::uint64_t model_hash = 0;
  std::vector<float> transmittance;  // [r][mu]
  std::vector<float> irradiance;     // [r][mu_s], indirect only
  // Rayleigh single scattering without its phase function, plus every
  // higher order divided by the Rayleigh phase at the texel's nu. Stored
  // per metre of the texel's boundary distance (see boundary_distance), so
  // rows near the top and the ground interpolate a smooth quantity.
  std::vector<float> inscatter;      // [r][mu][nu][mu_s]

  std::size_t inscatter_index(int ir, int imu, int inu, int imu_s) const {
    return ((static_cast<std::size_t>(ir) * dims.mu + imu) * dims.nu + inu) * dims.mu_s + imu_s;
  }
};

struct LutCoords {
  double r;
  double mu;
  double mu_s;
  double nu;
};

struct TexelCoords {
  double r;
  double mu;
  double mu_s;
  double nu;
};

TexelCoords map_inscatter(const LutCoords& c, const TableDims& dims, const ShellGeometry& geom);
LutCoords unmap_inscatter(const TexelCoords& t, const TableDims& dims, const ShellGeometry& geom);

struct Texel2 {
  double x;  // width axis
  double y;  // height axis (r)
};
Texel2 map_transmittance(double r, double mu, const TableDims& dims, const ShellGeometry& geom);
void unmap_transmittance(const Texel2& t, const TableDims& dims, const ShellGeometry& geom,
                         double* r, double* mu);
Texel2 map_irradiance(double r, double mu_s, const TableDims& dims, const ShellGeometry& geom);
void unmap_irradiance(const Texel2& t, const TableDims& dims, const ShellGeometry& geom,
                      double* r, double* mu_s);

// Distance from (r, mu) to the ground if the ray hits it, else to the top.
// r is clamped into the shell first, as the texel mapping does.
double boundary_distance(double r, double mu, const ShellGeometry& geom);
// Path integrals shorter than this are stored as integral over this length.
inline constexpr double kMinStoredPathM = 1.0;

// Interpolated reads of a bare grid laid out like ScatteringTables.
// interpolate_ returns the texel values as stored; sample_ turns a per-metre
// in-scatter grid back into radiance.
SpectralTriple interpolate_inscatter_grid(const std::vector<float>& grid, const TableDims& dims,
                                          const ShellGeometry& geom, double r, double mu,
                                          double mu_s, double nu);
SpectralTriple sample_inscatter_grid(const std::vector<float>& grid, const TableDims& dims,
                                     const ShellGeometry& geom, double r, double mu,
                                     double mu_s, double nu);
SpectralTriple sample_irradiance_grid(const std::vector<float>& grid, const TableDims& dims,
                                      const ShellGeometry& geom, double r, double mu_s);

// Physical nu range for given mu, mu_s.
void nu_bounds(double mu, double mu_s, double* lo, double* hi);

double mu_s_to_unit(double mu_s);
double unit_to_mu_s(double u);

// Table transmittances below this count as this (float underflow guard).
inline constexpr double kMinTransmittance = 1e-30;

// Composite Simpson rule for in-scatter path integrals. Sample counts are
// rounded up to odd; weights include the 1/3 factor, multiply by the step.
inline int simpson_samples(int n) { return std::max(n, 3) | 1; }
inline double simpson_weight(int i, int n) {
  if (i == 0 || i == n - 1) return 1.0 / 3.0;
  return (i % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
}

struct PathNode {
  double t;
  double weight;  // includes the step
};

// Simpson nodes on [0, len] for a ray leaving radius r along mu. The path is
// split at its lowest point and t = t_low +- L u^2 crowds the nodes there,
// since near-horizontal rays cross the thin Mie layer in a few km of a
// several hundred km path.
inline std::vector<PathNode> path_nodes(double r, double mu, double len, int n) {
  std::vector<PathNode> out;
  if (!(len > 0.0)) return out;
  const double t_low = std::clamp(-r * mu, 0.0, len);
  const bool both = t_low > 0.0 && t_low < len;
  const int m = simpson_samples(both ? (n + 1) / 2 : n);
  const auto piece = [&](double span, double sign) {
    if (!(span > 0.0)) return;
    const double du = 1.0 / (m - 1);
    for (int i = 1; i < m; ++i) {
      const double u = i * du;
      out.push_back({t_low + sign * span * u * u, simpson_weight(i, m) * du * 2.0 * span * u});
    }
  };
  piece(t_low, -1.0);
  piece(len - t_low, 1.0);
  return out;
}

// Cosine of the horizon direction from radius r.
inline double horizon_mu(double r, double rg) {
  const double s = rg / r;
  return -std::sqrt(std::max(1.0 - s * s, 0.0));
}

// Read-only access to tables for one model. Radii within the ground
// tolerance snap to Rg, where a curved-path model stores stretched optical
// depth in the transmittance row.
class TableSampler {
 public:
  TableSampler(const ScatteringTables& tables, const AtmosphereModel& model);

  const ScatteringTables& tables() const { return tables_; }
  const AtmosphereModel& model() const { return model_; }
  const ShellGeometry& geometry() const { return model_.geometry; }

  double snap_radius(double r) const;

  // T from r along mu to the top; zero for rays that hit the ground.
  SpectralTriple transmittance_to_top(double r, double mu) const;
  // Direct sun transmittance incl. planet occlusion.
  SpectralTriple sun_transmittance(double r, double mu_s) const { return transmittance_to_top(r, mu_s); }
  // T over the segment from (r, mu) of length d.
  SpectralTriple segment_transmittance(double r, double mu, double d, bool hits_ground) const;

  // Raw grid value (see ScatteringTables::inscatter).
  SpectralTriple inscatter_raw(double r, double mu, double mu_s, double nu) const;
  SpectralTriple irradiance(double r, double mu_s) const;

  // Single Mie in-scatter along the segment without phase, times L_sun.
  SpectralTriple mie_single_unphased(double r, double mu, double mu_s, double nu, double d,
                                     bool hits_ground, int samples) const;

  // In-scattered radiance along (r, mu) up to distance d with the phase
  // functions applied. `d < 0` integrates to the ground or the top.
  SpectralTriple inscatter(double r, double mu, double mu_s, double nu, double d,
                           int mie_samples) const;

 private:
  SpectralTriple lookup_transmittance(double r, double mu) const;
  SpectralTriple lookup_optical_depth(double r, double mu) const;
  const ScatteringTables& tables_;
  const AtmosphereModel& model_;
  Medium medium_;
};

}  // namespace skylut
