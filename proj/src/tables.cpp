#include "skylut/tables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skylut/errors.hpp"

namespace skylut {
namespace {

struct Lerp {
  int i0;
  double f;
};

// Split a fractional index on [lo, hi] into a base texel and weight.
Lerp split(double u, int lo, int hi) {
  if (hi <= lo) return {lo, 0.0};
  u = std::clamp(u, static_cast<double>(lo), static_cast<double>(hi));
  int i0 = std::min(static_cast<int>(std::floor(u)), hi - 1);
  return {i0, u - i0};
}

double safe_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }

SpectralTriple fetch(const std::vector<float>& g, std::size_t texel) {
  const float* p = g.data() + 3 * texel;
  return {p[0], p[1], p[2]};
}

}  // namespace

void TableDims::validate() const {
  const int all[] = {transmittance_w, transmittance_h, irradiance_w, irradiance_h, r, mu_s, nu};
  for (int v : all) {
    if (v < 2) throw DomainError("table dimensions must all be >= 2");
  }
  if (mu < 4 || mu % 2 != 0) throw DomainError("inscatter mu size must be even and >= 4");
}

double mu_s_to_unit(double mu_s) {
  return std::max((1.0 - std::exp(-3.0 * mu_s - 0.6)) / (1.0 - std::exp(-3.6)), 0.0);
}

double unit_to_mu_s(double u) {
  return -(std::log(1.0 - u * (1.0 - std::exp(-3.6))) + 0.6) / 3.0;
}

void nu_bounds(double mu, double mu_s, double* lo, double* hi) {
  const double s = safe_sqrt((1.0 - mu * mu) * (1.0 - mu_s * mu_s));
  *lo = std::max(mu * mu_s - s, -1.0);
  *hi = std::min(mu * mu_s + s, 1.0);
}

TexelCoords map_inscatter(const LutCoords& c, const TableDims& dims, const ShellGeometry& geom) {
  const double rg = geom.planet_radius_m;
  const double rt = geom.atmosphere_radius_m;
  const double r = std::clamp(c.r, rg, rt);
  const double mu = std::clamp(c.mu, -1.0, 1.0);
  const double big_h = geom.horizon_span_m();
  const double rho = safe_sqrt(r * r - rg * rg);
  TexelCoords t;
  t.r = rho / big_h * (dims.r - 1);
  const int half = dims.mu / 2;
  if (ray_hits_ground(r, mu, rg)) {
    const double d = distance_to_ground(r, mu, rg);
    const double d_min = r - rg;
    const double d_max = rho;
    const double x = (d_max == d_min) ? 0.0 : std::clamp((d - d_min) / (d_max - d_min), 0.0, 1.0);
    t.mu = (half - 1) * (1.0 - x);
  } else {
    const double d = distance_to_sphere_exit(r, mu, rt);
    const double d_min = rt - r;
    const double d_max = rho + big_h;
    const double x = std::clamp((d - d_min) / (d_max - d_min), 0.0, 1.0);
    t.mu = half + x * (half - 1);
  }
  t.mu_s = mu_s_to_unit(std::clamp(c.mu_s, -1.0, 1.0)) * (dims.mu_s - 1);
  t.nu = (std::clamp(c.nu, -1.0, 1.0) + 1.0) / 2.0 * (dims.nu - 1);
  return t;
}

LutCoords unmap_inscatter(const TexelCoords& t, const TableDims& dims, const ShellGeometry& geom) {
  const double rg = geom.planet_radius_m;
  const double rt = geom.atmosphere_radius_m;
  const double big_h = geom.horizon_span_m();
  const double rho = std::clamp(t.r / (dims.r - 1), 0.0, 1.0) * big_h;
  LutCoords c;
  c.r = std::sqrt(rho * rho + rg * rg);
  const double r = c.r;
  const int half = dims.mu / 2;
  if (t.mu < half - 0.5) {
    const double x = 1.0 - std::clamp(t.mu / (half - 1), 0.0, 1.0);
    const double d_min = r - rg;
    const double d_max = rho;
    const double d = d_min + x * (d_max - d_min);
    c.mu = (d == 0.0) ? -1.0 : std::clamp(-(rho * rho + d * d) / (2.0 * r * d), -1.0, 1.0);
  } else {
    const double x = std::clamp((t.mu - half) / (half - 1), 0.0, 1.0);
    const double d_min = rt - r;
    const double d_max = rho + big_h;
    const double d = d_min + x * (d_max - d_min);
    c.mu = (d == 0.0) ? 1.0
                      : std::clamp((big_h * big_h - rho * rho - d * d) / (2.0 * r * d), -1.0, 1.0);
  }
  c.mu_s = std::clamp(unit_to_mu_s(std::clamp(t.mu_s / (dims.mu_s - 1), 0.0, 1.0)), -1.0, 1.0);
  c.nu = std::clamp(t.nu / (dims.nu - 1), 0.0, 1.0) * 2.0 - 1.0;
  return c;
}

Texel2 map_transmittance(double r, double mu, const TableDims& dims, const ShellGeometry& geom) {
  const double rg = geom.planet_radius_m;
  const double rt = geom.atmosphere_radius_m;
  r = std::clamp(r, rg, rt);
  mu = std::clamp(std::max(mu, horizon_mu(r, rg)), -1.0, 1.0);
  const double big_h = geom.horizon_span_m();
  const double rho = safe_sqrt(r * r - rg * rg);
  const double d = distance_to_sphere_exit(r, mu, rt);
  const double d_min = rt - r;
  const double d_max = rho + big_h;
  const double x = std::clamp((d - d_min) / (d_max - d_min), 0.0, 1.0);
  return {x * (dims.transmittance_w - 1), rho / big_h * (dims.transmittance_h - 1)};
}

void unmap_transmittance(const Texel2& t, const TableDims& dims, const ShellGeometry& geom,
                         double* r, double* mu) {
  const double rg = geom.planet_radius_m;
  const double rt = geom.atmosphere_radius_m;
  const double big_h = geom.horizon_span_m();
  const double rho = std::clamp(t.y / (dims.transmittance_h - 1), 0.0, 1.0) * big_h;
  *r = std::sqrt(rho * rho + rg * rg);
  const double x = std::clamp(t.x / (dims.transmittance_w - 1), 0.0, 1.0);
  const double d_min = rt - *r;
  const double d_max = rho + big_h;
  const double d = d_min + x * (d_max - d_min);
  *mu = (d == 0.0) ? 1.0
                   : std::clamp((big_h * big_h - rho * rho - d * d) / (2.0 * *r * d), -1.0, 1.0);
}

Texel2 map_irradiance(double r, double mu_s, const TableDims& dims, const ShellGeometry& geom) {
  const double rg = geom.planet_radius_m;
  const double x_r = std::clamp((r - rg) / geom.thickness_m(), 0.0, 1.0);
  const double x_mu = (std::clamp(mu_s, -1.0, 1.0) + 1.0) / 2.0;
  return {x_mu * (dims.irradiance_w - 1), x_r * (dims.irradiance_h - 1)};
}

void unmap_irradiance(const Texel2& t, const TableDims& dims, const ShellGeometry& geom,
                      double* r, double* mu_s) {
  *r = geom.planet_radius_m +
       std::clamp(t.y / (dims.irradiance_h - 1), 0.0, 1.0) * geom.thickness_m();
  *mu_s = std::clamp(t.x / (dims.irradiance_w - 1), 0.0, 1.0) * 2.0 - 1.0;
}

// ---------------------------------------------------------------------------

TableSampler::TableSampler(const ScatteringTables& tables, const AtmosphereModel& model)
    : tables_(tables), model_(model), medium_(model) {
  const auto& d = tables.dims;
  if (tables.transmittance.size() != 3 * d.transmittance_texels() ||
      tables.irradiance.size() != 3 * d.irradiance_texels() ||
      tables.inscatter.size() != 3 * d.inscatter_texels()) {
    throw FormatError("table grids do not match their declared dimensions");
  }
}

double TableSampler::snap_radius(double r) const {
  const double rg = model_.geometry.planet_radius_m;
  if (r < rg + kGroundToleranceM) return rg;
  return std::min(r, model_.geometry.atmosphere_radius_m);
}

SpectralTriple TableSampler::lookup_optical_depth(double r, double mu) const {
  const auto& d = tables_.dims;
  const Texel2 t = map_transmittance(r, mu, d, model_.geometry);
  const Lerp lx = split(t.x, 0, d.transmittance_w - 1);
  const Lerp ly = split(t.y, 0, d.transmittance_h - 1);
  // Interpolating -log T keeps ratios of small transmittances accurate
  // near the horizon.
  const auto at = [&](int x, int y) {
    const SpectralTriple v = fetch(tables_.transmittance, static_cast<std::size_t>(y) * d.transmittance_w + x);
    SpectralTriple tau;
    for (std::size_t i = 0; i < 3; ++i) tau[i] = -std::log(std::max(v[i], kMinTransmittance));
    return tau;
  };
  const SpectralTriple a = at(lx.i0, ly.i0) * (1.0 - lx.f) + at(lx.i0 + 1, ly.i0) * lx.f;
  const SpectralTriple b = at(lx.i0, ly.i0 + 1) * (1.0 - lx.f) + at(lx.i0 + 1, ly.i0 + 1) * lx.f;
  return a * (1.0 - ly.f) + b * ly.f;
}

SpectralTriple TableSampler::lookup_transmittance(double r, double mu) const {
  return exp(lookup_optical_depth(r, mu) * -1.0);
}

SpectralTriple TableSampler::transmittance_to_top(double r, double mu) const {
  r = snap_radius(r);
  if (ray_hits_ground(r, mu, model_.geometry.planet_radius_m)) return {};
  return lookup_transmittance(r, mu);
}

SpectralTriple TableSampler::segment_transmittance(double r, double mu, double d,
                                                   bool hits_ground) const {
  const double rg = model_.geometry.planet_radius_m;
  r = snap_radius(r);
  if (d <= 0.0) return SpectralTriple::uniform(1.0);
  const double r_d = snap_radius(safe_sqrt(d * d + 2.0 * r * mu * d + r * r));
  const double mu_d = std::clamp((r * mu + d) / r_d, -1.0, 1.0);
  // Re-express the segment as an upward ray from its lower end, so that the
  // top-exit table covers both factors.
  double r_lo = r, mu_lo = mu, r_hi = r_d, mu_hi = mu_d;
  if (hits_ground) {
    r_lo = r_d;
    mu_lo = -mu_d;
    r_hi = r;
    mu_hi = -mu;
  }
  mu_lo = std::max(mu_lo, horizon_mu(r_lo, rg));
  mu_hi = std::max(mu_hi, horizon_mu(r_hi, rg));
  const SpectralTriple tau_lo = lookup_optical_depth(r_lo, mu_lo);
  SpectralTriple tau_hi = lookup_optical_depth(r_hi, mu_hi);
  if (model_.curved_paths && r_lo == rg) {
    const double zenith = std::acos(std::clamp(mu_lo, 0.0, 1.0)) * 180.0 / kPi;
    tau_hi *= curved_path_stretch(model_.geometry, zenith);
  }
  // T(lo -> top) / T(hi -> top) as a depth difference, at most 1.
  return exp(min(tau_hi - tau_lo, SpectralTriple{}));
}

SpectralTriple TableSampler::inscatter_raw(double r, double mu, double mu_s, double nu) const {
  return sample_inscatter_grid(tables_.inscatter, tables_.dims, model_.geometry, snap_radius(r),
                               mu, mu_s, nu);
}

SpectralTriple TableSampler::irradiance(double r, double mu_s) const {
  return sample_irradiance_grid(tables_.irradiance, tables_.dims, model_.geometry,
                                snap_radius(r), mu_s);
}

double boundary_distance(double r, double mu, const ShellGeometry& geom) {
  const double rg = geom.planet_radius_m;
  r = std::clamp(r, rg, geom.atmosphere_radius_m);
  mu = std::clamp(mu, -1.0, 1.0);
  return ray_hits_ground(r, mu, rg) ? distance_to_ground(r, mu, rg)
                                    : distance_to_sphere_exit(r, mu, geom.atmosphere_radius_m);
}

SpectralTriple sample_inscatter_grid(const std::vector<float>& grid, const TableDims& d,
                                     const ShellGeometry& geom, double r, double mu,
                                     double mu_s, double nu) {
  return interpolate_inscatter_grid(grid, d, geom, r, mu, mu_s, nu) * boundary_distance(r, mu, geom);
}

SpectralTriple interpolate_inscatter_grid(const std::vector<float>& grid, const TableDims& d,
                                          const ShellGeometry& geom, double r, double mu,
                                          double mu_s, double nu) {
  const TexelCoords t = map_inscatter({r, mu, mu_s, nu}, d, geom);
  const int half = d.mu / 2;
  const bool lower = t.mu < half - 0.5;
  const Lerp lr = split(t.r, 0, d.r - 1);
  const Lerp lm = lower ? split(t.mu, 0, half - 1) : split(t.mu, half, d.mu - 1);
  const Lerp ls = split(t.mu_s, 0, d.mu_s - 1);
  const Lerp ln = split(t.nu, 0, d.nu - 1);
  SpectralTriple out{};
  for (int a = 0; a < 2; ++a) {
    const double wa = a ? lr.f : 1.0 - lr.f;
    if (wa == 0.0) continue;
    for (int b = 0; b < 2; ++b) {
      const double wb = wa * (b ? lm.f : 1.0 - lm.f);
      if (wb == 0.0) continue;
      for (int c = 0; c < 2; ++c) {
        const double wc = wb * (c ? ln.f : 1.0 - ln.f);
        if (wc == 0.0) continue;
        const std::size_t base =
            ((static_cast<std::size_t>(lr.i0 + a) * d.mu + lm.i0 + b) * d.nu + ln.i0 + c) *
                d.mu_s + ls.i0;
        const SpectralTriple v0 = fetch(grid, base);
        const SpectralTriple v1 = fetch(grid, base + 1);
        out += (v0 * (1.0 - ls.f) + v1 * ls.f) * wc;
      }
    }
  }
  return out;
}

SpectralTriple sample_irradiance_grid(const std::vector<float>& grid, const TableDims& d,
                                      const ShellGeometry& geom, double r, double mu_s) {
  const Texel2 t = map_irradiance(r, mu_s, d, geom);
  const Lerp lx = split(t.x, 0, d.irradiance_w - 1);
  const Lerp ly = split(t.y, 0, d.irradiance_h - 1);
  const auto at = [&](int x, int y) {
    return fetch(grid, static_cast<std::size_t>(y) * d.irradiance_w + x);
  };
  const SpectralTriple a = at(lx.i0, ly.i0) * (1.0 - lx.f) + at(lx.i0 + 1, ly.i0) * lx.f;
  const SpectralTriple b = at(lx.i0, ly.i0 + 1) * (1.0 - lx.f) + at(lx.i0 + 1, ly.i0 + 1) * lx.f;
  return a * (1.0 - ly.f) + b * ly.f;
}

SpectralTriple TableSampler::mie_single_unphased(double r, double mu, double mu_s, double nu,
                                                 double d, bool hits_ground,
                                                 int samples) const {
  if (samples < 2) throw DomainError("mie_single_unphased: need at least 2 samples");
  if (!(d > 0.0)) return {};
  if (medium_.mie_scattering_surface().max_component() == 0.0) return {};
  const double rg = model_.geometry.planet_radius_m;
  r = snap_radius(r);
  SpectralTriple sum{};
  for (const PathNode& node : path_nodes(r, mu, d, samples)) {
    const double t = node.t;
    const double r_p = safe_sqrt(t * t + 2.0 * r * mu * t + r * r);
    const double mu_s_p = std::clamp((r * mu_s + t * nu) / r_p, -1.0, 1.0);
    const SpectralTriple sun = sun_transmittance(r_p, mu_s_p);
    if (sun.max_component() == 0.0) continue;
    const double alt_km = std::max(snap_radius(r_p) - rg, 0.0) / 1000.0;
    const SpectralTriple view = segment_transmittance(r, mu, t, hits_ground);
    sum += view * sun * medium_.at(alt_km).mie_scattering * node.weight;
  }
  return sum * model_.sun_irradiance;
}

SpectralTriple TableSampler::inscatter(double r, double mu, double mu_s, double nu, double d,
                                       int mie_samples) const {
  const double rg = model_.geometry.planet_radius_m;
  const double rt = model_.geometry.atmosphere_radius_m;
  r = snap_radius(r);
  double lo, hi;
  nu_bounds(mu, mu_s, &lo, &hi);
  nu = std::clamp(nu, lo, hi);
  const bool ground = ray_hits_ground(r, mu, rg);
  const double full = ground ? distance_to_ground(r, mu, rg) : distance_to_sphere_exit(r, mu, rt);
  if (d < 0.0 || d > full) d = full;
  SpectralTriple grid = inscatter_raw(r, mu, mu_s, nu);
  if (d < full * (1.0 - 1e-9)) {
    const double r_y = safe_sqrt(d * d + 2.0 * r * mu * d + r * r);
    const double mu_y = std::clamp((r * mu + d) / r_y, -1.0, 1.0);
    const double mu_s_y = std::clamp((r * mu_s + d * nu) / r_y, -1.0, 1.0);
    const SpectralTriple far = inscatter_raw(r_y, mu_y, mu_s_y, nu);
    grid = max(grid - segment_transmittance(r, mu, d, ground) * far, SpectralTriple{});
  }
  const SpectralTriple ray = grid * rayleigh_phase(nu, model_.rayleigh_phase);
  const SpectralTriple mie =
      mie_single_unphased(r, mu, mu_s, nu, d, ground, mie_samples) * mie_phase(model_.mie, nu);
  return ray + mie;
}

}  // namespace skylut
