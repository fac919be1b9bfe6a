#include "skylut/precompute.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "skylut/errors.hpp"
#include "skylut/optics.hpp"
#include "skylut/parallel.hpp"

namespace skylut {
namespace {

using Clock = std::chrono::steady_clock;

ScatteringTables empty_tables(const AtmosphereModel& model, const TableDims& dims) {
  dims.validate();
  ScatteringTables t;
  t.dims = dims;
  t.model_hash = model_hash(model);
  t.transmittance.assign(3 * dims.transmittance_texels(), 1.0f);
  t.irradiance.assign(3 * dims.irradiance_texels(), 0.0f);
  t.inscatter.assign(3 * dims.inscatter_texels(), 0.0f);
  return t;
}

void store(std::vector<float>& g, std::size_t texel, const SpectralTriple& v) {
  float* p = g.data() + 3 * texel;
  p[0] = static_cast<float>(v.r680);
  p[1] = static_cast<float>(v.g550);
  p[2] = static_cast<float>(v.b440);
}

SpectralTriple load(const std::vector<float>& g, std::size_t texel) {
  const float* p = g.data() + 3 * texel;
  return {p[0], p[1], p[2]};
}

// L-infinity norm of a per-metre in-scatter grid taken as radiance.
double radiance_norm_inf(const std::vector<float>& g, const TableDims& d, const ShellGeometry& geom) {
  double m = 0.0;
  const std::size_t per_row = 3 * static_cast<std::size_t>(d.nu) * d.mu_s;
  for (int ir = 0; ir < d.r; ++ir) {
    for (int imu = 0; imu < d.mu; ++imu) {
      const LutCoords c = unmap_inscatter({double(ir), double(imu), 0.0, 0.0}, d, geom);
      const double len = boundary_distance(c.r, c.mu, geom);
      const std::size_t base = (static_cast<std::size_t>(ir) * d.mu + imu) * per_row;
      for (std::size_t i = 0; i < per_row; ++i) m = std::max(m, g[base + i] * len);
    }
  }
  return m;
}

double safe_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }

struct Direction {
  Vec3 w;
  double weight;
};

// Midpoint product rule on the sphere (or the upper hemisphere).
std::vector<Direction> sphere_quadrature(int n_zenith, int n_azimuth, bool hemisphere) {
  std::vector<Direction> dirs;
  dirs.reserve(static_cast<std::size_t>(n_zenith) * n_azimuth);
  const double span = hemisphere ? kPi / 2.0 : kPi;
  const double d_theta = span / n_zenith;
  const double d_phi = 2.0 * kPi / n_azimuth;
  for (int j = 0; j < n_zenith; ++j) {
    const double theta = (j + 0.5) * d_theta;
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    for (int l = 0; l < n_azimuth; ++l) {
      const double phi = (l + 0.5) * d_phi;
      dirs.push_back({Vec3(st * std::cos(phi), st * std::sin(phi), ct), st * d_theta * d_phi});
    }
  }
  return dirs;
}

// View direction with cosine mu to the zenith and nu to the sun, in the
// frame where the sun lies in the x-z plane.
Vec3 view_in_sun_frame(double mu, double mu_s, double nu) {
  const double sin_s2 = 1.0 - mu_s * mu_s;
  const double vx = sin_s2 > 1e-12 ? (nu - mu * mu_s) / std::sqrt(sin_s2) : 0.0;
  const double vy = safe_sqrt(1.0 - mu * mu - vx * vx);
  return Vec3(vx, vy, mu);
}

struct TexelState {
  double r, mu, mu_s, nu;
};

TexelState texel_state(const TableDims& dims, const ShellGeometry& geom, int ir, int imu,
                       int imu_s, int inu) {
  const LutCoords c = unmap_inscatter({double(ir), double(imu), double(imu_s), double(inu)},
                                      dims, geom);
  double lo, hi;
  nu_bounds(c.mu, c.mu_s, &lo, &hi);
  return {c.r, c.mu, c.mu_s, std::clamp(c.nu, lo, hi)};
}

AtmosphereModel validated(const AtmosphereModel& m) {
  m.validate();
  return m;
}

}  // namespace

TableBuilder::TableBuilder(const AtmosphereModel& model, PrecomputeOptions options)
    : model_(validated(model)),
      opt_(options),
      medium_(model_),
      tables_(empty_tables(model_, options.dims)),
      sampler_(tables_, model_) {
  if (opt_.orders < 1) throw DomainError("precompute: orders must be >= 1");
  if (opt_.transmittance_samples < 2 || opt_.path_samples < 2) {
    throw DomainError("precompute: sample counts must be >= 2");
  }
  if (opt_.sphere_zenith < 1 || opt_.sphere_azimuth < 1) {
    throw DomainError("precompute: quadrature sizes must be >= 1");
  }
}

void TableBuilder::build_transmittance() {
  const TableDims& d = tables_.dims;
  const ShellGeometry& geom = model_.geometry;
  const auto ext = [this](double alt_km) { return medium_.extinction(alt_km); };
  parallel_for(static_cast<std::size_t>(d.transmittance_h), opt_.threads, [&](std::size_t iy) {
    for (int ix = 0; ix < d.transmittance_w; ++ix) {
      double r, mu;
      unmap_transmittance({double(ix), double(iy)}, d, geom, &r, &mu);
      const double len = distance_to_sphere_exit(r, mu, geom.atmosphere_radius_m);
      const Vec3 a(0.0, 0.0, r);
      const Vec3 b = a + len * Vec3(safe_sqrt(1.0 - mu * mu), 0.0, mu);
      SpectralTriple tau = optical_depth_of(geom, a, b, ext, opt_.transmittance_samples);
      if (model_.curved_paths && iy == 0) {
        tau *= curved_path_stretch(geom, std::acos(std::clamp(mu, 0.0, 1.0)) * 180.0 / kPi);
      }
      store(tables_.transmittance, iy * d.transmittance_w + ix, transmittance(tau));
    }
  });
  transmittance_done_ = true;
}

void TableBuilder::build_order1() {
  if (!transmittance_done_) build_transmittance();
  if (completed_ != 0) throw DomainError("precompute: order 1 already built");
  const auto start = Clock::now();
  const TableDims& d = tables_.dims;
  const ShellGeometry& geom = model_.geometry;
  const double rg = geom.planet_radius_m;
  single_rayleigh_.assign(3 * d.inscatter_texels(), 0.0f);
  single_mie_.assign(3 * d.inscatter_texels(), 0.0f);
  const int n = opt_.path_samples;

  parallel_for(static_cast<std::size_t>(d.r) * d.mu, opt_.threads, [&](std::size_t job) {
    const int ir = static_cast<int>(job / d.mu);
    const int imu = static_cast<int>(job % d.mu);
    for (int inu = 0; inu < d.nu; ++inu) {
      for (int imu_s = 0; imu_s < d.mu_s; ++imu_s) {
        const TexelState s = texel_state(d, geom, ir, imu, imu_s, inu);
        const bool ground = ray_hits_ground(s.r, s.mu, rg);
        const double len = std::max(boundary_distance(s.r, s.mu, geom), kMinStoredPathM);
        SpectralTriple ray{}, mie{};
        {
          for (const PathNode& node : path_nodes(s.r, s.mu, len, n)) {
            const double t = node.t;
            const double r_p = safe_sqrt(t * t + 2.0 * s.r * s.mu * t + s.r * s.r);
            const double mu_s_p = std::clamp((s.r * s.mu_s + t * s.nu) / r_p, -1.0, 1.0);
            const SpectralTriple sun = sampler_.sun_transmittance(r_p, mu_s_p);
            if (sun.max_component() == 0.0) continue;
            const SpectralTriple path =
                sampler_.segment_transmittance(s.r, s.mu, t, ground) * sun * node.weight;
            const MediumSample m = medium_.at(std::max(r_p - rg, 0.0) / 1000.0);
            ray += path * m.rayleigh_scattering;
            mie += path * m.mie_scattering;
          }
          ray *= model_.sun_irradiance / len;
          mie *= model_.sun_irradiance / len;
        }
        const std::size_t texel = tables_.inscatter_index(ir, imu, inu, imu_s);
        store(single_rayleigh_, texel, ray);
        store(single_mie_, texel, mie);
      }
    }
  });

  delta_e_.assign(3 * d.irradiance_texels(), 0.0f);
  for (int iy = 0; iy < d.irradiance_h; ++iy) {
    for (int ix = 0; ix < d.irradiance_w; ++ix) {
      double r, mu_s;
      unmap_irradiance({double(ix), double(iy)}, d, geom, &r, &mu_s);
      const SpectralTriple e =
          model_.sun_irradiance * sampler_.sun_transmittance(r, mu_s) * std::max(mu_s, 0.0);
      store(delta_e_, iy * d.irradiance_w + ix, e);
    }
  }

  // The stored grid starts as Rayleigh single scattering; the norm of the
  // first order is taken with both phase functions applied.
  tables_.inscatter = single_rayleigh_;
  double norm = 0.0;
  for (int ir = 0; ir < d.r; ++ir) {
    for (int imu = 0; imu < d.mu; ++imu) {
      for (int inu = 0; inu < d.nu; ++inu) {
        for (int imu_s = 0; imu_s < d.mu_s; ++imu_s) {
          const TexelState s = texel_state(d, geom, ir, imu, imu_s, inu);
          const std::size_t texel = tables_.inscatter_index(ir, imu, inu, imu_s);
          const SpectralTriple v =
              (load(single_rayleigh_, texel) * rayleigh_phase(s.nu, model_.rayleigh_phase) +
               load(single_mie_, texel) * mie_phase(model_.mie, s.nu)) *
              boundary_distance(s.r, s.mu, geom);
          norm = std::max(norm, v.max_component());
        }
      }
    }
  }
  delta_s_.clear();
  completed_ = 1;
  stats_.push_back({1, norm, std::chrono::duration<double>(Clock::now() - start).count()});
}

void TableBuilder::compute_gathering(int order) {
  const TableDims& d = tables_.dims;
  const ShellGeometry& geom = model_.geometry;
  const double rg = geom.planet_radius_m;
  const auto dirs = sphere_quadrature(opt_.sphere_zenith, opt_.sphere_azimuth, false);
  const SpectralTriple albedo_over_pi = model_.ground_albedo / kPi;
  gather_.assign(3 * d.inscatter_texels(), 0.0f);

  parallel_for(static_cast<std::size_t>(d.r) * d.mu_s, opt_.threads, [&](std::size_t job) {
    const int ir = static_cast<int>(job / d.mu_s);
    const int imu_s = static_cast<int>(job % d.mu_s);
    const TexelState base = texel_state(d, geom, ir, d.mu / 2, imu_s, 0);
    const double r = base.r;
    const double mu_s = base.mu_s;
    const Vec3 sun(safe_sqrt(1.0 - mu_s * mu_s), 0.0, mu_s);
    const Vec3 p(0.0, 0.0, r);

    // Incoming radiance per quadrature direction, shared by every view.
    std::vector<SpectralTriple> incoming(dirs.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const Vec3& w = dirs[i].w;
      const double nu_i = std::clamp(w.dot(sun), -1.0, 1.0);
      SpectralTriple l;
      if (order == 2) {
        l = sample_inscatter_grid(single_rayleigh_, d, geom, r, w.z(), mu_s, nu_i) *
                rayleigh_phase(nu_i, model_.rayleigh_phase) +
            sample_inscatter_grid(single_mie_, d, geom, r, w.z(), mu_s, nu_i) *
                mie_phase(model_.mie, nu_i);
      } else {
        l = sample_inscatter_grid(delta_s_, d, geom, r, w.z(), mu_s, nu_i);
      }
      if (ray_hits_ground(r, w.z(), rg) && albedo_over_pi.max_component() > 0.0) {
        const double dg = distance_to_ground(r, w.z(), rg);
        const Vec3 n = (p + dg * w).normalized();
        const SpectralTriple e =
            sample_irradiance_grid(delta_e_, d, geom, rg, std::clamp(n.dot(sun), -1.0, 1.0));
        l += sampler_.segment_transmittance(r, w.z(), dg, true) * albedo_over_pi * e;
      }
      incoming[i] = l * dirs[i].weight;
    }

    const MediumSample m = medium_.at(std::max(r - rg, 0.0) / 1000.0);
    const MiePhaseEval mie_phase_fn(model_.mie);
    const RayleighPhaseMode mode = model_.rayleigh_phase;
    for (int imu = 0; imu < d.mu; ++imu) {
      for (int inu = 0; inu < d.nu; ++inu) {
        const TexelState s = texel_state(d, geom, ir, imu, imu_s, inu);
        const Vec3 v = view_in_sun_frame(s.mu, mu_s, s.nu);
        SpectralTriple ray_sum{}, mie_sum{};
        for (std::size_t i = 0; i < dirs.size(); ++i) {
          const double c = std::clamp(v.dot(dirs[i].w), -1.0, 1.0);
          ray_sum += incoming[i] * rayleigh_phase_unchecked(c, mode);
          mie_sum += incoming[i] * mie_phase_fn(c);
        }
        const SpectralTriple j = ray_sum * m.rayleigh_scattering + mie_sum * m.mie_scattering;
        store(gather_, tables_.inscatter_index(ir, imu, inu, imu_s), j);
      }
    }
  });
}

void TableBuilder::compute_delta_irradiance(int order) {
  const TableDims& d = tables_.dims;
  const ShellGeometry& geom = model_.geometry;
  const auto dirs = sphere_quadrature(opt_.sphere_zenith, opt_.sphere_azimuth, true);
  std::vector<float> next(3 * d.irradiance_texels(), 0.0f);
  parallel_for(static_cast<std::size_t>(d.irradiance_h), opt_.threads, [&](std::size_t iy) {
    for (int ix = 0; ix < d.irradiance_w; ++ix) {
      double r, mu_s;
      unmap_irradiance({double(ix), double(iy)}, d, geom, &r, &mu_s);
      const Vec3 sun(safe_sqrt(1.0 - mu_s * mu_s), 0.0, mu_s);
      SpectralTriple e{};
      for (const auto& dir : dirs) {
        const double nu = std::clamp(dir.w.dot(sun), -1.0, 1.0);
        SpectralTriple l;
        if (order == 2) {
          l = sample_inscatter_grid(single_rayleigh_, d, geom, r, dir.w.z(), mu_s, nu) *
                  rayleigh_phase(nu, model_.rayleigh_phase) +
              sample_inscatter_grid(single_mie_, d, geom, r, dir.w.z(), mu_s, nu) *
                  mie_phase(model_.mie, nu);
        } else {
          l = sample_inscatter_grid(delta_s_, d, geom, r, dir.w.z(), mu_s, nu);
        }
        e += l * (dir.w.z() * dir.weight);
      }
      store(next, iy * d.irradiance_w + ix, e);
    }
  });
  delta_e_.swap(next);
}

void TableBuilder::compute_delta_inscatter() {
  const TableDims& d = tables_.dims;
  const ShellGeometry& geom = model_.geometry;
  const double rg = geom.planet_radius_m;
  const int n = opt_.path_samples;
  std::vector<float> next(3 * d.inscatter_texels(), 0.0f);
  parallel_for(static_cast<std::size_t>(d.r) * d.mu, opt_.threads, [&](std::size_t job) {
    const int ir = static_cast<int>(job / d.mu);
    const int imu = static_cast<int>(job % d.mu);
    for (int inu = 0; inu < d.nu; ++inu) {
      for (int imu_s = 0; imu_s < d.mu_s; ++imu_s) {
        const TexelState s = texel_state(d, geom, ir, imu, imu_s, inu);
        const bool ground = ray_hits_ground(s.r, s.mu, rg);
        const double len = std::max(boundary_distance(s.r, s.mu, geom), kMinStoredPathM);
        SpectralTriple sum{};
        {
          for (const PathNode& node : path_nodes(s.r, s.mu, len, n)) {
            const double t = node.t;
            const double r_p = safe_sqrt(t * t + 2.0 * s.r * s.mu * t + s.r * s.r);
            const double mu_p = std::clamp((s.r * s.mu + t) / r_p, -1.0, 1.0);
            const double mu_s_p = std::clamp((s.r * s.mu_s + t * s.nu) / r_p, -1.0, 1.0);
            const SpectralTriple j =
                interpolate_inscatter_grid(gather_, d, geom, r_p, mu_p, mu_s_p, s.nu);
            sum += sampler_.segment_transmittance(s.r, s.mu, t, ground) * j * node.weight;
          }
        }
        store(next, tables_.inscatter_index(ir, imu, inu, imu_s), sum / len);
      }
    }
  });
  delta_s_.swap(next);
}

void TableBuilder::iterate_order(int order) {
  if (order != completed_ + 1 || order < 2) {
    throw DomainError("precompute: order " + std::to_string(order) +
                      " requested after " + std::to_string(completed_) + " completed orders");
  }
  const auto start = Clock::now();
  const TableDims& d = tables_.dims;
  compute_gathering(order);
  compute_delta_irradiance(order);
  compute_delta_inscatter();
  gather_.clear();
  gather_.shrink_to_fit();

  const double norm = radiance_norm_inf(delta_s_, d, model_.geometry);
  const double prev = stats_.back().delta_norm;
  if (norm > prev) {
    throw DivergenceError("scattering order " + std::to_string(order) + " has norm " +
                          std::to_string(norm) + ", above order " + std::to_string(order - 1) +
                          " (" + std::to_string(prev) + "); the series is not converging");
  }

  for (int ir = 0; ir < d.r; ++ir) {
    for (int imu = 0; imu < d.mu; ++imu) {
      for (int inu = 0; inu < d.nu; ++inu) {
        for (int imu_s = 0; imu_s < d.mu_s; ++imu_s) {
          const TexelState s = texel_state(d, model_.geometry, ir, imu, imu_s, inu);
          const std::size_t texel = tables_.inscatter_index(ir, imu, inu, imu_s);
          store(tables_.inscatter, texel,
                load(tables_.inscatter, texel) +
                    load(delta_s_, texel) / rayleigh_phase(s.nu, model_.rayleigh_phase));
        }
      }
    }
  }
  for (std::size_t i = 0; i < d.irradiance_texels(); ++i) {
    store(tables_.irradiance, i, load(tables_.irradiance, i) + load(delta_e_, i));
  }
  if (order == 2) {
    single_rayleigh_.clear();
    single_rayleigh_.shrink_to_fit();
    single_mie_.clear();
    single_mie_.shrink_to_fit();
  }
  completed_ = order;
  stats_.push_back({order, norm, std::chrono::duration<double>(Clock::now() - start).count()});
}

ScatteringTables TableBuilder::take() {
  ScatteringTables out = std::move(tables_);
  tables_ = empty_tables(model_, out.dims);
  return out;
}

ScatteringTables build_tables(const AtmosphereModel& model, const PrecomputeOptions& options,
                              std::vector<OrderStats>* stats, const ProgressFn& progress) {
  TableBuilder builder(model, options);
  builder.build_transmittance();
  builder.build_order1();
  if (progress) progress(builder.stats().back());
  for (int k = 2; k <= options.orders; ++k) {
    builder.iterate_order(k);
    if (progress) progress(builder.stats().back());
  }
  if (stats) *stats = builder.stats();
  return builder.take();
}

}  // namespace skylut
