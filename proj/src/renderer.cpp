#include "skylut/renderer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "skylut/errors.hpp"
#include "skylut/lut_io.hpp"
#include "skylut/parallel.hpp"
#include "skylut/spectra.hpp"

namespace skylut {
namespace {

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

constexpr double kDegToRad = kPi / 180.0;

}  // namespace

Camera Camera::look(const Vec3& position, const Vec3& forward, const Vec3& up_hint,
                    double vertical_fov_deg) {
  if (!(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0)) {
    throw DomainError("camera field of view must lie in (0, 180) degrees");
  }
  Camera c;
  c.position = position;
  c.forward = forward.normalized();
  Vec3 right = c.forward.cross(up_hint);
  if (right.norm() < 1e-9) right = c.forward.cross(Vec3::UnitX());
  if (right.norm() < 1e-9) right = c.forward.cross(Vec3::UnitY());
  c.right = right.normalized();
  c.up = c.right.cross(c.forward).normalized();
  c.vertical_fov_deg = vertical_fov_deg;
  return c;
}

SpectralTriple AlbedoMap::sample(const Vec3& n) const {
  if (width <= 0 || height <= 0) return {};
  const double lon = std::atan2(n.y(), n.x());
  const double lat = std::asin(std::clamp(n.z(), -1.0, 1.0));
  const int x = std::clamp(static_cast<int>((lon + kPi) / (2.0 * kPi) * width), 0, width - 1);
  const int y = std::clamp(static_cast<int>((kPi / 2.0 - lat) / kPi * height), 0, height - 1);
  return texels[static_cast<std::size_t>(y) * width + x];
}

AlbedoMap AlbedoMap::from_ppm(const RgbImage& image) {
  AlbedoMap m;
  m.width = image.width;
  m.height = image.height;
  m.texels.resize(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < m.texels.size(); ++i) {
    const std::uint8_t* p = image.pixels.data() + 3 * i;
    m.texels[i] = {srgb_decode(p[0] / 255.0), srgb_decode(p[1] / 255.0), srgb_decode(p[2] / 255.0)};
  }
  return m;
}

void RenderJob::validate() const {
  if (!model || !tables) throw DomainError("render job needs a model and tables");
  if (width < 1 || height < 1) throw DomainError("image size must be at least 1x1");
  if (!(exposure > 0.0)) throw DomainError("exposure must be > 0");
  if (camera.position.norm() < model->geometry.planet_radius_m - kGroundToleranceM) {
    throw DomainError("camera is inside the planet");
  }
  if (!(std::fabs(sun_direction.norm() - 1.0) < 1e-6)) {
    throw DomainError("sun direction must be a unit vector");
  }
  if (ground_albedo.min_component() < 0.0 || ground_albedo.max_component() > 1.0) {
    throw DomainError("ground albedo must lie in [0, 1]");
  }
  if (mie_samples < 2) throw DomainError("mie samples must be >= 2");
}

Ray pixel_ray(const Camera& c, int width, int height, int x, int y) {
  const double tan_half = std::tan(c.vertical_fov_deg * kDegToRad / 2.0);
  const double aspect = static_cast<double>(width) / height;
  const double sx = ((x + 0.5) / width * 2.0 - 1.0) * tan_half * aspect;
  const double sy = (1.0 - (y + 0.5) / height * 2.0) * tan_half;
  return Ray::make(c.position, c.forward + sx * c.right + sy * c.up);
}

SurfaceSample trace_planet(const ShellGeometry& geom, const Ray& ray, const SpectralTriple& albedo,
                           const AlbedoMap* map) {
  SurfaceSample s;
  s.depth = std::numeric_limits<double>::infinity();
  const double rg = geom.planet_radius_m;
  const double r = ray.origin.norm();
  double t;
  if (r <= rg + kGroundToleranceM) {
    const double mu = ray.origin.dot(ray.direction) / r;
    if (mu >= 0.0) return s;
    t = 0.0;
  } else {
    const auto hit = ray_sphere_intersect(ray, rg, true);
    if (!hit) return s;
    t = hit->t_near;
  }
  s.hit = true;
  s.depth = t;
  s.position = ray.origin + t * ray.direction;
  s.normal = s.position.normalized();
  s.color = map ? map->sample(s.normal) : albedo;
  return s;
}

GBuffer rasterize_planet(const RenderJob& job) {
  job.validate();
  GBuffer g;
  g.width = job.width;
  g.height = job.height;
  g.samples.resize(static_cast<std::size_t>(job.width) * job.height);
  const AlbedoMap* map = job.ground_albedo_map ? &*job.ground_albedo_map : nullptr;
  for (int y = 0; y < job.height; ++y) {
    for (int x = 0; x < job.width; ++x) {
      const Ray ray = pixel_ray(job.camera, job.width, job.height, x, y);
      g.samples[static_cast<std::size_t>(y) * job.width + x] =
          trace_planet(job.model->geometry, ray, job.ground_albedo, map);
    }
  }
  return g;
}

SpectralTriple sun_disc_radiance(const Vec3& view, const Vec3& sun,
                                 const SpectralTriple& transmittance_to_space,
                                 const SpectralTriple& disc_radiance) {
  const double alpha = kSunAngularRadiusDeg * kDegToRad;
  const double angle = std::acos(std::clamp(view.dot(sun), -1.0, 1.0));
  const double w = 1.0 - smoothstep(alpha, 1.1 * alpha, angle);
  if (w <= 0.0) return {};
  return transmittance_to_space * disc_radiance * w;
}

SpectralTriple disc_radiance_from_irradiance(const SpectralTriple& irradiance) {
  const double alpha = kSunAngularRadiusDeg * kDegToRad;
  return irradiance / (kPi * alpha * alpha);
}

ShadeTerms shade_terms(const TableSampler& sampler, const Ray& ray, const Vec3& sun,
                       const SurfaceSample& surface, const ShadeOptions& options) {
  const AtmosphereModel& model = sampler.model();
  const ShellGeometry& geom = model.geometry;
  const double rg = geom.planet_radius_m;
  const double rt = geom.atmosphere_radius_m;
  ShadeTerms out;

  // Advance to the shell; a ray missing it sees the background.
  double t_enter = 0.0;
  double t_exit;
  if (ray.origin.norm() > rt) {
    const auto shell = ray_sphere_intersect(ray, rt, true);
    if (!shell) {
      out.inscatter = options.background;
      return out;
    }
    t_enter = shell->t_near;
    t_exit = shell->t_far;
  } else {
    t_exit = distance_to_sphere_exit(ray.origin.norm(),
                                     ray.origin.dot(ray.direction) / ray.origin.norm(), rt);
  }
  const Vec3 x = ray.origin + t_enter * ray.direction;
  const Vec3& v = ray.direction;
  const double r = std::max(x.norm(), rg);
  const double mu = std::clamp(x.dot(v) / x.norm(), -1.0, 1.0);
  const double mu_s = std::clamp(x.dot(sun) / x.norm(), -1.0, 1.0);
  const double nu = std::clamp(v.dot(sun), -1.0, 1.0);
  const double length = (surface.hit ? surface.depth : t_exit) - t_enter;

  out.inscatter = sampler.inscatter(r, mu, mu_s, nu, std::max(length, 0.0), options.mie_samples);
  if (options.mie_share) {
    // Share of Mie single scattering, reported for diagnostics.
    double lo, hi;
    nu_bounds(mu, mu_s, &lo, &hi);
    const bool ground = ray_hits_ground(r, mu, rg);
    out.mie_inscatter = sampler.mie_single_unphased(r, mu, mu_s, std::clamp(nu, lo, hi),
                                                    std::max(length, 0.0), ground,
                                                    options.mie_samples) *
                        mie_phase(model.mie, std::clamp(nu, lo, hi));
  }

  if (surface.hit) {
    const bool ground = ray_hits_ground(r, mu, rg);
    const SpectralTriple t_view = sampler.segment_transmittance(r, mu, length, ground);
    const double mu_s_g = std::clamp(surface.normal.dot(sun), -1.0, 1.0);
    const SpectralTriple direct =
        model.sun_irradiance * sampler.sun_transmittance(rg, mu_s_g) * std::max(mu_s_g, 0.0);
    // Night side gets nothing, sky light included.
    if (mu_s_g > 0.0) {
      const SpectralTriple sky = sampler.irradiance(rg, mu_s_g);
      out.ground = t_view * surface.color / kPi * (direct + sky);
    }
  } else if (options.sun_disc) {
    out.sun = sun_disc_radiance(v, sun, sampler.transmittance_to_top(r, mu),
                                disc_radiance_from_irradiance(model.sun_irradiance));
  }
  return out;
}

SpectralTriple shade_pixel(const TableSampler& sampler, const Ray& ray, const Vec3& sun,
                           const SurfaceSample& surface, const ShadeOptions& options) {
  return shade_terms(sampler, ray, sun, surface, options).total();
}

double srgb_encode(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double srgb_decode(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

SpectralTriple tone_map_linear(const SpectralTriple& hdr, double exposure) {
  if (!(exposure > 0.0)) throw DomainError("tone_map: exposure must be > 0");
  SpectralTriple out;
  for (std::size_t i = 0; i < 3; ++i) out[i] = 1.0 - std::exp(-exposure * std::max(hdr[i], 0.0));
  return out;
}

SpectralTriple tone_map(const SpectralTriple& hdr, double exposure) {
  const SpectralTriple l = tone_map_linear(hdr, exposure);
  return {srgb_encode(l.r680), srgb_encode(l.g550), srgb_encode(l.b440)};
}

RenderResult render(const RenderJob& job) {
  const auto start = std::chrono::steady_clock::now();
  const GBuffer g = rasterize_planet(job);
  const TableSampler sampler(*job.tables, *job.model);
  const Vec3 sun = job.sun_direction.normalized();
  ShadeOptions opt;
  opt.sun_disc = job.include_sun_disc;
  opt.mie_samples = job.mie_samples;

  RenderResult out;
  out.width = job.width;
  out.height = job.height;
  out.hdr.assign(3 * g.samples.size(), 0.0f);
  out.display.width = job.width;
  out.display.height = job.height;
  out.display.pixels.assign(3 * g.samples.size(), 0);
  parallel_for(static_cast<std::size_t>(job.height), job.threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < job.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * job.width + x;
      const Ray ray = pixel_ray(job.camera, job.width, job.height, x, y);
      const SpectralTriple hdr = shade_pixel(sampler, ray, sun, g.samples[i], opt);
      const SpectralTriple ldr = tone_map(hdr, job.exposure);
      for (std::size_t c = 0; c < 3; ++c) {
        out.hdr[3 * i + c] = static_cast<float>(hdr[c]);
        out.display.pixels[3 * i + c] =
            static_cast<std::uint8_t>(std::lround(std::clamp(ldr[c], 0.0, 1.0) * 255.0));
      }
    }
  });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  if (image.pixels.size() != 3 * static_cast<std::size_t>(image.width) * image.height) {
    throw FormatError("write_ppm: pixel buffer does not match the image size");
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open '" + path.string() + "' for writing");
  f << "P6\n" << image.width << " " << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (!f) throw FormatError("short write to '" + path.string() + "'");
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path.string() + "'");
  const auto token = [&]() {
    std::string t;
    char c;
    while (f.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(f, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    return t;
  };
  if (token() != "P6") throw FormatError("'" + path.string() + "' is not a binary PPM (P6)");
  RgbImage img;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    if (std::stoi(token()) != 255) throw FormatError("only maxval 255 is supported");
  } catch (const std::invalid_argument&) {
    throw FormatError("'" + path.string() + "' has a malformed PPM header");
  }
  if (img.width <= 0 || img.height <= 0) throw FormatError("PPM has non-positive size");
  img.pixels.resize(3 * static_cast<std::size_t>(img.width) * img.height);
  f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw FormatError("'" + path.string() + "' is truncated");
  }
  return img;
}

void write_hdr(const std::filesystem::path& path, const RenderResult& result, std::uint64_t hash) {
  FloatFileHeader h;
  std::memcpy(h.magic.data(), "SKYI", 4);
  h.dims = {static_cast<std::uint32_t>(result.width), static_cast<std::uint32_t>(result.height),
            0, 0, 0, 0, 0, 0};
  h.hash = hash;
  const std::span<const float> grids[] = {result.hdr};
  write_float_file(path, h, grids);
}

}  // namespace skylut
