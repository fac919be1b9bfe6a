#pragma once

// CPU renderer: analytic planet G-buffer, then per pixel
//   camera advanced to the shell entry, ground or top as the ray end,
//   in-scatter S(x) - T(x,y) S(y), ground term T (c/pi)(E_sun + E_sky),
//   sun disc on unoccluded sky rays, exponential tone map, sRGB.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skylut/atmosphere.hpp"
#include "skylut/optics.hpp"
#include "skylut/tables.hpp"

namespace skylut {

inline constexpr double kSunAngularRadiusDeg = 0.2665;

struct Camera {
  Vec3 position = Vec3(0, 0, 6361e3);
  Vec3 right = Vec3::UnitX();
  Vec3 up = Vec3::UnitY();
  Vec3 forward = Vec3::UnitZ();
  double vertical_fov_deg = 60.0;

  static Camera look(const Vec3& position, const Vec3& forward, const Vec3& up_hint,
                     double vertical_fov_deg);
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // RGB, row-major, top row first
};

// Equirectangular albedo (longitude across, latitude down), linear values.
struct AlbedoMap {
  int width = 0;
  int height = 0;
  std::vector<SpectralTriple> texels;
  SpectralTriple sample(const Vec3& unit_normal) const;
  static AlbedoMap from_ppm(const RgbImage& image);
};

struct RenderJob {
  Camera camera;
  int width = 256;
  int height = 256;
  Vec3 sun_direction = Vec3::UnitZ();
  const AtmosphereModel* model = nullptr;
  const ScatteringTables* tables = nullptr;
  double exposure = 10.0;
  SpectralTriple ground_albedo = SpectralTriple::uniform(0.1);
  std::optional<AlbedoMap> ground_albedo_map;
  bool include_sun_disc = true;
  int mie_samples = 32;
  int threads = 0;

  void validate() const;
};

struct SurfaceSample {
  bool hit = false;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  SpectralTriple color;
  double depth = 0.0;  // +inf for sky
};

struct GBuffer {
  int width = 0;
  int height = 0;
  std::vector<SurfaceSample> samples;
};

Ray pixel_ray(const Camera& camera, int width, int height, int x, int y);

// Nearest planet hit in double precision. Rays leaving the surface upward
// from a ground observer do not hit.
SurfaceSample trace_planet(const ShellGeometry& geom, const Ray& ray, const SpectralTriple& albedo,
                           const AlbedoMap* map = nullptr);

GBuffer rasterize_planet(const RenderJob& job);

struct ShadeOptions {
  bool sun_disc = true;
  int mie_samples = 32;
  SpectralTriple background{};
  bool mie_share = false;  // fill ShadeTerms::mie_inscatter (a second path integral)
};

struct ShadeTerms {
  SpectralTriple inscatter;
  SpectralTriple mie_inscatter;  // Mie single-scatter share of `inscatter`, if asked for
  SpectralTriple ground;
  SpectralTriple sun;
  SpectralTriple total() const { return inscatter + ground + sun; }
};

ShadeTerms shade_terms(const TableSampler& sampler, const Ray& ray, const Vec3& sun,
                       const SurfaceSample& surface, const ShadeOptions& options);
SpectralTriple shade_pixel(const TableSampler& sampler, const Ray& ray, const Vec3& sun,
                           const SurfaceSample& surface, const ShadeOptions& options);

// Disc radiance scaled by `transmittance_to_space`; 1 inside the angular
// radius, smooth falloff to 0 at 1.1 radii.
SpectralTriple sun_disc_radiance(const Vec3& view, const Vec3& sun,
                                 const SpectralTriple& transmittance_to_space,
                                 const SpectralTriple& disc_radiance);
// Radiance of a uniform disc of the default angular radius delivering
// `irradiance` at normal incidence.
SpectralTriple disc_radiance_from_irradiance(const SpectralTriple& irradiance);

SpectralTriple tone_map_linear(const SpectralTriple& hdr, double exposure);
SpectralTriple tone_map(const SpectralTriple& hdr, double exposure);
double srgb_encode(double linear);
double srgb_decode(double encoded);

struct RenderResult {
  int width = 0;
  int height = 0;
  std::vector<float> hdr;  // 3 floats per pixel
  RgbImage display;
  double seconds = 0.0;
};

RenderResult render(const RenderJob& job);

void write_ppm(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_ppm(const std::filesystem::path& path);
void write_hdr(const std::filesystem::path& path, const RenderResult& result, std::uint64_t hash);

}  // namespace skylut
