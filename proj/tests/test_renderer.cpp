#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "brute_force.hpp"
#include "oracles.hpp"
#include "skylut/config.hpp"
#include "skylut/errors.hpp"
#include "skylut/precompute.hpp"
#include "skylut/renderer.hpp"
#include "skylut/validation.hpp"

using namespace skylut;
using doctest::Approx;

namespace {

constexpr double kDeg = kPi / 180.0;

AtmosphereModel vacuum() {
  AtmosphereModel m;
  m.name = "vacuum";
  m.rayleigh.precomputed_beta_scat = SpectralTriple{};
  m.mie.precomputed_beta_scat = SpectralTriple{};
  m.mie.precomputed_beta_ext = SpectralTriple{};
  return m;
}

PrecomputeOptions dims(int r, int mu, int mu_s, int nu, int orders) {
  PrecomputeOptions o;
  o.dims.r = r;
  o.dims.mu = mu;
  o.dims.mu_s = mu_s;
  o.dims.nu = nu;
  o.orders = orders;
  return o;
}

struct Built {
  AtmosphereModel model;
  ScatteringTables tables;
};

const Built& vacuum_tables() {
  static const Built b = [] {
    Built x{vacuum(), {}};
    x.tables = build_tables(x.model, dims(4, 8, 4, 2, 2));
    return x;
  }();
  return b;
}

// Single scattering only, straight paths: comparable with the oracle.
const Built& earth_order1() {
  static const Built b = [] {
    Built x{load_preset("earth_advanced"), {}};
    x.model.curved_paths = false;
    x.tables = build_tables(x.model, dims(32, 128, 32, 8, 1));
    return x;
  }();
  return b;
}

const Built& earth_multi() {
  static const Built b = [] {
    Built x{load_preset("earth_advanced"), {}};
    x.tables = build_tables(x.model, dims(16, 64, 16, 8, 3));
    return x;
  }();
  return b;
}

const Built& mars_multi() {
  static const Built b = [] {
    Built x{load_preset("mars_advanced"), {}};
    x.tables = build_tables(x.model, dims(16, 64, 16, 8, 3));
    return x;
  }();
  return b;
}

Vec3 sun_at(double elevation_deg, double azimuth_deg = 0.0) {
  const double e = elevation_deg * kDeg, a = azimuth_deg * kDeg;
  return Vec3(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
}

double blue_over_red(const SpectralTriple& c) { return c.b440 / c.r680; }

}  // namespace

TEST_CASE("tone map") {
  CHECK(tone_map_linear(SpectralTriple{}, 1.0).max_component() == 0.0);
  CHECK(tone_map_linear(SpectralTriple::uniform(1.0), 1.0).g550 == Approx(0.632121).epsilon(1e-6));
  CHECK(tone_map_linear(SpectralTriple::uniform(1e6), 1.0).r680 == 1.0);
  CHECK(tone_map(SpectralTriple::uniform(1e6), 3.0).b440 == Approx(1.0));
  double prev = -1.0;
  for (double h = 0.0; h < 5.0; h += 0.01) {
    const double v = tone_map(SpectralTriple::uniform(h), 2.0).g550;
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(tone_map(SpectralTriple{}, 0.0), DomainError);
  for (double c = 0.0; c <= 1.0; c += 0.05) CHECK(srgb_decode(srgb_encode(c)) == Approx(c));
}

TEST_CASE("sun disc") {
  const Vec3 sun = Vec3::UnitZ();
  const SpectralTriple l = disc_radiance_from_irradiance(SpectralTriple::uniform(1.0));
  const double alpha = kSunAngularRadiusDeg * kDeg;
  CHECK(l.g550 == Approx(1.0 / (kPi * alpha * alpha)));
  const SpectralTriple one = SpectralTriple::uniform(1.0);
  CHECK(sun_disc_radiance(Vec3::UnitX(), sun, one, l).max_component() == 0.0);
  CHECK(sun_disc_radiance(sun, sun, one, l).g550 == Approx(l.g550));
  CHECK(sun_disc_radiance(Vec3(std::sin(1.2 * alpha), 0, std::cos(1.2 * alpha)), sun, one, l)
            .max_component() == 0.0);
  const double edge = sun_disc_radiance(Vec3(std::sin(1.05 * alpha), 0, std::cos(1.05 * alpha)),
                                        sun, one, l).g550;
  CHECK(edge > 0.0);
  CHECK(edge < l.g550);

  // Through the full horizontal column the disc reddens.
  const Built& e = earth_multi();
  const TableSampler s(e.tables, e.model);
  const double rg = e.model.geometry.planet_radius_m;
  const SpectralTriple t = s.transmittance_to_top(rg, 0.01);
  const SpectralTriple low = sun_disc_radiance(sun, sun, t, l);
  CHECK(low.r680 / low.b440 > l.r680 / l.b440);
}

TEST_CASE("planet hits against the quadratic oracle") {
  const ShellGeometry g = load_preset("earth_advanced").geometry;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), alt(1.0, 2.0e6);
  int hits = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vec3 dir_o = Vec3(u(rng), u(rng), u(rng)).normalized();
    const Vec3 o = dir_o * (g.planet_radius_m + alt(rng));
    const Vec3 d = (-dir_o + 0.4 * Vec3(u(rng), u(rng), u(rng))).normalized();
    const SurfaceSample s = trace_planet(g, Ray{o, d}, SpectralTriple::uniform(0.2));
    const oracle::LD lo[3] = {o.x(), o.y(), o.z()}, ld[3] = {d.x(), d.y(), d.z()};
    const auto roots = oracle::sphere_roots(lo, ld, g.planet_radius_m);
    const bool want = roots && roots->first > 0;
    CHECK(s.hit == want);
    if (!s.hit || !want) continue;
    ++hits;
    const oracle::LD t = roots->first;
    oracle::LD err2 = 0;
    for (int k = 0; k < 3; ++k) {
      const oracle::LD diff = s.position[k] - (lo[k] + t * ld[k]);
      err2 += diff * diff;
    }
    CHECK(static_cast<double>(std::sqrt(err2)) < 1e-3);
    CHECK(s.normal.dot(d) < 0.0);
  }
  CHECK(hits > 500);
}

TEST_CASE("geometry pass") {
  const Built& v = vacuum_tables();
  const double rg = v.model.geometry.planet_radius_m;
  RenderJob job;
  job.model = &v.model;
  job.tables = &v.tables;
  job.width = job.height = 16;
  const Vec3 pos(0, 0, rg + 100.0);

  job.camera = Camera::look(pos, Vec3::UnitZ(), Vec3::UnitY(), 60.0);
  for (const auto& s : rasterize_planet(job).samples) {
    CHECK_FALSE(s.hit);
    CHECK(std::isinf(s.depth));
  }
  job.camera = Camera::look(pos, -Vec3::UnitZ(), Vec3::UnitY(), 60.0);
  const GBuffer g = rasterize_planet(job);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const SurfaceSample& s = g.samples[y * 16 + x];
      REQUIRE(s.hit);
      const Ray ray = pixel_ray(job.camera, 16, 16, x, y);
      CHECK(s.normal.dot(-ray.direction) > std::cos(45.0 * kDeg));
      CHECK(s.normal.dot(Vec3::UnitZ()) == Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("zero atmosphere render is albedo times cosine") {
  const Built& v = vacuum_tables();
  const double rg = v.model.geometry.planet_radius_m;
  RenderJob job;
  job.model = &v.model;
  job.tables = &v.tables;
  job.width = job.height = 16;
  job.camera = Camera::look(Vec3(0, 0, rg + 4.0e6), -Vec3::UnitZ(), Vec3::UnitY(), 90.0);
  job.sun_direction = sun_at(40.0);
  job.ground_albedo = SpectralTriple(0.3, 0.2, 0.1);
  const RenderResult r = render(job);
  const GBuffer g = rasterize_planet(job);
  for (int i = 0; i < 256; ++i) {
    const SurfaceSample& s = g.samples[i];
    for (int c = 0; c < 3; ++c) {
      const double want = s.hit ? job.ground_albedo[c] / kPi * std::max(0.0, s.normal.dot(job.sun_direction)) : 0.0;
      CHECK(r.hdr[3 * i + c] == Approx(want).epsilon(1e-5));
    }
  }
}

TEST_CASE("shading branches") {
  const Built& e = earth_multi();
  const TableSampler s(e.tables, e.model);
  const double rg = e.model.geometry.planet_radius_m;
  const double rt = e.model.geometry.atmosphere_radius_m;
  ShadeOptions opt;
  opt.background = SpectralTriple(0.25, 0.5, 0.75);

  // Outside the shell and missing it: the background passes through.
  const Ray miss{Vec3(0, 0, rt + 1e5), Vec3::UnitX()};
  const SurfaceSample none = trace_planet(e.model.geometry, miss, SpectralTriple::uniform(0.1));
  const SpectralTriple bg = shade_pixel(s, miss, sun_at(30), none, opt);
  CHECK(bg.r680 == 0.25);
  CHECK(bg.b440 == 0.75);

  // Night-side ground point: in-scatter only.
  const Vec3 night_sun(0, 0, -1);
  const Ray down{Vec3(0, 0, rg + 5000.0), -Vec3::UnitZ()};
  const SurfaceSample ground = trace_planet(e.model.geometry, down, SpectralTriple::uniform(0.3));
  REQUIRE(ground.hit);
  const ShadeTerms t = shade_terms(s, down, night_sun, ground, opt);
  CHECK(t.ground.max_component() == 0.0);
  CHECK(t.sun.max_component() == 0.0);
  CHECK(t.total().b440 == t.inscatter.b440);
}

TEST_CASE("zenith pixel matches the sky scan") {
  const Built& e = earth_multi();
  const TableSampler s(e.tables, e.model);
  const double rg = e.model.geometry.planet_radius_m;
  ScanOptions so;
  so.step_deg = 15.0;
  const ValidationCurve curve = model_sky_scan(s, 60.0, so);
  REQUIRE(!curve.samples.empty());

  const Vec3 sun = sun_at(60.0);
  const Vec3 x(0, 0, rg);
  ShadeOptions opt;
  opt.sun_disc = false;
  const auto luminance_at = [&](double z_deg) {
    const Vec3 v(std::sin(z_deg * kDeg), 0, std::cos(z_deg * kDeg));
    const Ray ray{x, v};
    return so.weights.luminance(
        shade_pixel(s, ray, sun, trace_planet(e.model.geometry, ray, e.model.ground_albedo), opt));
  };
  const double lz = luminance_at(0.0);
  CHECK(lz > 0.0);
  int checked = 0;
  for (const auto& smp : curve.samples) {
    if (std::fabs(smp.view_zenith_deg) > 80.0) continue;
    CHECK(smp.model == Approx(luminance_at(smp.view_zenith_deg) / lz).epsilon(1e-6));
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("aerial perspective against the brute-force integral") {
  const Built& e = earth_order1();
  const TableSampler s(e.tables, e.model);
  const ShellGeometry& g = e.model.geometry;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> alt(500.0, 20000.0), mu(-1.0, -0.25), mu_s(0.15, 1.0),
      az(0.0, 2 * kPi);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Vec3 x(0, 0, g.planet_radius_m + alt(rng));
    const double m = mu(rng);
    const Vec3 v(std::sqrt(1 - m * m), 0, m);
    const double ms = mu_s(rng), a = az(rng);
    const Vec3 sun(std::sqrt(1 - ms * ms) * std::cos(a), std::sqrt(1 - ms * ms) * std::sin(a), ms);
    const Ray ray{x, v};
    const SurfaceSample y = trace_planet(g, ray, e.model.ground_albedo);
    REQUIRE(y.hit);
    // Stop short of the ground so the table path runs through the difference identity.
    const double d = 0.6 * y.depth;
    BruteForceOptions bo;
    bo.max_distance = d;
    const SpectralTriple want = brute_force_single_scatter(e.model, x, v, sun, bo);
    const SpectralTriple got = s.inscatter(x.norm(), m, ms, v.dot(sun), d, 64);
    for (Band band : kBands) {
      const double rel = std::fabs(got[band] - want[band]) / want[band];
      worst = std::max(worst, rel);
      CHECK(rel < 0.03);
    }
  }
  MESSAGE("worst aerial perspective error " << worst);
}

TEST_CASE("renders are non-negative and deterministic") {
  const Built& e = earth_multi();
  const double rg = e.model.geometry.planet_radius_m;
  RenderJob job;
  job.model = &e.model;
  job.tables = &e.tables;
  job.width = job.height = 24;
  job.camera = Camera::look(Vec3(0, 0, rg + 2.0), Vec3(1, 0, 0.05), Vec3::UnitZ(), 80.0);
  for (double elev : {-8.0, -2.0, 0.5, 10.0, 45.0, 89.0}) {
    job.sun_direction = sun_at(elev, 10.0);
    job.threads = 1;
    const RenderResult a = render(job);
    job.threads = 3;
    const RenderResult b = render(job);
    CHECK(a.hdr == b.hdr);
    CHECK(a.display.pixels == b.display.pixels);
    bool ok = true;
    for (float f : a.hdr) ok = ok && std::isfinite(f) && f >= 0.0f;
    CHECK(ok);
  }
}

TEST_CASE("from orbit the limb is bluer than the nadir") {
  const Built& e = earth_multi();
  const TableSampler s(e.tables, e.model);
  const ShellGeometry& g = e.model.geometry;
  const Vec3 x(0, 0, g.planet_radius_m + 400e3);
  const Vec3 sun = sun_at(50.0);
  ShadeOptions opt;
  const auto shade = [&](const Vec3& dir) {
    const Ray ray{x, dir.normalized()};
    return shade_pixel(s, ray, sun, trace_planet(g, ray, e.model.ground_albedo), opt);
  };
  const double dip = std::acos(g.planet_radius_m / x.norm());
  const SpectralTriple nadir = shade(-Vec3::UnitZ());
  // Ground just inside the limb and the sky just above it.
  for (double off : {-1.0, -0.3, 0.3, 1.0}) {
    const double e = -dip + off * kDeg;
    const SpectralTriple horizon = shade(Vec3(std::cos(e), 0, std::sin(e)));
    INFO(off);
    CHECK(blue_over_red(horizon) > blue_over_red(nadir));
  }
}

TEST_CASE("mars sunset glows blue around the sun") {
  const Built& mars = mars_multi();
  const TableSampler s(mars.tables, mars.model);
  const ShellGeometry& g = mars.model.geometry;
  const Vec3 x(0, 0, g.planet_radius_m + 2.0);
  const Vec3 sun = sun_at(3.0);
  ShadeOptions opt;
  opt.sun_disc = false;
  const auto at = [&](double az_deg) {
    const Vec3 dir = sun_at(3.0, az_deg);
    const Ray ray{x, dir};
    return shade_pixel(s, ray, sun, trace_planet(g, ray, mars.model.ground_albedo), opt);
  };
  CHECK(blue_over_red(at(4.0)) > blue_over_red(at(90.0)));
}

TEST_CASE("ppm round trip and format errors") {
  RgbImage img;
  img.width = 3;
  img.height = 2;
  img.pixels = {0, 1, 2, 3, 4, 5, 250, 251, 252, 253, 254, 255, 9, 8, 7, 6, 5, 4};
  const auto path = std::filesystem::temp_directory_path() / "skylut_test.ppm";
  write_ppm(path, img);
  const RgbImage back = read_ppm(path);
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.pixels == img.pixels);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 2);
  CHECK_THROWS_AS(read_ppm(path), FormatError);
  std::filesystem::remove(path);
}
