#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "skylut/errors.hpp"
#include "skylut/optics.hpp"
#include "skylut/spectra.hpp"

using namespace skylut;
using doctest::Approx;

TEST_CASE("ray sphere intersection") {
  const double R = 6360e3;
  const auto hit = ray_sphere_intersect(Ray::make(Vec3(2 * R, 0, 0), Vec3(-1, 0, 0)), R);
  REQUIRE(hit.has_value());
  CHECK(hit->t_near == Approx(R).epsilon(1e-12));
  CHECK(hit->t_far == Approx(3 * R).epsilon(1e-12));
  CHECK_FALSE(ray_sphere_intersect(Ray::make(Vec3(2 * R, 0, 0), Vec3(1, 0, 0)), R, true));
  CHECK_FALSE(ray_sphere_intersect(Ray::make(Vec3(2 * R, 0, 0), Vec3(0, 1, 0)), R));
  const auto inside = ray_sphere_intersect(Ray::make(Vec3(0, 0, 0.5 * R), Vec3(0, 0, 1)), R, true);
  REQUIRE(inside.has_value());
  CHECK(inside->t_near == 0.0);
  CHECK(inside->t_far == Approx(0.5 * R).epsilon(1e-12));
  CHECK_THROWS_AS(Ray::make(Vec3(1, 0, 0), Vec3(0, 0, 0)), DomainError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vec3 o = Vec3(u(rng), u(rng), u(rng)) * 2e7;
    const Vec3 d = Vec3(u(rng), u(rng), u(rng));
    if (d.norm() < 1e-3) continue;
    const Ray ray = Ray::make(o, d);
    const oracle::LD ol[3] = {o.x(), o.y(), o.z()};
    const oracle::LD dl[3] = {ray.direction.x(), ray.direction.y(), ray.direction.z()};
    const auto want = oracle::sphere_roots(ol, dl, R);
    const auto got = ray_sphere_intersect(ray, R);
    REQUIRE(want.has_value() == got.has_value());
    if (!got) continue;
    const double scale = std::max(std::fabs(static_cast<double>(want->second)), R);
    CHECK(std::fabs(got->t_near - static_cast<double>(want->first)) / scale < 1e-6);
    CHECK(std::fabs(got->t_far - static_cast<double>(want->second)) / scale < 1e-6);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("optical depth") {
  const ShellGeometry g;
  const Vec3 a(0, 0, 6370e3);
  CHECK(optical_depth_of(g, a, a, [](double) { return SpectralTriple::uniform(1.0); }, 10) ==
        SpectralTriple{});
  const Vec3 b = a + Vec3(100e3, 0, 0);
  const SpectralTriple tau =
      optical_depth_of(g, a, b, [](double) { return SpectralTriple::uniform(1e-5); }, 50);
  CHECK(tau.g550 == Approx(1.0).epsilon(1e-12));
  CHECK(transmittance(tau).g550 == Approx(0.367879).epsilon(1e-6));

  // Vertical path through an exponential profile.
  const double beta0 = 2e-5, H = 8.0;
  const auto f = [&](double h) { return SpectralTriple::uniform(beta0 * std::exp(-h / H)); };
  const Vec3 ground(0, 0, g.planet_radius_m);
  const double top_km = 40.0;
  const Vec3 up = ground + Vec3(0, 0, top_km * 1000.0);
  const double analytic = H * 1000.0 * beta0 * (1.0 - std::exp(-top_km / H));
  CHECK(optical_depth_of(g, ground, up, f, 500).r680 == Approx(analytic).epsilon(1e-3));

  // Additivity over a split segment.
  const Vec3 p = ground + Vec3(30e3, 0, 5e3);
  const Vec3 q = ground + Vec3(80e3, 0, 20e3);
  const Vec3 m = 0.37 * p + 0.63 * q;
  const double whole = optical_depth_of(g, p, q, f, 1000).r680;
  const double parts = optical_depth_of(g, p, m, f, 1000).r680 + optical_depth_of(g, m, q, f, 1000).r680;
  CHECK(parts == Approx(whole).epsilon(1e-5));

  CHECK_THROWS_AS(optical_depth_of(g, Vec3(0, 0, 6300e3), a, f, 10), DomainError);
  CHECK_THROWS_AS(optical_depth_of(g, Vec3(-6361e3, 0, 0), Vec3(6361e3, 0, 0), f, 10), DomainError);
  CHECK_THROWS_AS(optical_depth_of(g, a, b, f, 1), DomainError);
}

TEST_CASE("transmittance") {
  CHECK(transmittance({}) == SpectralTriple::uniform(1.0));
  CHECK(transmittance(SpectralTriple::uniform(1.0)).b440 == Approx(0.367879).epsilon(1e-6));
  const SpectralTriple t1{0.3, 0.1, 2.0}, t2{0.5, 0.25, 0.125};
  const SpectralTriple lhs = transmittance(t1) * transmittance(t2);
  const SpectralTriple rhs = transmittance(t1 + t2);
  for (Band b : kBands) CHECK(lhs[b] == Approx(rhs[b]).epsilon(1e-15));
  CHECK_THROWS_AS(transmittance(SpectralTriple{-0.1, 0, 0}), DomainError);
}

TEST_CASE("pickering air mass") {
  CHECK(std::fabs(pickering_air_mass(0.0) - 1.0) < 1e-4);
  CHECK(std::fabs(pickering_air_mass(90.0) - 38.75) < 0.01);
  CHECK(pickering_air_mass(90.0) == Approx(38.7493987557803).epsilon(1e-12));
  CHECK(pickering_air_mass(60.0) == Approx(1.99315384641457).epsilon(1e-12));
  double prev = 0.0;
  for (int i = 0; i <= 900; ++i) {
    const double am = pickering_air_mass(i * 0.1);
    CHECK(am > prev);
    CHECK(am >= 1.0);
    CHECK(am <= 38.76);
    if (i <= 600) CHECK(std::fabs(am * std::cos(i * 0.1 * kPi / 180.0) - 1.0) < 0.01);
    prev = am;
  }
  CHECK_THROWS_AS(pickering_air_mass(-0.1), DomainError);
  CHECK_THROWS_AS(pickering_air_mass(90.1), DomainError);
}

TEST_CASE("curved path length") {
  const ShellGeometry g;
  CHECK(curved_path_length(g, 0.0) == Approx(60e3).epsilon(1e-4));
  CHECK(curved_path_length(g, 90.0) == Approx(38.7494 * 60e3).epsilon(1e-5));
  for (double t = 0.0; t < 90.0; t += 1.0) {
    CHECK(curved_path_length(g, t + 1.0) > curved_path_length(g, t));
  }
  CHECK(curved_path_stretch(g, 0.0) == Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(curved_path_length(g, 91.0), DomainError);
}

TEST_CASE("shell geometry") {
  ShellGeometry bad;
  bad.atmosphere_radius_m = bad.planet_radius_m;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  ShellGeometry neg;
  neg.planet_radius_m = -1.0;
  CHECK_THROWS_AS(neg.validate(), DomainError);
  CHECK_NOTHROW(ShellGeometry{}.validate());
}
