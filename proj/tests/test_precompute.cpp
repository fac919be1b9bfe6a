#include <doctest.h>

#include <cmath>
#include <random>

#include "brute_force.hpp"
#include "skylut/config.hpp"
#include "skylut/errors.hpp"
#include "skylut/precompute.hpp"
#include "skylut/validation.hpp"

using namespace skylut;
using doctest::Approx;

namespace {

AtmosphereModel zero_model() {
  AtmosphereModel m;
  m.name = "vacuum";
  m.rayleigh.precomputed_beta_scat = SpectralTriple{};
  m.mie.precomputed_beta_scat = SpectralTriple{};
  m.mie.precomputed_beta_ext = SpectralTriple{};
  m.ground_albedo = SpectralTriple{};
  return m;
}

AtmosphereModel straight_earth() {
  AtmosphereModel m = load_preset("earth_advanced");
  m.curved_paths = false;
  return m;
}

PrecomputeOptions coarse(int orders) {
  PrecomputeOptions o;
  o.dims.r = 8;
  o.dims.mu = 16;
  o.dims.mu_s = 8;
  o.dims.nu = 4;
  o.orders = orders;
  return o;
}

bool all_finite_nonneg(const std::vector<float>& v) {
  for (float x : v) {
    if (!std::isfinite(x) || x < 0.0f) return false;
  }
  return true;
}

bool is_horizon_row(int imu, const TableDims& d) { return imu == 0 || imu == d.mu - 1; }

double max_abs(const std::vector<float>& v) {
  double m = 0.0;
  for (float x : v) m = std::max(m, static_cast<double>(std::fabs(x)));
  return m;
}

}  // namespace

TEST_CASE("zero atmosphere builds trivial tables") {
  const AtmosphereModel m = zero_model();
  TableBuilder b(m, coarse(3));
  b.build_transmittance();
  for (float t : b.tables().transmittance) CHECK(t == 1.0f);
  b.build_order1();
  CHECK(max_abs(b.tables().inscatter) == 0.0);
  CHECK(max_abs(b.single_mie()) == 0.0);
  b.iterate_order(2);
  CHECK(max_abs(b.last_delta_inscatter()) == 0.0);
  CHECK(max_abs(b.tables().irradiance) == 0.0);
}

TEST_CASE("transmittance table") {
  const AtmosphereModel m = straight_earth();
  TableBuilder b(m, coarse(1));
  b.build_transmittance();
  const auto& t = b.tables();
  CHECK(all_finite_nonneg(t.transmittance));
  for (float x : t.transmittance) CHECK(x <= 1.0f);

  // Vertical entry from the ground against the closed-form column depth,
  // absorbers included by direct quadrature of their profiles.
  const TableSampler s(t, m);
  const Medium medium(m);
  const ShellGeometry& g = m.geometry;
  SpectralTriple tau{};
  const int n = 20000;
  const double h_top = g.thickness_m() / 1000.0;
  for (int i = 0; i <= n; ++i) {
    const double h = h_top * i / n;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    tau += medium.extinction(h) * (w * g.thickness_m() / n);
  }
  const SpectralTriple got = s.transmittance_to_top(g.planet_radius_m, 1.0);
  for (Band band : kBands) CHECK(got[band] == Approx(std::exp(-tau[band])).epsilon(5e-3));

  // Monotone as mu falls toward the horizon at fixed r.
  const TableDims& d = t.dims;
  for (int y = 0; y < d.transmittance_h; ++y) {
    for (int x = 1; x < d.transmittance_w; ++x) {
      for (int c = 0; c < 3; ++c) {
        // x grows with distance to the top, i.e. as mu decreases.
        CHECK(t.transmittance[3 * (y * d.transmittance_w + x) + c] <=
              t.transmittance[3 * (y * d.transmittance_w + x - 1) + c] + 1e-7f);
      }
    }
  }
}

TEST_CASE("order 1 properties") {
  AtmosphereModel m = straight_earth();
  TableBuilder b(m, coarse(1));
  b.build_transmittance();
  b.build_order1();
  const auto& t = b.tables();
  CHECK(all_finite_nonneg(t.inscatter));
  CHECK(all_finite_nonneg(b.single_mie()));
  CHECK(max_abs(b.single_mie()) > 0.0);

  // Sun at the nadir: only paths high above the limb see light.
  const TableSampler s(t, m);
  const double lit = s.inscatter_raw(m.geometry.planet_radius_m, 1.0, 1.0, 1.0).b440;
  const double dark = s.inscatter_raw(m.geometry.planet_radius_m, 1.0, -1.0, -1.0).b440;
  CHECK(dark < 1e-3 * lit);

  AtmosphereModel no_mie = m;
  no_mie.mie.precomputed_beta_scat = SpectralTriple{};
  no_mie.mie.precomputed_beta_ext = SpectralTriple{};
  TableBuilder b2(no_mie, coarse(1));
  b2.build_transmittance();
  b2.build_order1();
  CHECK(max_abs(b2.single_mie()) == 0.0);
}

TEST_CASE("order 1 matches the brute-force single scatter at texel nodes") {
  AtmosphereModel m = straight_earth();
  PrecomputeOptions o = coarse(1);
  o.dims.r = 16;
  o.dims.mu = 32;
  o.dims.mu_s = 16;
  o.dims.nu = 8;
  const ScatteringTables t = build_tables(m, o);
  const TableSampler s(t, m);
  const TableDims& d = t.dims;
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> ir(1, d.r - 1), imu(0, d.mu - 1), ims(0, d.mu_s - 1),
      inu(0, d.nu - 1);
  int probes = 0;
  while (probes < 20) {
    const int imu_last = imu(rng);
    const LutCoords c = unmap_inscatter({static_cast<double>(ir(rng)), static_cast<double>(imu_last),
                                         static_cast<double>(ims(rng)), static_cast<double>(inu(rng))},
                                        d, m.geometry);
    double lo, hi;
    nu_bounds(c.mu, c.mu_s, &lo, &hi);
    // Exactly tangent rows are ill-posed for a straight-path oracle.
    if (c.mu_s < 0.05 || c.nu < lo || c.nu > hi || is_horizon_row(imu_last, d)) continue;
    // Rebuild directions in a frame with x along +z.
    const Vec3 x(0, 0, c.r);
    const Vec3 v(std::sqrt(std::max(0.0, 1 - c.mu * c.mu)), 0, c.mu);
    const double sx = (c.nu - c.mu * c.mu_s) / std::max(1e-12, std::sqrt(1 - c.mu * c.mu));
    const double sy = std::sqrt(std::max(0.0, 1 - c.mu_s * c.mu_s - sx * sx));
    const Vec3 sun(sx, sy, c.mu_s);
    BruteForceOptions bo;
    bo.path_samples = 500;
    bo.sun_samples = 500;
    const SpectralTriple want = brute_force_single_scatter(m, x, v, sun.normalized(), bo);
    const SpectralTriple got = s.inscatter(c.r, c.mu, c.mu_s, v.dot(sun.normalized()), -1.0, 64);
    for (Band band : kBands) {
      CHECK(std::fabs(got[band] - want[band]) <= 0.02 * want[band] + 1e-9);
    }
    ++probes;
  }
}

TEST_CASE("scattering orders decay and accumulate") {
  const AtmosphereModel m = straight_earth();
  TableBuilder b(m, coarse(4));
  b.build_transmittance();
  b.build_order1();
  std::vector<float> prev = b.tables().inscatter;
  for (int k = 2; k <= 4; ++k) {
    b.iterate_order(k);
    const auto& cur = b.tables().inscatter;
    CHECK(all_finite_nonneg(cur));
    CHECK(all_finite_nonneg(b.tables().irradiance));
    bool monotone = true;
    for (std::size_t i = 0; i < cur.size(); ++i) monotone = monotone && cur[i] >= prev[i];
    CHECK(monotone);
    prev = cur;
  }
  const auto& st = b.stats();
  REQUIRE(st.size() == 4);
  for (std::size_t i = 1; i < st.size(); ++i) CHECK(st[i].delta_norm < st[i - 1].delta_norm);
  CHECK_THROWS_AS(b.iterate_order(6), DomainError);
}

TEST_CASE("two orders match the brute-force double scatter") {
  // At 8x16x8x4 rows near the horizon miss by up to 10% from mu
  // interpolation, so every axis is doubled, and the gathering sphere too.
  const AtmosphereModel m = straight_earth();
  PrecomputeOptions o = coarse(2);
  o.dims.r *= 2;
  o.dims.mu *= 2;
  o.dims.mu_s *= 2;
  o.dims.nu *= 2;
  o.sphere_zenith = 32;
  o.sphere_azimuth = 64;
  const ScatteringTables t = build_tables(m, o);
  const TableSampler s(t, m);
  const TableDims& d = t.dims;
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> ir(0, d.r - 1), imu(0, d.mu - 1), ims(0, d.mu_s - 1),
      inu(0, d.nu - 1);
  int probes = 0;
  double worst = 0.0;
  while (probes < 16) {
    const int imu_last = imu(rng);
    const LutCoords c = unmap_inscatter({static_cast<double>(ir(rng)), static_cast<double>(imu_last),
                                         static_cast<double>(ims(rng)), static_cast<double>(inu(rng))},
                                        d, m.geometry);
    double lo, hi;
    nu_bounds(c.mu, c.mu_s, &lo, &hi);
    if (c.mu_s < 0.1 || c.nu < lo || c.nu > hi || is_horizon_row(imu_last, d)) continue;
    if (c.r < m.geometry.planet_radius_m + 1.0 && c.mu < 0.0) continue;
    const Vec3 x(0, 0, c.r);
    const Vec3 v(std::sqrt(std::max(0.0, 1 - c.mu * c.mu)), 0, c.mu);
    const double sx = (c.nu - c.mu * c.mu_s) / std::max(1e-12, std::sqrt(1 - c.mu * c.mu));
    const double sy = std::sqrt(std::max(0.0, 1 - c.mu_s * c.mu_s - sx * sx));
    const Vec3 sun = Vec3(sx, sy, c.mu_s).normalized();
    BruteForceOptions bo;
    bo.path_samples = 400;
    bo.sun_samples = 200;
    const SpectralTriple want =
        brute_force_single_scatter(m, x, v, sun, bo) + oracle::double_scatter(m, x, v, sun);
    const SpectralTriple got = s.inscatter(c.r, c.mu, c.mu_s, v.dot(sun), -1.0, 64);
    for (Band band : kBands) {
      const double rel = std::fabs(got[band] - want[band]) / want[band];
      worst = std::max(worst, rel);
      INFO("imu " << imu_last << " r " << c.r << " mu " << c.mu << " mu_s " << c.mu_s << " nu " << c.nu << " got " << got[band]
                << " want " << want[band]);
      CHECK(rel < 0.05);
    }
    ++probes;
  }
  MESSAGE("worst relative error over 16 probes: " << worst);
}

TEST_CASE("build is deterministic") {
  const AtmosphereModel m = straight_earth();
  PrecomputeOptions o = coarse(2);
  o.threads = 1;
  const ScatteringTables a = build_tables(m, o);
  o.threads = 3;
  const ScatteringTables b = build_tables(m, o);
  CHECK(a.transmittance == b.transmittance);
  CHECK(a.irradiance == b.irradiance);
  CHECK(a.inscatter == b.inscatter);
  CHECK(a.model_hash == model_hash(m));
}

TEST_CASE("precompute rejects bad options") {
  PrecomputeOptions o = coarse(0);
  CHECK_THROWS_AS(TableBuilder(straight_earth(), o), DomainError);
  o = coarse(2);
  TableBuilder b(straight_earth(), o);
  b.build_order1();
  CHECK_THROWS_AS(b.build_order1(), DomainError);
  CHECK_THROWS_AS(b.iterate_order(3), DomainError);
}
