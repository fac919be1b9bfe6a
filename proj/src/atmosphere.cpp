#include "skylut/atmosphere.hpp"

#include <bit>
#include <cstring>
#include <variant>

#include "skylut/errors.hpp"

namespace skylut {
namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void f64(double v) {
    if (v == 0.0) v = 0.0;  // fold -0
    const auto bits = std::bit_cast<std::uint64_t>(v);
    bytes(&bits, sizeof bits);
  }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void triple(const SpectralTriple& t) {
    f64(t.r680);
    f64(t.g550);
    f64(t.b440);
  }
  void opt(const std::optional<SpectralTriple>& t) {
    i64(t.has_value());
    if (t) triple(*t);
  }
  void str(const std::string& s) {
    i64(static_cast<std::int64_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

double unit_scale(CoefficientUnit unit) {
  return unit == CoefficientUnit::kPerKilometre ? 1e-3 : 1.0;
}

bool AtmosphereModel::advanced_mode() const {
  return !rayleigh.precomputed_beta_scat || !mie.precomputed_beta_scat ||
         !mie.precomputed_beta_ext;
}

void AtmosphereModel::validate() const {
  geometry.validate();
  rayleigh.validate();
  mie.validate();
  for (const auto& a : absorbers) a.validate();
  if (!(ground_albedo.min_component() >= 0.0 && ground_albedo.max_component() <= 1.0)) {
    throw DomainError("ground albedo must lie in [0, 1]");
  }
  if (!(sun_irradiance.is_finite() && sun_irradiance.min_component() >= 0.0)) {
    throw DomainError("sun irradiance must be finite and >= 0");
  }
  if (scattering_orders < 1) throw DomainError("scattering orders must be >= 1");
  if (!(temperature_k > 0.0)) throw DomainError("temperature must be > 0 K");
}

std::uint64_t model_hash(const AtmosphereModel& m) {
  Fnv1a h;
  h.f64(m.geometry.planet_radius_m);
  h.f64(m.geometry.atmosphere_radius_m);
  const auto& r = m.rayleigh;
  h.f64(r.scale_height_km);
  h.f64(r.molecular_density);
  h.triple(r.refractive_index);
  h.f64(r.depolarization);
  h.opt(r.precomputed_beta_scat);
  h.f64(r.absorber_radius_m);
  h.triple(r.refractive_index_imag);
  h.i64(static_cast<int>(m.rayleigh_phase));
  const auto& mie = m.mie;
  h.f64(mie.scale_height_km);
  h.f64(mie.turbidity);
  h.f64(mie.junge_exponent);
  h.triple(mie.fudge_k);
  h.triple(mie.g1);
  h.triple(mie.g2);
  h.triple(mie.alpha);
  h.f64(mie.mean_radius_m);
  h.f64(mie.particle_density);
  h.triple(mie.refractive_index);
  h.triple(mie.refractive_index_imag);
  h.opt(mie.precomputed_beta_scat);
  h.opt(mie.precomputed_beta_ext);
  h.i64(static_cast<int>(mie.dhg_form));
  h.i64(static_cast<std::int64_t>(m.absorbers.size()));
  for (const auto& a : m.absorbers) {
    h.str(a.name);
    h.triple(a.cross_section);
    if (const auto* p = std::get_if<HydrostaticProfile>(&a.profile)) {
      h.i64(0);
      h.f64(p->n0);
      h.f64(p->fraction);
      h.f64(p->scale_height_km);
    } else {
      const auto& s = std::get<SplineProfile>(a.profile);
      h.i64(1);
      for (double x : s.altitudes_km()) h.f64(x);
      for (double y : s.densities()) h.f64(y);
    }
  }
  h.triple(m.ground_albedo);
  h.triple(m.sun_irradiance);
  h.i64(m.curved_paths);
  h.f64(m.temperature_k);
  h.i64(static_cast<int>(m.coefficient_unit));
  return h.value();
}

Medium::Medium(const AtmosphereModel& m)
    : inv_h_r_(1.0 / m.rayleigh.scale_height_km), inv_h_m_(1.0 / m.mie.scale_height_km) {
  const double s = unit_scale(m.coefficient_unit);
  rayleigh_scat0_ = per_band([&](Band b) { return rayleigh_scatter_coeff(m.rayleigh, 0.0, b); }) * s;
  rayleigh_abs0_ =
      per_band([&](Band b) { return rayleigh_absorption_coeff(m.rayleigh, 0.0, b); }) * s;
  mie_scat0_ = per_band([&](Band b) { return mie_scatter_coeff(m.mie, 0.0, b); }) * s;
  mie_ext0_ = per_band([&](Band b) { return mie_extinction_coeff(m.mie, 0.0, b); }) * s;
  for (const auto& a : m.absorbers) absorbers_.push_back({a.cross_section * s, a.profile});
}

bool Medium::empty() const {
  double total = (rayleigh_scat0_ + rayleigh_abs0_ + mie_scat0_ + mie_ext0_).max_component();
  for (const auto& a : absorbers_) total += a.sigma.max_component();
  return total == 0.0;
}

MediumSample Medium::at(double altitude_km) const {
  const double fr = std::exp(-altitude_km * inv_h_r_);
  const double fm = std::exp(-altitude_km * inv_h_m_);
  MediumSample out;
  out.rayleigh_scattering = rayleigh_scat0_ * fr;
  out.mie_scattering = mie_scat0_ * fm;
  out.extinction = (rayleigh_scat0_ + rayleigh_abs0_) * fr + mie_ext0_ * fm;
  for (const auto& a : absorbers_) out.extinction += a.sigma * evaluate_profile(a.profile, altitude_km);
  return out;
}

SpectralTriple Medium::extinction(double altitude_km) const { return at(altitude_km).extinction; }

}  // namespace skylut
