#include "skylut/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "skylut/errors.hpp"

namespace skylut {
namespace {

constexpr double kGasConstant = 8.314462618;      // J / (mol K)
constexpr double kAvogadro = 6.02214076e23;       // 1 / mol
constexpr double kFourPi = 4.0 * kPi;

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

bool in_range(const SpectralTriple& t, double lo, double hi) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(t[i] >= lo && t[i] <= hi)) return false;
  }
  return true;
}

double hydrostatic(double altitude_km, double scale_height_km) {
  return std::exp(-altitude_km / scale_height_km);
}

}  // namespace

double RayleighParams::scale_height_from_gas(double temperature_k, double molar_mass_kg,
                                             double gravity_m_s2) {
  require(temperature_k > 0 && molar_mass_kg > 0 && gravity_m_s2 > 0,
          "scale height needs positive temperature, molar mass and gravity");
  return kGasConstant * temperature_k / (molar_mass_kg * gravity_m_s2) / 1000.0;
}

double RayleighParams::density_from_mass(double mass_density_kg_m3, double molar_mass_kg) {
  require(mass_density_kg_m3 > 0 && molar_mass_kg > 0,
          "number density needs positive mass density and molar mass");
  return kAvogadro * mass_density_kg_m3 / molar_mass_kg;
}

void RayleighParams::validate() const {
  require(scale_height_km > 0, "rayleigh scale height must be > 0");
  require(absorber_radius_m >= 0, "rayleigh absorber radius must be >= 0");
  require(in_range(refractive_index_imag, 0.0, 1e9),
          "rayleigh imaginary refractive index must be >= 0");
  if (precomputed_beta_scat) {
    require(precomputed_beta_scat->is_finite() && precomputed_beta_scat->min_component() >= 0,
            "rayleigh beta_scat must be finite and >= 0");
  } else {
    require(molecular_density > 0, "rayleigh molecular density must be > 0");
    require(refractive_index.min_component() > 1.0,
            "rayleigh refractive index must be > 1 for gases");
  }
  require(depolarization >= 0 && depolarization < 0.5,
          "depolarization factor must lie in [0, 0.5)");
}

void MieParams::validate() const {
  require(scale_height_km > 0, "mie scale height must be > 0");
  require(in_range(g1, -1.0, 1.0) && in_range(g2, -1.0, 1.0), "mie g must lie in [-1, 1]");
  require(in_range(alpha, 0.0, 1.0), "mie alpha must lie in [0, 1]");
  if (!precomputed_beta_scat) {
    require(turbidity >= 2.0 && turbidity <= 10.0, "turbidity must lie in [2, 10]");
    require(junge_exponent >= 2.0 && junge_exponent <= 6.0,
            "junge exponent must lie in [2, 6]");
    require(in_range(fudge_k, 0.0, 1e9), "mie K must be >= 0");
  } else {
    require(precomputed_beta_scat->is_finite() && precomputed_beta_scat->min_component() >= 0,
            "mie beta_scat must be finite and >= 0");
  }
  if (precomputed_beta_ext) {
    require(precomputed_beta_ext->is_finite() && precomputed_beta_ext->min_component() >= 0,
            "mie beta_ext must be finite and >= 0");
  } else {
    require(mean_radius_m > 0, "mie mean radius must be > 0 in advanced mode");
    require(particle_density >= 0, "mie particle density must be >= 0");
    require(refractive_index.min_component() > 1.0, "mie refractive index must be > 1");
    require(in_range(refractive_index_imag, 0.0, 1e9), "mie imaginary index must be >= 0");
  }
}

void AbsorberLayer::validate() const {
  require(cross_section.is_finite() && cross_section.min_component() >= 0,
          "absorber '" + name + "' cross-section must be >= 0");
  if (const auto* h = std::get_if<HydrostaticProfile>(&profile)) {
    require(h->n0 >= 0, "absorber '" + name + "' n0 must be >= 0");
    require(h->fraction >= 0 && h->fraction <= 1,
            "absorber '" + name + "' fraction must lie in [0, 1]");
    require(h->scale_height_km > 0, "absorber '" + name + "' scale height must be > 0");
  }
}

// ---------------------------------------------------------------------------
// Density profiles

SplineProfile::SplineProfile(std::vector<double> altitudes_km, std::vector<double> densities,
                             std::vector<double> second_derivatives)
    : altitudes_(std::move(altitudes_km)),
      densities_(std::move(densities)),
      m2_(std::move(second_derivatives)) {}

double SplineProfile::operator()(double altitude_km) const {
  if (altitudes_.empty()) return 0.0;
  if (altitude_km < altitudes_.front() || altitude_km > altitudes_.back()) return 0.0;
  auto it = std::upper_bound(altitudes_.begin(), altitudes_.end(), altitude_km);
  std::size_t i = static_cast<std::size_t>(it - altitudes_.begin());
  i = std::clamp<std::size_t>(i, 1, altitudes_.size() - 1) - 1;
  const double h = altitudes_[i + 1] - altitudes_[i];
  const double a = (altitudes_[i + 1] - altitude_km) / h;
  const double b = 1.0 - a;
  const double v = a * densities_[i] + b * densities_[i + 1] +
                   ((a * a * a - a) * m2_[i] + (b * b * b - b) * m2_[i + 1]) * h * h / 6.0;
  return std::max(v, 0.0);
}

double evaluate_profile(const DensityProfile& profile, double altitude_km) {
  if (const auto* h = std::get_if<HydrostaticProfile>(&profile)) {
    return h->fraction * h->n0 * hydrostatic(altitude_km, h->scale_height_km);
  }
  return std::get<SplineProfile>(profile)(altitude_km);
}

SplineProfile build_ozone_spline(std::span<const std::pair<double, double>> knots) {
  const std::size_t n = knots.size();
  if (n < 4) throw InputError("spline needs at least 4 knots, got " + std::to_string(n));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = knots[i].first;
    y[i] = knots[i].second;
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || y[i] < 0) {
      throw InputError("spline knot " + std::to_string(i) + " is not a finite density >= 0");
    }
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw InputError("spline altitudes must be strictly increasing (knot " +
                       std::to_string(i) + ")");
    }
  }
  // Natural end conditions: second derivative 0 at both ends. Thomas
  // algorithm on the interior rows.
  std::vector<double> m2(n, 0.0), c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    const double diag = 2.0 * (h0 + h1);
    const double rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    const double lower = (i > 1) ? h0 : 0.0;
    const double denom = diag - lower * c[i - 1];
    c[i] = h1 / denom;
    d[i] = (rhs - lower * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m2[i] = d[i] - c[i] * m2[i + 1];
    if (i == 1) break;
  }
  return SplineProfile(std::move(x), std::move(y), std::move(m2));
}

// ---------------------------------------------------------------------------
// Rayleigh

double rayleigh_phase(double cos_theta, RayleighPhaseMode mode) {
  if (!(std::fabs(cos_theta) <= 1.0)) throw DomainError("rayleigh_phase: |cos theta| > 1");
  const double c2 = cos_theta * cos_theta;
  if (mode == RayleighPhaseMode::kClassic) return 0.75 * (1.0 + c2) / kFourPi;
  return 0.7629 * (1.0 + 0.932 * c2) / kFourPi;
}

double anisotropy_correction(double depolarization) {
  if (!(depolarization < 6.0 / 7.0)) {
    throw DomainError("depolarization factor at or beyond the f(delta) pole 6/7");
  }
  return (6.0 + 3.0 * depolarization) / (6.0 - 7.0 * depolarization);
}

double rayleigh_scatter_coeff(const RayleighParams& p, double altitude_km, Band band) {
  if (altitude_km < 0) throw DomainError("rayleigh_scatter_coeff: altitude < 0");
  const double falloff = hydrostatic(altitude_km, p.scale_height_km);
  if (p.precomputed_beta_scat) return (*p.precomputed_beta_scat)[band] * falloff;
  const double f = anisotropy_correction(p.depolarization);
  const double lambda = wavelength_m(band);
  const double m = p.refractive_index[band];
  const double m2m1 = m * m - 1.0;
  const double lambda2 = lambda * lambda;
  return 8.0 * kPi * kPi * kPi * m2m1 * m2m1 /
         (3.0 * p.molecular_density * lambda2 * lambda2) * f * falloff;
}

double rayleigh_absorption_coeff(const RayleighParams& p, double altitude_km, Band band) {
  if (p.absorber_radius_m < 0) throw DomainError("rayleigh absorber radius < 0");
  if (p.absorber_radius_m == 0.0 || p.refractive_index_imag[band] == 0.0) return 0.0;
  const std::complex<double> n(p.refractive_index[band], p.refractive_index_imag[band]);
  const std::complex<double> n2 = n * n;
  const double polarizability = ((n2 - 1.0) / (n2 + 2.0)).imag();
  const double r = p.absorber_radius_m;
  const double value = 8.0 * kPi * kPi * r * r * r * p.molecular_density /
                       wavelength_m(band) * polarizability *
                       hydrostatic(altitude_km, p.scale_height_km);
  return std::max(value, 0.0);
}

double molecular_absorption_coeff(const AbsorberLayer& layer, double altitude_km, Band band) {
  if (altitude_km < 0) throw DomainError("molecular_absorption_coeff: altitude < 0");
  return layer.cross_section[band] * evaluate_profile(layer.profile, altitude_km);
}

// ---------------------------------------------------------------------------
// Mie

double henyey_greenstein(double cos_theta, double g) {
  if (!(std::fabs(g) < 1.0)) throw DomainError("henyey_greenstein: |g| must be < 1");
  if (!(std::fabs(cos_theta) <= 1.0)) throw DomainError("henyey_greenstein: |cos theta| > 1");
  const double g2 = g * g;
  const double base = 1.0 + g2 - 2.0 * g * cos_theta;
  return (1.0 - g2) / (base * std::sqrt(base)) / kFourPi;
}

double dhg_phase(double cos_theta, double g1, double g2, double alpha, DhgForm form) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("dhg_phase: alpha outside [0, 1]");
  if (form == DhgForm::kStandard) {
    return alpha * henyey_greenstein(cos_theta, g1) +
           (1.0 - alpha) * henyey_greenstein(cos_theta, g2);
  }
  if (!(std::fabs(g1) < 1.0 && std::fabs(g2) < 1.0)) {
    throw DomainError("dhg_phase: |g| must be < 1");
  }
  if (!(std::fabs(cos_theta) <= 1.0)) throw DomainError("dhg_phase: |cos theta| > 1");
  const double num = 1.0 + g1 * g1;
  const double b1 = 1.0 + g1 * g1 - 2.0 * g1 * cos_theta;
  const double b2 = 1.0 + g2 * g2 - 2.0 * g2 * cos_theta;
  return (alpha * num / (b1 * std::sqrt(b1)) + (1.0 - alpha) * num / (b2 * std::sqrt(b2))) /
         kFourPi;
}

SpectralTriple mie_phase(const MieParams& p, double cos_theta) {
  return per_band([&](Band b) {
    return dhg_phase(cos_theta, p.g1[b], p.g2[b], p.alpha[b], p.dhg_form);
  });
}

MiePhaseEval::MiePhaseEval(const MieParams& p) {
  for (Band b : kBands) {
    (void)dhg_phase(1.0, p.g1[b], p.g2[b], p.alpha[b], p.dhg_form);  // validates
    const std::size_t i = static_cast<std::size_t>(b);
    const double g1 = p.g1[b], g2 = p.g2[b], a = p.alpha[b];
    const double n1 = p.dhg_form == DhgForm::kStandard ? 1.0 - g1 * g1 : 1.0 + g1 * g1;
    const double n2 = p.dhg_form == DhgForm::kStandard ? 1.0 - g2 * g2 : 1.0 + g1 * g1;
    t1_[i] = {a * n1 / kFourPi, 1.0 + g1 * g1, 2.0 * g1};
    t2_[i] = {(1.0 - a) * n2 / kFourPi, 1.0 + g2 * g2, 2.0 * g2};
  }
}

double mie_concentration_factor(double turbidity) { return (0.65 * turbidity - 0.65) * 1e-16; }

double mie_scatter_coeff(const MieParams& p, double altitude_km, Band band) {
  const double falloff = hydrostatic(altitude_km, p.scale_height_km);
  if (p.precomputed_beta_scat) return (*p.precomputed_beta_scat)[band] * falloff;
  if (!(p.turbidity >= 2.0 && p.turbidity <= 10.0)) {
    throw DomainError("mie_scatter_coeff: turbidity outside [2, 10]");
  }
  if (!(p.junge_exponent >= 2.0 && p.junge_exponent <= 6.0)) {
    throw DomainError("mie_scatter_coeff: junge exponent outside [2, 6]");
  }
  const double k = 2.0 * kPi / wavelength_m(band);
  return 0.434 * mie_concentration_factor(p.turbidity) * kPi *
         std::pow(k, p.junge_exponent - 2.0) * p.fudge_k[band] * falloff;
}

double mie_extinction_efficiency(double wavelength_m, double radius_m, double m_real,
                                 double k_imag) {
  if (!(m_real > 1.0)) throw DomainError("mie_extinction_efficiency: real index must be > 1");
  if (!(k_imag >= 0.0)) throw DomainError("mie_extinction_efficiency: imaginary index < 0");
  if (!(radius_m > 0.0) || !(wavelength_m > 0.0)) {
    throw DomainError("mie_extinction_efficiency: radius and wavelength must be > 0");
  }
  using Real = long double;
  const Real rho = 4.0L * static_cast<Real>(kPi) / wavelength_m * radius_m * (m_real - 1.0);
  const Real tan_beta = static_cast<Real>(k_imag) / (m_real - 1.0);
  if (rho < 1e-3L) {
    // Small-particle expansion; the closed form cancels catastrophically.
    const Real t2 = tan_beta * tan_beta;
    const Real q = rho * (4.0L / 3.0L * tan_beta) + rho * rho * (1.0L - t2) / 2.0L +
                   rho * rho * rho * tan_beta * (2.0L * t2 - 6.0L) / 15.0L;
    return static_cast<double>(q);
  }
  const Real beta = std::atan(tan_beta);
  const Real cb_rho = std::cos(beta) / rho;
  const Real damp = std::exp(-rho * tan_beta);
  const Real q = 2.0L - 4.0L * damp * cb_rho * std::sin(rho - beta) -
                 4.0L * damp * cb_rho * cb_rho * std::cos(rho - 2.0L * beta) +
                 4.0L * cb_rho * cb_rho * std::cos(2.0L * beta);
  return static_cast<double>(q);
}

double mie_extinction_coeff(const MieParams& p, double altitude_km, Band band) {
  const double falloff = hydrostatic(altitude_km, p.scale_height_km);
  if (p.precomputed_beta_ext) return (*p.precomputed_beta_ext)[band] * falloff;
  if (p.particle_density == 0.0) return 0.0;
  const double r = p.mean_radius_m;
  if (!(r > 0.0)) throw DomainError("mie_extinction_coeff: mean radius must be > 0");
  const double q = mie_extinction_efficiency(wavelength_m(band), r, p.refractive_index[band],
                                             p.refractive_index_imag[band]);
  return kPi * r * r * q * p.particle_density * falloff;
}

double particle_size_distribution(double radius_m, double c, double a_m, double b) {
  if (!(radius_m > 0 && a_m > 0 && b > 0)) {
    throw DomainError("particle_size_distribution: r, a and b must be > 0");
  }
  return c * std::pow(radius_m, (1.0 - 3.0 * b) / b) * std::exp(-radius_m / (a_m * b));
}

}  // namespace skylut
