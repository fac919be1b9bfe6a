#pragma once

// Wavelength-dependent scattering and absorption coefficients and phase
// functions. Altitudes are in km, lengths in m, coefficients in 1/m.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "skylut/spectral.hpp"

namespace skylut {

inline constexpr double kPi = 3.14159265358979323846;

enum class RayleighPhaseMode { kClassic, kPenndorf };

// The printed DHG form reuses (1 + g1^2) as both numerators. It is kept only
// for A/B comparison; it is not normalized.
enum class DhgForm { kStandard, kPrinted };

struct RayleighParams {
  double scale_height_km = 8.0;
  double molecular_density = 2.68731e25;  // 1/m^3 at sea level
  SpectralTriple refractive_index{1.0, 1.0, 1.0};  // real part m(lambda)
  double depolarization = 0.0;
  std::optional<SpectralTriple> precomputed_beta_scat;  // 1/m at h = 0
  double absorber_radius_m = 0.0;
  SpectralTriple refractive_index_imag{};  // k(lambda)

  // Scale height and number density from the ideal-gas relations
  // H = R T / (M g) and N = N_A rho / M.
  static double scale_height_from_gas(double temperature_k, double molar_mass_kg,
                                      double gravity_m_s2);
  static double density_from_mass(double mass_density_kg_m3, double molar_mass_kg);

  void validate() const;
};

struct MieParams {
  double scale_height_km = 1.2;
  double turbidity = 2.0;
  double junge_exponent = 4.0;
  SpectralTriple fudge_k{};
  SpectralTriple g1{};
  SpectralTriple g2{};
  SpectralTriple alpha = SpectralTriple::uniform(1.0);
  double mean_radius_m = 0.0;
  double particle_density = 0.0;  // 1/m^3
  SpectralTriple refractive_index = SpectralTriple::uniform(1.5);
  SpectralTriple refractive_index_imag{};
  std::optional<SpectralTriple> precomputed_beta_scat;
  std::optional<SpectralTriple> precomputed_beta_ext;
  DhgForm dhg_form = DhgForm::kStandard;

  void validate() const;
};

struct HydrostaticProfile {
  double n0 = 0.0;        // 1/m^3
  double fraction = 1.0;  // volume mixing ratio
  double scale_height_km = 8.0;
};

// Natural cubic spline through (altitude km, density 1/m^3) knots. Built by
// build_ozone_spline; evaluates to 0 outside the knot range and never below 0.
class SplineProfile {
 public:
  SplineProfile() = default;
  SplineProfile(std::vector<double> altitudes_km, std::vector<double> densities,
                std::vector<double> second_derivatives);

  double operator()(double altitude_km) const;

  std::span<const double> altitudes_km() const { return altitudes_; }
  std::span<const double> densities() const { return densities_; }

 private:
  std::vector<double> altitudes_;
  std::vector<double> densities_;
  std::vector<double> m2_;
};

using DensityProfile = std::variant<HydrostaticProfile, SplineProfile>;

double evaluate_profile(const DensityProfile& profile, double altitude_km);

struct AbsorberLayer {
  std::string name;
  SpectralTriple cross_section{};  // m^2 per particle
  DensityProfile profile = HydrostaticProfile{};

  void validate() const;
};

double rayleigh_phase(double cos_theta, RayleighPhaseMode mode);

// f(delta) = (6 + 3 delta) / (6 - 7 delta).
double anisotropy_correction(double depolarization);

double rayleigh_scatter_coeff(const RayleighParams& p, double altitude_km, Band band);
double rayleigh_absorption_coeff(const RayleighParams& p, double altitude_km, Band band);
double molecular_absorption_coeff(const AbsorberLayer& layer, double altitude_km, Band band);

SplineProfile build_ozone_spline(std::span<const std::pair<double, double>> knots);

double henyey_greenstein(double cos_theta, double g);
double dhg_phase(double cos_theta, double g1, double g2, double alpha,
                 DhgForm form = DhgForm::kStandard);
// Per-band DHG using the wavelength-dependent (g1, g2, alpha) of `p`.
SpectralTriple mie_phase(const MieParams& p, double cos_theta);

// C(T) = (0.65 T - 0.65) 1e-16.
double mie_concentration_factor(double turbidity);
double mie_scatter_coeff(const MieParams& p, double altitude_km, Band band);

// Anomalous-diffraction extinction efficiency of an absorbing sphere.
double mie_extinction_efficiency(double wavelength_m, double radius_m, double m_real,
                                 double k_imag);
double mie_extinction_coeff(const MieParams& p, double altitude_km, Band band);

// Unchecked per-band DHG for inner loops; parameters are validated once at
// construction.
class MiePhaseEval {
 public:
  MiePhaseEval() = default;
  explicit MiePhaseEval(const MieParams& p);
  SpectralTriple operator()(double cos_theta) const {
    SpectralTriple out;
    for (std::size_t i = 0; i < 3; ++i) {
      out[i] = term(t1_[i], cos_theta) + term(t2_[i], cos_theta);
    }
    return out;
  }

 private:
  struct Term {
    double scale = 0.0;  // weight * numerator / 4 pi
    double a = 1.0;      // 1 + g^2
    double b = 0.0;      // 2 g
  };
  static double term(const Term& t, double c) {
    const double base = t.a - t.b * c;
    return t.scale / (base * std::sqrt(base));
  }
  Term t1_[3];
  Term t2_[3];
};

inline double rayleigh_phase_unchecked(double cos_theta, RayleighPhaseMode mode) {
  const double c2 = cos_theta * cos_theta;
  return mode == RayleighPhaseMode::kClassic ? 0.75 * (1.0 + c2) / (4.0 * kPi)
                                             : 0.7629 * (1.0 + 0.932 * c2) / (4.0 * kPi);
}

double particle_size_distribution(double radius_m, double c, double a_m, double b);

template <typename F>
SpectralTriple per_band(F&& f) {
  return {f(Band::kRed680), f(Band::kGreen550), f(Band::kBlue440)};
}

}  // namespace skylut
