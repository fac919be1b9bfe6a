#pragma once

// The full parameter set of one planet's atmosphere and a flattened view of
// it (Medium) that the integrators evaluate per sample.

#include <cstdint>
#include <string>
#include <vector>

#include "skylut/optics.hpp"
#include "skylut/spectra.hpp"

namespace skylut {

// Medium coefficients are computed in 1/m. kPerKilometre rescales them by
// 1e-3 for parameter sets whose values are tabulated for km paths.
enum class CoefficientUnit { kPerMetre, kPerKilometre };

struct AtmosphereModel {
  std::string name = "unnamed";
  ShellGeometry geometry;
  RayleighParams rayleigh;
  RayleighPhaseMode rayleigh_phase = RayleighPhaseMode::kClassic;
  MieParams mie;
  std::vector<AbsorberLayer> absorbers;
  SpectralTriple ground_albedo = SpectralTriple::uniform(0.1);
  SpectralTriple sun_irradiance = SpectralTriple::uniform(1.0);
  bool curved_paths = false;
  int scattering_orders = 4;
  double temperature_k = 273.0;
  CoefficientUnit coefficient_unit = CoefficientUnit::kPerMetre;

  // Advanced mode: at least one coefficient is derived from physical
  // parameters rather than given directly.
  bool advanced_mode() const;
  void validate() const;
};

// FNV-1a over every physical field. The name and scattering_orders are
// excluded, so tables built with more orders still match their model.
std::uint64_t model_hash(const AtmosphereModel& model);

struct MediumSample {
  SpectralTriple rayleigh_scattering;
  SpectralTriple mie_scattering;
  SpectralTriple extinction;
};

// Surface coefficients resolved once; evaluation is exponentials plus the
// absorber profiles.
class Medium {
 public:
  explicit Medium(const AtmosphereModel& model);

  MediumSample at(double altitude_km) const;
  SpectralTriple extinction(double altitude_km) const;

  const SpectralTriple& rayleigh_scattering_surface() const { return rayleigh_scat0_; }
  const SpectralTriple& mie_scattering_surface() const { return mie_scat0_; }
  bool empty() const;

 private:
  struct Absorber {
    SpectralTriple sigma;  // already unit-scaled
    DensityProfile profile;
  };
  double inv_h_r_;
  double inv_h_m_;
  SpectralTriple rayleigh_scat0_;
  SpectralTriple rayleigh_abs0_;
  SpectralTriple mie_scat0_;
  SpectralTriple mie_ext0_;
  std::vector<Absorber> absorbers_;
};

double unit_scale(CoefficientUnit unit);

}  // namespace skylut
