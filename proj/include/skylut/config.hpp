#pragma once

// Sectioned key = value model files and the bundled presets.
//
//   [atmosphere]  name, ground_albedo, sun_irradiance, curved_paths,
//                 scattering_orders, temperature_k, coefficient_unit
//   [geometry]    planet_radius_km, atmosphere_radius_km
//   [rayleigh]    scale_height_km | (molar_mass_kg_mol, gravity_m_s2),
//                 beta_scat | (molecular_density[_per_cm3] | mass_density_kg_m3,
//                 refractive_index, depolarization), absorber_radius_m,
//                 refractive_index_imag, phase
//   [mie]         scale_height_km, beta_scat | (turbidity, junge_exponent,
//                 fudge_k), beta_ext | beta_ext_over_scat | (mean_radius_um,
//                 particle_density, refractive_index, refractive_index_imag),
//                 g1, g2, alpha, dhg_form
//   [absorber.X]  cross_section | cross_section_file, profile =
//                 hydrostatic (n0, fraction, scale_height_km) | spline
//                 (knots_file)
//
// Triples are "v680, v550, v440"; a single number fills all three. Relative
// file names resolve against the config file's directory.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skylut/atmosphere.hpp"

namespace skylut {

AtmosphereModel load_config(const std::filesystem::path& path);
AtmosphereModel parse_config(std::string_view text, const std::filesystem::path& base_dir,
                             const std::string& source = "<config>");

// Directory holding presets/ and the data tables; SKYLUT_DATA_DIR overrides
// the build-time location.
std::filesystem::path data_dir();
std::vector<std::string> preset_names();
std::filesystem::path preset_path(const std::string& name);
AtmosphereModel load_preset(const std::string& name);

// `wavelength_nm value` rows, linearly interpolated at (680, 550, 440).
SpectralTriple load_spectral_file(const std::filesystem::path& path);
// `altitude_km density_per_m3` rows.
std::vector<std::pair<double, double>> load_knot_file(const std::filesystem::path& path);

}  // namespace skylut
