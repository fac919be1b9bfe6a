#pragma once
// Sky luminance curves against the CIE general sky, and the brute-force
// single-scatter oracle.
//
// CIE relative luminance (view zenith Z, sun zenith Zs, view-sun angle chi):
//   L/Lz = f(chi) phi(Z) / (f(Zs) phi(0))
//   phi(Z)   = 1 + a exp(b / cos Z)
//   f(chi)   = 1 + c (exp(d chi) - exp(d pi/2)) + e cos^2 chi
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "skylut/atmosphere.hpp"
#include "skylut/optics.hpp"
#include "skylut/tables.hpp"

namespace skylut {

struct CieSkyType {
  int type = 12;
  double a = -1.0;
  double b = -0.32;
  double c = 10.0;
  double d = -3.0;
  double e = 0.45;
};

// Rows `type a b c d e`; '#' starts a comment.
std::vector<CieSkyType> load_cie_sky_types(const std::filesystem::path& path);
// Looks `type` up in data/cie_sky_types.dat.
CieSkyType cie_sky_type(int type);

// Angles in radians. Z and Zs must lie in [0, pi/2).
double cie_relative_luminance(double view_zenith, double sun_zenith, double view_sun_angle,
                              const CieSkyType& sky = {});

struct LuminanceWeights {
  SpectralTriple weights{0.017, 0.995, 0.023};
  // Normalized to unit sum.
  double luminance(const SpectralTriple& radiance) const;
};

struct ValidationSample {
  double view_zenith_deg = 0.0;  // signed; positive toward the sun
  double model = 0.0;            // L / Lz
  double cie = 0.0;
};

struct ValidationCurve {
  double sun_elevation_deg = 0.0;
  std::vector<ValidationSample> samples;
  std::string diagnostic;  // set when the curve is empty
};

struct ScanOptions {
  double step_deg = 1.0;
  double horizon_cap_deg = 89.9;
  int mie_samples = 32;
  CieSkyType sky;
  LuminanceWeights weights;
  int threads = 0;
};

// Ground observer at r = Rg, scan through the solar meridian from the
// anti-solar horizon through the zenith to the solar horizon.
ValidationCurve model_sky_scan(const TableSampler& sampler, double sun_elevation_deg,
                               const ScanOptions& options = {});

// Mean |model - cie| / cie over |Z| <= max_zenith_deg.
double mean_relative_deviation(const ValidationCurve& curve, double max_zenith_deg = 75.0);

// Writes the CSV and a gnuplot script next to it (same stem, ".gp").
// Returns the script path.
std::filesystem::path export_curves(const std::vector<ValidationCurve>& curves,
                                    const std::filesystem::path& csv_path);
// Parses a CSV written by export_curves.
std::vector<ValidationCurve> read_curves(const std::filesystem::path& csv_path);

struct BruteForceOptions {
  int path_samples = 2000;
  int sun_samples = 400;
  double max_distance = std::numeric_limits<double>::infinity();
};

// Single scattered radiance, straight paths, no tables. Sums in long double.
SpectralTriple brute_force_single_scatter(const AtmosphereModel& model, const Vec3& observer,
                                          const Vec3& view, const Vec3& sun,
                                          const BruteForceOptions& options = {});

}  // namespace skylut
