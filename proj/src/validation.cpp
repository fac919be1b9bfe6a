#include "skylut/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "skylut/config.hpp"
#include "skylut/errors.hpp"
#include "skylut/parallel.hpp"
#include "skylut/renderer.hpp"
#include "skylut/spectra.hpp"

namespace skylut {
namespace {

constexpr double kDegToRad = kPi / 180.0;

using LTriple = std::array<long double, 3>;

}  // namespace

std::vector<CieSkyType> load_cie_sky_types(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open CIE sky type file '" + path.string() + "'");
  std::vector<CieSkyType> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    CieSkyType t;
    if (!(in >> t.type)) continue;
    if (!(in >> t.a >> t.b >> t.c >> t.d >> t.e)) {
      throw InputError(path.string() + ":" + std::to_string(lineno) +
                       ": expected `type a b c d e`");
    }
    out.push_back(t);
  }
  if (out.empty()) throw InputError("'" + path.string() + "' holds no sky types");
  return out;
}

CieSkyType cie_sky_type(int type) {
  for (const auto& t : load_cie_sky_types(data_dir() / "cie_sky_types.dat")) {
    if (t.type == type) return t;
  }
  throw InputError("unknown CIE sky type " + std::to_string(type));
}

double cie_relative_luminance(double z, double zs, double chi, const CieSkyType& s) {
  const double half_pi = kPi / 2.0;
  if (!(z >= 0.0 && z < half_pi)) throw DomainError("cie: view zenith must lie in [0, pi/2)");
  if (!(zs >= 0.0 && zs < half_pi)) throw DomainError("cie: sun zenith must lie in [0, pi/2)");
  if (!(chi >= 0.0 && chi <= kPi)) throw DomainError("cie: view-sun angle must lie in [0, pi]");
  const auto phi = [&](double zen) { return 1.0 + s.a * std::exp(s.b / std::cos(zen)); };
  const auto f = [&](double x) {
    const double cx = std::cos(x);
    return 1.0 + s.c * (std::exp(s.d * x) - std::exp(s.d * half_pi)) + s.e * cx * cx;
  };
  return f(chi) * phi(z) / (f(zs) * phi(0.0));
}

double LuminanceWeights::luminance(const SpectralTriple& radiance) const {
  const double sum = weights.r680 + weights.g550 + weights.b440;
  if (!(sum > 0.0)) throw DomainError("luminance weights must have a positive sum");
  return (weights.r680 * radiance.r680 + weights.g550 * radiance.g550 +
          weights.b440 * radiance.b440) / sum;
}

ValidationCurve model_sky_scan(const TableSampler& sampler, double sun_elevation_deg,
                               const ScanOptions& opt) {
  if (!(sun_elevation_deg > 0.0 && sun_elevation_deg < 90.0)) {
    throw DomainError("scan: sun elevation must lie in (0, 90) degrees");
  }
  if (!(opt.step_deg > 0.0)) throw DomainError("scan: step must be > 0");
  const ShellGeometry& geom = sampler.geometry();
  const Vec3 observer(0.0, 0.0, geom.planet_radius_m);
  const double e = sun_elevation_deg * kDegToRad;
  const Vec3 sun(std::cos(e), 0.0, std::sin(e));
  const double zs = kPi / 2.0 - e;

  std::vector<double> angles;
  const int n = static_cast<int>(std::floor(opt.horizon_cap_deg / opt.step_deg + 1e-9));
  if (n * opt.step_deg < opt.horizon_cap_deg - 1e-9) angles.push_back(-opt.horizon_cap_deg);
  for (int k = -n; k <= n; ++k) angles.push_back(k * opt.step_deg);
  if (n * opt.step_deg < opt.horizon_cap_deg - 1e-9) angles.push_back(opt.horizon_cap_deg);

  ShadeOptions shade;
  shade.sun_disc = false;
  shade.mie_samples = opt.mie_samples;
  const auto radiance_at = [&](double zen_deg) {
    const double z = zen_deg * kDegToRad;
    const Ray ray = Ray::make(observer, Vec3(std::sin(z), 0.0, std::cos(z)));
    const SurfaceSample surface = trace_planet(geom, ray, SpectralTriple{});
    return opt.weights.luminance(shade_pixel(sampler, ray, sun, surface, shade));
  };

  ValidationCurve curve;
  curve.sun_elevation_deg = sun_elevation_deg;
  const double lz = radiance_at(0.0);
  if (!(lz > 0.0) || !std::isfinite(lz)) {
    curve.diagnostic = "zenith luminance is " + std::to_string(lz) +
                       "; the atmosphere scatters no light, no curve produced";
    return curve;
  }
  curve.samples.resize(angles.size());
  parallel_for(angles.size(), opt.threads, [&](std::size_t i) {
    const double zd = angles[i];
    ValidationSample& s = curve.samples[i];
    s.view_zenith_deg = zd;
    s.model = zd == 0.0 ? 1.0 : radiance_at(zd) / lz;
    const double z = std::fabs(zd) * kDegToRad;
    const double chi = std::fabs(zd * kDegToRad - zs);
    s.cie = cie_relative_luminance(z, zs, chi, opt.sky);
  });
  return curve;
}

double mean_relative_deviation(const ValidationCurve& curve, double max_zenith_deg) {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : curve.samples) {
    if (std::fabs(s.view_zenith_deg) > max_zenith_deg + 1e-9) continue;
    sum += std::fabs(s.model - s.cie) / s.cie;
    ++n;
  }
  if (n == 0) throw DomainError("mean deviation: no samples within the zenith range");
  return sum / n;
}

std::filesystem::path export_curves(const std::vector<ValidationCurve>& curves,
                                    const std::filesystem::path& csv_path) {
  bool any = false;
  for (const auto& c : curves) any = any || !c.samples.empty();
  if (!any) throw InputError("export_curves: no curve samples to write");
  std::ofstream f(csv_path, std::ios::trunc);
  if (!f) throw FormatError("cannot open '" + csv_path.string() + "' for writing");
  f << "sun_elev,view_zenith,model,cie\n";
  char buf[128];
  for (const auto& c : curves) {
    for (const auto& s : c.samples) {
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n", c.sun_elevation_deg,
                    s.view_zenith_deg, s.model, s.cie);
      f << buf;
    }
  }
  if (!f) throw FormatError("short write to '" + csv_path.string() + "'");

  std::filesystem::path gp = csv_path;
  gp.replace_extension(".gp");
  std::ofstream g(gp, std::ios::trunc);
  if (!g) throw FormatError("cannot open '" + gp.string() + "' for writing");
  g << "# gnuplot " << gp.filename().string() << "\n"
    << "set datafile separator ','\n"
    << "set xlabel 'view zenith (deg), positive toward the sun'\n"
    << "set ylabel 'L / Lz'\n"
    << "set key top left\n"
    << "set grid\n";
  g << "plot ";
  bool first = true;
  for (const auto& c : curves) {
    if (c.samples.empty()) continue;
    std::snprintf(buf, sizeof buf, "%.9g", c.sun_elevation_deg);
    const std::string e = buf;
    const std::string sel = "($1==" + e + "?$";
    if (!first) g << ", \\\n     ";
    first = false;
    g << "'" << csv_path.filename().string() << "' skip 1 using 2:" << sel
      << "3:1/0) with lines title 'model " << e << " deg', \\\n     '"
      << csv_path.filename().string() << "' skip 1 using 2:" << sel
      << "4:1/0) with lines dashtype 2 title 'CIE " << e << " deg'";
  }
  g << "\npause -1\n";
  if (!g) throw FormatError("short write to '" + gp.string() + "'");
  return gp;
}

std::vector<ValidationCurve> read_curves(const std::filesystem::path& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw InputError("cannot open '" + csv_path.string() + "'");
  std::string line;
  if (!std::getline(f, line) || line != "sun_elev,view_zenith,model,cie") {
    throw FormatError("'" + csv_path.string() + "' lacks the curve CSV header");
  }
  std::vector<ValidationCurve> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[4];
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]) != 4) {
      throw FormatError(csv_path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    if (out.empty() || out.back().sun_elevation_deg != v[0]) {
      out.push_back({});
      out.back().sun_elevation_deg = v[0];
    }
    out.back().samples.push_back({v[1], v[2], v[3]});
  }
  return out;
}

SpectralTriple brute_force_single_scatter(const AtmosphereModel& model, const Vec3& observer,
                                          const Vec3& view, const Vec3& sun,
                                          const BruteForceOptions& opt) {
  if (opt.path_samples < 2 || opt.sun_samples < 2) {
    throw DomainError("brute force: need at least 2 samples per path");
  }
  model.validate();
  const ShellGeometry& g = model.geometry;
  const long double rg = g.planet_radius_m;
  const Medium medium(model);
  const Vec3 v = view.normalized();
  const Vec3 s = sun.normalized();

  // Segment of the view ray inside the shell and above the ground.
  const Ray ray{observer, v};
  const auto shell = ray_sphere_intersect(ray, g.atmosphere_radius_m, true);
  if (!shell) return {};
  const double t0 = std::max(shell->t_near, 0.0);
  double t1 = shell->t_far;
  if (const auto ground = ray_sphere_intersect(ray, g.planet_radius_m, true)) {
    // Starting on the ground and looking up, the near root is the point we stand on.
    const Vec3 entry = observer + t0 * v;
    const double r0 = std::max(entry.norm(), g.planet_radius_m);
    if (ground->t_near > t0 - kGroundToleranceM &&
        ray_hits_ground(r0, entry.dot(v) / entry.norm(), g.planet_radius_m)) {
      t1 = std::min(t1, ground->t_near);
    }
  }
  t1 = std::min(t1, t0 + opt.max_distance);
  if (!(t1 > t0)) return {};

  const auto altitude_km = [&](const Vec3& p) {
    return std::max(0.0L, (static_cast<long double>(p.norm()) - rg) / 1000.0L);
  };
  const auto ext_at = [&](const Vec3& p) { return medium.at(static_cast<double>(altitude_km(p))); };

  const double nu = std::clamp(v.dot(s), -1.0, 1.0);
  const double pr = rayleigh_phase(nu, model.rayleigh_phase);
  const SpectralTriple pm = mie_phase(model.mie, nu);

  const auto sun_depth = [&](const Vec3& p, LTriple* depth) {
    const double r = p.norm();
    const double mu_s = p.dot(s) / r;
    // Hard planet shadow.
    if (ray_hits_ground(std::max(r, g.planet_radius_m), mu_s, g.planet_radius_m)) return false;
    const double len = distance_to_sphere_exit(std::min(r, g.atmosphere_radius_m), mu_s,
                                               g.atmosphere_radius_m);
    const long double h = static_cast<long double>(len) / opt.sun_samples;
    LTriple acc{0, 0, 0};
    for (int i = 0; i <= opt.sun_samples; ++i) {
      const Vec3 q = p + (static_cast<double>(h) * i) * s;
      const SpectralTriple e = ext_at(q).extinction;
      const long double w = (i == 0 || i == opt.sun_samples) ? 0.5L : 1.0L;
      for (std::size_t b = 0; b < 3; ++b) acc[b] += w * e[b];
    }
    for (auto& a : acc) a *= h;
    *depth = acc;
    return true;
  };

  const int n = opt.path_samples;
  const long double dt = (static_cast<long double>(t1) - t0) / n;
  LTriple view_depth{0, 0, 0};
  LTriple sum{0, 0, 0};
  SpectralTriple prev_ext{};
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = observer + static_cast<double>(t0 + dt * i) * v;
    const MediumSample m = ext_at(p);
    if (i > 0) {
      for (std::size_t b = 0; b < 3; ++b) {
        view_depth[b] += 0.5L * dt * (static_cast<long double>(prev_ext[b]) + m.extinction[b]);
      }
    }
    prev_ext = m.extinction;
    LTriple sd;
    if (!sun_depth(p, &sd)) continue;
    const long double w = (i == 0 || i == n) ? 0.5L : 1.0L;
    for (std::size_t b = 0; b < 3; ++b) {
      const long double scat = static_cast<long double>(m.rayleigh_scattering[b]) * pr +
                               static_cast<long double>(m.mie_scattering[b]) * pm[b];
      sum[b] += w * scat * std::exp(-(view_depth[b] + sd[b]));
    }
  }
  SpectralTriple out;
  for (std::size_t b = 0; b < 3; ++b) {
    out[b] = static_cast<double>(sum[b] * dt * model.sun_irradiance[b]);
  }
  return out;
}

}  // namespace skylut
