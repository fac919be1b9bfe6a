#include "skylut/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "skylut/config.hpp"
#include "skylut/errors.hpp"
#include "skylut/lut_io.hpp"
#include "skylut/precompute.hpp"
#include "skylut/renderer.hpp"
#include "skylut/validation.hpp"

namespace skylut {
namespace {

constexpr double kDegToRad = kPi / 180.0;

// Bad flag values found after CLI11 parsing.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelSource {
  std::string preset;
  std::string config;
  bool given() const { return !preset.empty() || !config.empty(); }
};

void add_model_flags(CLI::App* app, ModelSource* src) {
  auto* p = app->add_option("--preset", src->preset, "bundled preset name");
  auto* c = app->add_option("--config", src->config, "model file (key = value sections)");
  p->excludes(c);
}

AtmosphereModel load_model(const ModelSource& src) {
  if (!src.config.empty()) return load_config(src.config);
  if (!src.preset.empty()) return load_preset(src.preset);
  throw UsageError("one of --preset or --config is required");
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t peek_hash(const std::string& path) {
  // Header only; the grids are read again by load_tables.
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path + "'");
  char raw[kHeaderBytes];
  f.read(raw, sizeof raw);
  if (f.gcount() != static_cast<std::streamsize>(sizeof raw)) {
    throw FormatError("'" + path + "' is shorter than the table header");
  }
  std::uint64_t hash = 0;
  for (int i = 7; i >= 0; --i) hash = (hash << 8) | static_cast<unsigned char>(raw[40 + i]);
  return hash;
}

// Model for a table file: the one given on the command line, or the bundled
// preset whose hash matches.
AtmosphereModel model_for_lut(const std::string& lut, const ModelSource& src,
                              bool allow_mismatch, ScatteringTables* tables, std::ostream& err) {
  AtmosphereModel model;
  if (src.given()) {
    model = load_model(src);
  } else {
    const std::uint64_t want = peek_hash(lut);
    bool found = false;
    for (const auto& name : preset_names()) {
      AtmosphereModel m = load_preset(name);
      if (model_hash(m) == want) {
        model = std::move(m);
        found = true;
        break;
      }
    }
    if (!found) {
      throw InputError("no bundled preset matches table hash " + hex(want) +
                       "; pass --preset or --config");
    }
  }
  LoadOptions lo;
  lo.expected_hash = model_hash(model);
  lo.allow_hash_mismatch = allow_mismatch;
  std::string warning;
  *tables = load_tables(lut, lo, &warning);
  if (!warning.empty()) err << "warning: " << warning << "\n";
  return model;
}

TableDims parse_dims(const std::string& text) {
  std::vector<int> v;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--dims: '" + item + "' is not an integer");
    }
  }
  TableDims d;
  if (v.size() == 4) {
    d.r = v[0], d.mu = v[1], d.mu_s = v[2], d.nu = v[3];
  } else if (v.size() == 8) {
    d.transmittance_w = v[0], d.transmittance_h = v[1];
    d.irradiance_w = v[2], d.irradiance_h = v[3];
    d.r = v[4], d.mu = v[5], d.mu_s = v[6], d.nu = v[7];
  } else {
    throw UsageError("--dims takes 4 (r,mu,mu_s,nu) or 8 (T w,h, E w,h, r,mu,mu_s,nu) integers");
  }
  try {
    d.validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("--dims: ") + e.what());
  }
  return d;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (v.empty()) throw UsageError(std::string(flag) + " needs at least one value");
  return v;
}

// Local east/north/up at the camera's latitude and longitude.
struct LocalFrame {
  Vec3 east, north, up;
  Vec3 direction(double elevation_deg, double azimuth_deg) const {
    const double e = elevation_deg * kDegToRad;
    const double a = azimuth_deg * kDegToRad;
    return (std::cos(e) * (std::cos(a) * north + std::sin(a) * east) + std::sin(e) * up).normalized();
  }
};

LocalFrame local_frame(double lat_deg, double lon_deg) {
  const double lat = lat_deg * kDegToRad;
  const double lon = lon_deg * kDegToRad;
  LocalFrame f;
  f.up = Vec3(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
  f.east = Vec3(-std::sin(lon), std::cos(lon), 0.0);
  f.north = f.up.cross(f.east).normalized();
  return f;
}

struct RenderFlags {
  std::string lut, out, hdr, albedo_map, alt = "2m", look = "horizon", size = "256x256";
  ModelSource model;
  double lat = 0.0, lon = 0.0, sun_elev = 30.0, sun_azimuth = 180.0, exposure = 10.0, fov = 60.0;
  double pitch = 0.0;
  std::optional<double> look_azimuth;
  bool no_sun_disc = false, allow_mismatch = false;
  int threads = 0, mie_samples = 32;
};

int cmd_render(const RenderFlags& f, std::ostream& out, std::ostream& err) {
  if (!(f.sun_elev >= -90.0 && f.sun_elev <= 90.0)) throw UsageError("--sun-elev must lie in [-90, 90]");
  if (!(f.lat >= -90.0 && f.lat <= 90.0)) throw UsageError("--lat must lie in [-90, 90]");
  if (!(f.exposure > 0.0)) throw UsageError("--exposure must be > 0");
  if (!(f.fov > 0.0 && f.fov < 180.0)) throw UsageError("--fov must lie in (0, 180)");
  int w = 0, h = 0;
  double alt = 0.0;
  try {
    parse_size(f.size, &w, &h);
    alt = parse_length_m(f.alt);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (alt < 0.0) throw UsageError("--alt must be >= 0");

  ScatteringTables tables;
  const AtmosphereModel model = model_for_lut(f.lut, f.model, f.allow_mismatch, &tables, err);
  const LocalFrame frame = local_frame(f.lat, f.lon);
  const Vec3 position = frame.up * (model.geometry.planet_radius_m + alt);
  const Vec3 sun = frame.direction(f.sun_elev, f.sun_azimuth);
  const double azimuth = f.look_azimuth.value_or(f.sun_azimuth);

  Vec3 forward;
  Vec3 up_hint = frame.up;
  if (f.look == "sun") {
    forward = sun;
    if (f.pitch != 0.0) forward = frame.direction(f.sun_elev + f.pitch, f.sun_azimuth);
  } else if (f.look == "zenith") {
    forward = frame.up;
    up_hint = frame.north;
  } else if (f.look == "nadir") {
    forward = -frame.up;
    up_hint = frame.north;
  } else if (f.look == "horizon") {
    forward = frame.direction(f.pitch, azimuth);
  } else if (f.look == "limb") {
    const double r = position.norm();
    const double dip = std::acos(std::min(1.0, model.geometry.planet_radius_m / r)) / kDegToRad;
    forward = frame.direction(-dip + f.pitch, azimuth);
  } else {
    throw UsageError("--look must be one of sun, zenith, nadir, horizon, limb");
  }

  RenderJob job;
  job.camera = Camera::look(position, forward, up_hint, f.fov);
  job.width = w;
  job.height = h;
  job.sun_direction = sun;
  job.model = &model;
  job.tables = &tables;
  job.exposure = f.exposure;
  job.ground_albedo = model.ground_albedo;
  job.include_sun_disc = !f.no_sun_disc;
  job.mie_samples = f.mie_samples;
  job.threads = f.threads;
  if (!f.albedo_map.empty()) job.ground_albedo_map = AlbedoMap::from_ppm(read_ppm(f.albedo_map));
  const RenderResult result = render(job);
  write_ppm(f.out, result.display);
  if (!f.hdr.empty()) write_hdr(f.hdr, result, tables.model_hash);
  out << "rendered " << w << "x" << h << " (" << model.name << ") in " << result.seconds
      << " s -> " << f.out << "\n";
  return kExitOk;
}

int cmd_precompute(const ModelSource& src, std::optional<int> orders, const std::string& dims,
                   const std::string& out_path, int threads, bool quiet, std::ostream& out) {
  AtmosphereModel model = load_model(src);
  PrecomputeOptions opt;
  if (!dims.empty()) opt.dims = parse_dims(dims);
  if (orders) {
    if (*orders < 1) throw UsageError("--orders must be >= 1");
    model.scattering_orders = *orders;
  }
  opt.orders = model.scattering_orders;
  opt.threads = threads;
  std::vector<OrderStats> stats;
  const ScatteringTables tables = build_tables(model, opt, &stats, [&](const OrderStats& s) {
    if (quiet) return;
    char buf[128];
    std::snprintf(buf, sizeof buf, "order %d  max|dS| %.6g  %.1f s\n", s.order, s.delta_norm,
                  s.seconds);
    out << buf << std::flush;
  });
  save_tables(tables, out_path);
  out << "wrote " << out_path << " (" << lut_file_size(opt.dims) << " bytes, model "
      << model.name << ", hash " << hex(tables.model_hash) << ")\n";
  return kExitOk;
}

int cmd_validate(const std::string& lut, const ModelSource& src, bool allow_mismatch,
                 const std::string& elevs, double step, int sky_type, const std::string& out_path,
                 int threads, std::ostream& out, std::ostream& err) {
  const std::vector<double> elevations = parse_list(elevs, "--sun-elev");
  for (double e : elevations) {
    if (!(e > 0.0 && e < 90.0)) throw UsageError("--sun-elev values must lie in (0, 90)");
  }
  if (!(step > 0.0 && step <= 45.0)) throw UsageError("--step must lie in (0, 45]");
  ScatteringTables tables;
  const AtmosphereModel model = model_for_lut(lut, src, allow_mismatch, &tables, err);
  const TableSampler sampler(tables, model);
  ScanOptions opt;
  opt.step_deg = step;
  opt.sky = cie_sky_type(sky_type);
  opt.threads = threads;
  std::vector<ValidationCurve> curves;
  for (double e : elevations) {
    curves.push_back(model_sky_scan(sampler, e, opt));
    const auto& c = curves.back();
    if (c.samples.empty()) {
      err << "sun elevation " << e << ": " << c.diagnostic << "\n";
      continue;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "sun %5.1f deg: mean |model - cie| / cie over |Z| <= 75 = %.4f\n",
                  e, mean_relative_deviation(c));
    out << buf;
  }
  const auto gp = export_curves(curves, out_path);
  out << "wrote " << out_path << " and " << gp.string() << "\n";
  return kExitOk;
}

void print_range(std::ostream& out, const char* label, const std::vector<float>& g) {
  double lo[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  double hi[3] = {-lo[0], -lo[0], -lo[0]};
  std::uint64_t sum = 1469598103934665603ull;
  for (std::size_t i = 0; i < g.size(); ++i) {
    lo[i % 3] = std::min(lo[i % 3], static_cast<double>(g[i]));
    hi[i % 3] = std::max(hi[i % 3], static_cast<double>(g[i]));
    std::uint32_t bits;
    std::memcpy(&bits, &g[i], 4);
    for (int b = 0; b < 4; ++b) {
      sum ^= (bits >> (8 * b)) & 0xffu;
      sum *= 1099511628211ull;
    }
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%-14s min (%.4g, %.4g, %.4g)  max (%.4g, %.4g, %.4g)  fnv1a %s\n", label, lo[0],
                lo[1], lo[2], hi[0], hi[1], hi[2], hex(sum).c_str());
  out << buf;
}

int cmd_inspect(const std::string& lut, std::ostream& out) {
  LoadOptions lo;
  const ScatteringTables t = load_tables(lut, lo);
  const TableDims& d = t.dims;
  out << "file           " << lut << "\n"
      << "bytes          " << lut_file_size(d) << "\n"
      << "model hash     " << hex(t.model_hash) << "\n";
  std::string match = "(none)";
  for (const auto& name : preset_names()) {
    if (model_hash(load_preset(name)) == t.model_hash) match = name;
  }
  out << "preset         " << match << "\n"
      << "transmittance  " << d.transmittance_w << " x " << d.transmittance_h << " (mu x r)\n"
      << "irradiance     " << d.irradiance_w << " x " << d.irradiance_h << " (mu_s x r)\n"
      << "inscatter      " << d.r << " x " << d.mu << " x " << d.mu_s << " x " << d.nu
      << " (r x mu x mu_s x nu)\n";
  print_range(out, "transmittance", t.transmittance);
  print_range(out, "irradiance", t.irradiance);
  print_range(out, "inscatter", t.inscatter);
  return kExitOk;
}

int cmd_presets(std::ostream& out) {
  for (const auto& name : preset_names()) {
    const AtmosphereModel m = load_preset(name);
    out << name << "  " << (m.advanced_mode() ? "advanced" : "standard") << "  hash "
        << hex(model_hash(m)) << "  " << preset_path(name).string() << "\n";
  }
  return kExitOk;
}

}  // namespace

double parse_length_m(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("length '" + text + "' is not a number");
  }
  std::string unit = text.substr(used);
  unit.erase(std::remove(unit.begin(), unit.end(), ' '), unit.end());
  if (unit == "km") return v * 1000.0;
  if (unit == "m" || unit.empty()) return v;
  throw std::invalid_argument("length '" + text + "': unit must be m or km");
}

void parse_size(const std::string& text, int* width, int* height) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t a = 0, b = 0;
    *width = std::stoi(text.substr(0, x), &a);
    *height = std::stoi(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw std::invalid_argument("size '" + text + "' must look like 256x256");
  }
  if (*width < 1 || *height < 1 || *width > 16384 || *height > 16384) {
    throw std::invalid_argument("size '" + text + "' must be between 1x1 and 16384x16384");
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"skylut: precomputed atmospheric scattering tables and sky renderer", "skylut"};
  app.require_subcommand(1);

  ModelSource pre_src;
  std::optional<int> orders;
  std::string dims, pre_out;
  int threads = 0;
  bool quiet = false;
  auto* pre = app.add_subcommand("precompute", "build scattering tables for a model");
  add_model_flags(pre, &pre_src);
  pre->add_option("--orders", orders, "scattering orders (default: the model's)");
  pre->add_option("--dims", dims, "r,mu,mu_s,nu or all 8 table sizes");
  pre->add_option("--out", pre_out, "output table file")->required();
  pre->add_option("--threads", threads, "worker threads (default SKYLUT_THREADS or all cores)");
  pre->add_flag("--quiet", quiet, "no per-order progress");

  RenderFlags rf;
  auto* ren = app.add_subcommand("render", "render an image from prebuilt tables");
  ren->add_option("--lut", rf.lut, "table file")->required();
  add_model_flags(ren, &rf.model);
  ren->add_option("--out", rf.out, "output PPM")->required();
  ren->add_option("--hdr", rf.hdr, "also write linear radiance (SKYI float file)");
  ren->add_option("--alt", rf.alt, "camera altitude, e.g. 400km or 2m (default 2m)");
  ren->add_option("--lat", rf.lat, "camera latitude, degrees");
  ren->add_option("--lon", rf.lon, "camera longitude, degrees");
  ren->add_option("--look", rf.look, "sun | zenith | nadir | horizon | limb (default horizon)");
  ren->add_option("--look-azimuth", rf.look_azimuth, "view azimuth from north, degrees (default: sun)");
  ren->add_option("--pitch", rf.pitch, "elevation offset for horizon/limb/sun views, degrees");
  ren->add_option("--sun-elev", rf.sun_elev, "sun elevation above the camera horizon, degrees");
  ren->add_option("--sun-azimuth", rf.sun_azimuth, "sun azimuth from north toward east, degrees");
  ren->add_option("--size", rf.size, "WxH (default 256x256)");
  ren->add_option("--exposure", rf.exposure, "tone map exposure (default 10)");
  ren->add_option("--fov", rf.fov, "vertical field of view, degrees (default 60)");
  ren->add_option("--albedo-map", rf.albedo_map, "equirectangular ground albedo (PPM)");
  ren->add_option("--mie-samples", rf.mie_samples, "Mie path samples per pixel (default 32)");
  ren->add_flag("--no-sun-disc", rf.no_sun_disc, "omit the sun disc");
  ren->add_flag("--allow-hash-mismatch", rf.allow_mismatch, "accept tables built for another model");
  ren->add_option("--threads", rf.threads, "worker threads");

  std::string v_lut, v_out, v_elev = "30,60";
  ModelSource v_src;
  bool v_allow = false;
  double v_step = 1.0;
  int v_type = 12, v_threads = 0;
  auto* val = app.add_subcommand("validate", "sky luminance curves against the CIE clear sky");
  val->add_option("--lut", v_lut, "table file")->required();
  add_model_flags(val, &v_src);
  val->add_option("--sun-elev", v_elev, "comma-separated sun elevations (default 30,60)");
  val->add_option("--step", v_step, "view zenith step, degrees (default 1)");
  val->add_option("--sky-type", v_type, "CIE general sky type (default 12)");
  val->add_option("--out", v_out, "output CSV")->required();
  val->add_flag("--allow-hash-mismatch", v_allow, "accept tables built for another model");
  val->add_option("--threads", v_threads, "worker threads");

  std::string i_lut;
  auto* ins = app.add_subcommand("inspect-lut", "print table dimensions, ranges and checksums");
  ins->add_option("lut", i_lut, "table file")->required();

  auto* pst = app.add_subcommand("presets", "list bundled presets");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    out << app.help();
    return kExitUsage;
  }

  try {
    if (pre->parsed()) return cmd_precompute(pre_src, orders, dims, pre_out, threads, quiet, out);
    if (ren->parsed()) return cmd_render(rf, out, err);
    if (val->parsed()) {
      return cmd_validate(v_lut, v_src, v_allow, v_elev, v_step, v_type, v_out, v_threads, out,
                          err);
    }
    if (ins->parsed()) return cmd_inspect(i_lut, out);
    if (pst->parsed()) return cmd_presets(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace skylut
