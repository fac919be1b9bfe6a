#include "skylut/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "skylut/errors.hpp"

#ifndef SKYLUT_DATA_DIR
#define SKYLUT_DATA_DIR "data"
#endif

namespace skylut {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool parse_double(const std::string& s, double* out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, *out);
  return ec == std::errc() && p == e && std::isfinite(*out);
}

struct Entry {
  std::string value;
  int line;
  bool used = false;
};

class Section {
 public:
  std::string name;
  int line = 0;
  std::map<std::string, Entry> entries;
  std::string source;

  bool has(const std::string& key) const { return entries.count(key) != 0; }

  const Entry& entry(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) {
      throw InputError(source + ": missing required key '" + key + "' in [" + name +
                       "] (section starts at line " + std::to_string(line) + ")");
    }
    it->second.used = true;
    return it->second;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) {
    const Entry& e = entries.at(key);
    throw InputError(source + ":" + std::to_string(e.line) + ": key '" + key + "' in [" + name +
                     "]: " + what);
  }

  std::string text(const std::string& key) { return entry(key).value; }

  double number(const std::string& key) {
    double v;
    if (!parse_double(entry(key).value, &v)) fail(key, "expected a number, got '" + entry(key).value + "'");
    return v;
  }

  double number_in(const std::string& key, double lo, double hi, bool open_hi = false) {
    const double v = number(key);
    if (v < lo || v > hi || (open_hi && v == hi)) {
      std::ostringstream ss;
      ss << "value " << v << " outside [" << lo << ", " << hi << (open_hi ? ")" : "]");
      fail(key, ss.str());
    }
    return v;
  }

  double positive(const std::string& key) {
    const double v = number(key);
    if (!(v > 0.0)) fail(key, "must be > 0");
    return v;
  }

  SpectralTriple triple(const std::string& key) {
    const std::string raw = entry(key).value;
    std::vector<double> vals;
    std::stringstream ss(raw);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      double v;
      if (!parse_double(trim(tok), &v)) fail(key, "expected numbers, got '" + raw + "'");
      vals.push_back(v);
    }
    if (vals.size() == 1) return SpectralTriple::uniform(vals[0]);
    if (vals.size() != 3) fail(key, "expected 1 or 3 comma-separated values");
    return {vals[0], vals[1], vals[2]};
  }

  SpectralTriple triple_in(const std::string& key, double lo, double hi) {
    const SpectralTriple t = triple(key);
    for (std::size_t i = 0; i < 3; ++i) {
      if (t[i] < lo || t[i] > hi) {
        std::ostringstream ss;
        ss << "component " << t[i] << " outside [" << lo << ", " << hi << "]";
        fail(key, ss.str());
      }
    }
    return t;
  }

  bool boolean(const std::string& key) {
    const std::string v = entry(key).value;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  std::string choice(const std::string& key, std::initializer_list<const char*> options) {
    const std::string v = entry(key).value;
    std::string list;
    for (const char* o : options) {
      if (v == o) return v;
      list += list.empty() ? o : std::string(", ") + o;
    }
    fail(key, "expected one of {" + list + "}, got '" + v + "'");
  }

  void reject_unused() const {
    for (const auto& [k, e] : entries) {
      if (!e.used) {
        throw InputError(source + ":" + std::to_string(e.line) + ": unknown key '" + k +
                         "' in [" + name + "]");
      }
    }
  }
};

std::vector<Section> split_sections(std::string_view text, const std::string& source) {
  std::vector<Section> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw InputError(source + ":" + std::to_string(line) + ": malformed section header");
      }
      Section sec;
      sec.name = trim(s.substr(1, s.size() - 2));
      sec.line = line;
      sec.source = source;
      for (const auto& o : out) {
        if (o.name == sec.name) {
          throw InputError(source + ":" + std::to_string(line) + ": duplicate section [" +
                           sec.name + "]");
        }
      }
      out.push_back(std::move(sec));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw InputError(source + ":" + std::to_string(line) + ": expected 'key = value'");
    }
    if (out.empty()) {
      throw InputError(source + ":" + std::to_string(line) + ": key outside of any section");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw InputError(source + ":" + std::to_string(line) + ": empty key");
    auto& entries = out.back().entries;
    if (entries.count(key)) {
      throw InputError(source + ":" + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    entries[key] = Entry{value, line};
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& name) {
  std::filesystem::path p(name);
  return p.is_absolute() ? p : base / p;
}

void parse_atmosphere(Section& s, AtmosphereModel& m) {
  if (s.has("name")) m.name = s.text("name");
  if (s.has("ground_albedo")) m.ground_albedo = s.triple_in("ground_albedo", 0.0, 1.0);
  if (s.has("sun_irradiance")) m.sun_irradiance = s.triple_in("sun_irradiance", 0.0, 1e12);
  if (s.has("curved_paths")) m.curved_paths = s.boolean("curved_paths");
  if (s.has("scattering_orders")) {
    const double v = s.number_in("scattering_orders", 1, 64);
    if (v != std::floor(v)) s.fail("scattering_orders", "must be an integer");
    m.scattering_orders = static_cast<int>(v);
  }
  if (s.has("temperature_k")) m.temperature_k = s.positive("temperature_k");
  if (s.has("coefficient_unit")) {
    m.coefficient_unit = s.choice("coefficient_unit", {"per_m", "per_km"}) == "per_km"
                             ? CoefficientUnit::kPerKilometre
                             : CoefficientUnit::kPerMetre;
  }
}

void parse_geometry(Section& s, AtmosphereModel& m) {
  m.geometry.planet_radius_m = s.positive("planet_radius_km") * 1000.0;
  m.geometry.atmosphere_radius_m = s.positive("atmosphere_radius_km") * 1000.0;
  if (!(m.geometry.atmosphere_radius_m > m.geometry.planet_radius_m)) {
    s.fail("atmosphere_radius_km", "must exceed planet_radius_km");
  }
}

void parse_rayleigh(Section& s, AtmosphereModel& m) {
  auto& r = m.rayleigh;
  if (s.has("scale_height_km")) {
    r.scale_height_km = s.positive("scale_height_km");
  } else {
    if (!s.has("molar_mass_kg_mol") && !s.has("gravity_m_s2")) {
      throw InputError(s.source + ": [rayleigh] at line " + std::to_string(s.line) +
                       " needs scale_height_km or molar_mass_kg_mol with gravity_m_s2");
    }
    const double molar_mass = s.positive("molar_mass_kg_mol");
    r.scale_height_km =
        RayleighParams::scale_height_from_gas(m.temperature_k, molar_mass, s.positive("gravity_m_s2"));
  }
  if (s.has("beta_scat")) {
    r.precomputed_beta_scat = s.triple_in("beta_scat", 0.0, 1e3);
  }
  if (s.has("molecular_density")) r.molecular_density = s.positive("molecular_density");
  if (s.has("molecular_density_per_cm3")) {
    r.molecular_density = s.positive("molecular_density_per_cm3") * 1e6;
  }
  if (s.has("mass_density_kg_m3")) {
    r.molecular_density = RayleighParams::density_from_mass(s.positive("mass_density_kg_m3"),
                                                            s.positive("molar_mass_kg_mol"));
  }
  if (s.has("refractive_index")) r.refractive_index = s.triple_in("refractive_index", 1.0, 10.0);
  if (s.has("depolarization")) r.depolarization = s.number_in("depolarization", 0.0, 0.5, true);
  if (s.has("absorber_radius_m")) r.absorber_radius_m = s.number_in("absorber_radius_m", 0.0, 1.0);
  if (s.has("refractive_index_imag")) {
    r.refractive_index_imag = s.triple_in("refractive_index_imag", 0.0, 10.0);
  }
  if (!r.precomputed_beta_scat) {
    if (!s.has("refractive_index")) s.entry("beta_scat");  // reports the missing key
    if (!(r.refractive_index.min_component() > 1.0)) {
      s.fail("refractive_index", "gas refractive index must be > 1");
    }
  }
  if (s.has("phase")) {
    m.rayleigh_phase = s.choice("phase", {"classic", "penndorf"}) == "penndorf"
                           ? RayleighPhaseMode::kPenndorf
                           : RayleighPhaseMode::kClassic;
  }
}

void parse_mie(Section& s, AtmosphereModel& m) {
  auto& p = m.mie;
  p.scale_height_km = s.positive("scale_height_km");
  if (s.has("beta_scat")) p.precomputed_beta_scat = s.triple_in("beta_scat", 0.0, 1e3);
  if (s.has("turbidity")) p.turbidity = s.number_in("turbidity", 2.0, 10.0);
  if (s.has("junge_exponent")) p.junge_exponent = s.number_in("junge_exponent", 2.0, 6.0);
  if (s.has("fudge_k")) p.fudge_k = s.triple_in("fudge_k", 0.0, 1e6);
  if (!p.precomputed_beta_scat && !s.has("fudge_k")) s.entry("beta_scat");
  if (s.has("beta_ext") && s.has("beta_ext_over_scat")) {
    s.fail("beta_ext_over_scat", "conflicts with beta_ext");
  }
  if (s.has("beta_ext")) p.precomputed_beta_ext = s.triple_in("beta_ext", 0.0, 1e3);
  if (s.has("beta_ext_over_scat")) {
    const SpectralTriple k = s.triple_in("beta_ext_over_scat", 0.0, 1e6);
    if (!p.precomputed_beta_scat) s.fail("beta_ext_over_scat", "requires beta_scat");
    p.precomputed_beta_ext = *p.precomputed_beta_scat * k;
  }
  if (s.has("mean_radius_um")) p.mean_radius_m = s.positive("mean_radius_um") * 1e-6;
  if (s.has("particle_density")) p.particle_density = s.number_in("particle_density", 0.0, 1e30);
  if (s.has("refractive_index")) p.refractive_index = s.triple_in("refractive_index", 1.0, 10.0);
  if (s.has("refractive_index_imag")) {
    p.refractive_index_imag = s.triple_in("refractive_index_imag", 0.0, 10.0);
  }
  if (!p.precomputed_beta_ext) {
    if (!s.has("mean_radius_um")) s.entry("beta_ext");
    s.entry("particle_density");
    if (!(p.refractive_index.min_component() > 1.0)) {
      s.fail("refractive_index", "particle refractive index must be > 1");
    }
  }
  p.g1 = s.triple_in("g1", -0.999999, 0.999999);
  if (s.has("g2")) p.g2 = s.triple_in("g2", -0.999999, 0.999999);
  if (s.has("alpha")) p.alpha = s.triple_in("alpha", 0.0, 1.0);
  if (s.has("dhg_form")) {
    p.dhg_form = s.choice("dhg_form", {"standard", "printed"}) == "printed" ? DhgForm::kPrinted
                                                                           : DhgForm::kStandard;
  }
}

AbsorberLayer parse_absorber(Section& s, const std::string& name,
                             const std::filesystem::path& base) {
  AbsorberLayer a;
  a.name = name;
  if (s.has("cross_section") && s.has("cross_section_file")) {
    s.fail("cross_section_file", "conflicts with cross_section");
  }
  if (s.has("cross_section_file")) {
    a.cross_section = load_spectral_file(resolve(base, s.text("cross_section_file")));
  } else {
    a.cross_section = s.triple_in("cross_section", 0.0, 1.0);
  }
  const std::string profile = s.choice("profile", {"hydrostatic", "spline"});
  if (profile == "hydrostatic") {
    HydrostaticProfile h;
    h.n0 = s.number_in("n0", 0.0, 1e35);
    if (s.has("fraction")) h.fraction = s.number_in("fraction", 0.0, 1.0);
    h.scale_height_km = s.positive("scale_height_km");
    a.profile = h;
  } else {
    const auto knots = load_knot_file(resolve(base, s.text("knots_file")));
    a.profile = build_ozone_spline(knots);
  }
  return a;
}

}  // namespace

AtmosphereModel parse_config(std::string_view text, const std::filesystem::path& base_dir,
                             const std::string& source) {
  std::vector<Section> sections = split_sections(text, source);
  AtmosphereModel m;
  const auto find = [&](const std::string& name) -> Section* {
    for (auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  };
  for (auto& s : sections) {
    const bool known = s.name == "atmosphere" || s.name == "geometry" || s.name == "rayleigh" ||
                       s.name == "mie" || s.name.rfind("absorber.", 0) == 0;
    if (!known) {
      throw InputError(source + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");
    }
  }
  const auto require = [&](const std::string& name) -> Section& {
    Section* s = find(name);
    if (!s) throw InputError(source + ": missing required section [" + name + "]");
    return *s;
  };
  if (Section* a = find("atmosphere")) parse_atmosphere(*a, m);
  parse_geometry(require("geometry"), m);
  parse_rayleigh(require("rayleigh"), m);
  parse_mie(require("mie"), m);
  for (auto& s : sections) {
    if (s.name.rfind("absorber.", 0) == 0) {
      const std::string name = s.name.substr(9);
      if (name.empty()) throw InputError(source + ":" + std::to_string(s.line) + ": absorber needs a name");
      m.absorbers.push_back(parse_absorber(s, name, base_dir));
    }
  }
  for (const auto& s : sections) s.reject_unused();
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw InputError(source + ": " + e.what());
  }
  return m;
}

AtmosphereModel load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.parent_path(), path.string());
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SKYLUT_DATA_DIR")) {
    if (*env) return env;
  }
  return SKYLUT_DATA_DIR;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  const auto dir = data_dir() / "presets";
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
    if (e.path().extension() == ".cfg") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::filesystem::path preset_path(const std::string& name) {
  const auto p = data_dir() / "presets" / (name + ".cfg");
  if (!std::filesystem::exists(p)) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw InputError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return p;
}

AtmosphereModel load_preset(const std::string& name) { return load_config(preset_path(name)); }

namespace {

std::vector<std::pair<double, double>> read_pairs(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string raw;
  int line = 0;
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    std::istringstream fields(s);
    std::string a, b, extra;
    fields >> a >> b;
    double x, y;
    if (!parse_double(a, &x) || !parse_double(b, &y) || (fields >> extra)) {
      throw InputError(path.string() + ":" + std::to_string(line) +
                       ": expected two numbers per row");
    }
    rows.emplace_back(x, y);
  }
  if (rows.empty()) throw InputError(path.string() + ": no data rows");
  return rows;
}

}  // namespace

SpectralTriple load_spectral_file(const std::filesystem::path& path) {
  auto rows = read_pairs(path);
  std::sort(rows.begin(), rows.end());
  return per_band([&](Band b) {
    const double nm = kWavelengthsNm[static_cast<std::size_t>(b)];
    if (nm < rows.front().first || nm > rows.back().first) {
      throw InputError(path.string() + ": no data covering " + std::to_string(int(nm)) + " nm");
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      if (nm <= rows[i + 1].first) {
        const double span = rows[i + 1].first - rows[i].first;
        const double f = span > 0 ? (nm - rows[i].first) / span : 0.0;
        return rows[i].second + f * (rows[i + 1].second - rows[i].second);
      }
    }
    return rows.back().second;
  });
}

std::vector<std::pair<double, double>> load_knot_file(const std::filesystem::path& path) {
  return read_pairs(path);
}

}  // namespace skylut
