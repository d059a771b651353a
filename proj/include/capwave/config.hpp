#pragma once

#include <fstream>
#include <set>
#include <sstream>

#include "evolution.hpp"

namespace capwave {

// Flat "key = value" text; '#' starts a comment.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
      if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
      if (kv.values_.count(key)) throw ValidationError("config: duplicate key " + key);
      kv.values_[key] = value;
    }
    return kv;
  }
  static KeyValues parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("config: cannot open " + path);
    return parse(f);
  }
  static KeyValues parse_string(const std::string& text) {
    std::istringstream s(text);
    return parse(s);
  }

  bool has(const std::string& k) const { return values_.count(k) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get(const std::string& k, const std::string& def) {
    used_.insert(k);
    auto it = values_.find(k);
    return it == values_.end() ? def : it->second;
  }
  double get(const std::string& k, double def) {
    const std::string v = get(k, std::string{});
    if (v.empty()) return def;
    size_t pos = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size()) throw ValidationError("config: " + k + " is not a number: " + v);
    return d;
  }
  int get(const std::string& k, int def) {
    const double d = get(k, static_cast<double>(def));
    if (d != std::floor(d)) throw ValidationError("config: " + k + " must be an integer");
    return static_cast<int>(d);
  }
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& kv : values_)
      if (!used_.count(kv.first)) out.push_back(kv.first);
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

struct InitialSpec {
  std::string profile = "zero";  // zero | mode | gaussian | rough_packet
  double amplitude = 0.0;
  int mode = 1;
  double width = 1.0;
  double center = 0.0;
  double tail_weight = 3.0;   // rough_packet: tail size relative to the packet
  double tail_excess = 2.4;   // rough_packet: |eta^|^2 ~ <xi>^{-(2 s + tail_excess)}
  int reference_n = 4096;     // rough_packet: grid the profile is defined on
};

struct RunConfig {
  int n = 64;
  double length = 2.0 * pi;
  std::string geometry_kind = "flat";
  double depth = 1.0, g = 1.0, kappa = 1.0;
  InitialSpec init;
  std::string scheme = "etdrk4", system = "zakharov";
  double dt = 0.0;    // 0: cfl / omega_max
  double cfl = 0.5;
  double T = 1.0;
  double epsilon = 0.0;
  int nz = 24;
  double s = 2.5, delta = 0.1;
  int sample_stride = 1;
  int snapshot_every = 0;  // 0: no snapshots
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  Grid grid() const { return Grid(n, length); }
  Geometry geometry() const {
    return geometry_kind == "strip" ? Geometry::strip(depth, g, kappa) : Geometry::flat(depth, g, kappa);
  }
  EvolutionOptions options() const {
    EvolutionOptions o;
    o.nz = nz;
    o.scheme = scheme == "rk4" ? Scheme::rk4 : Scheme::etdrk4;
    o.system = system == "mollified" ? System::mollified : System::zakharov;
    o.epsilon = epsilon;
    return o;
  }
  DiagnosticParams diagnostics() const { return {s, delta}; }
  double step() const { return dt > 0.0 ? dt : cfl / omega_max(grid(), geometry()); }
  int steps() const { return static_cast<int>(std::ceil(T / step() - 1e-9)); }

  void validate() const {
    const Grid gr = grid();
    if (geometry_kind != "flat" && geometry_kind != "strip") throw ValidationError("geometry.kind must be flat or strip");
    geometry().validate();
    if (scheme != "etdrk4" && scheme != "rk4") throw ValidationError("evolution.scheme must be etdrk4 or rk4");
    if (system != "zakharov" && system != "mollified") throw ValidationError("evolution.system must be zakharov or mollified");
    if (!(T >= 0.0) || !std::isfinite(T)) throw ValidationError("evolution.T must be >= 0");
    if (dt < 0.0 || !(cfl > 0.0)) throw ValidationError("evolution.dt >= 0 and evolution.cfl > 0 required");
    if (step() * omega_max(gr, geometry()) > stability_limit(options().scheme))
      throw ValidationError("evolution.dt exceeds the stability envelope of the scheme");
    if (!(epsilon >= 0.0)) throw ValidationError("evolution.epsilon must be >= 0");
    if (nz < 4) throw ValidationError("evolution.nz must be >= 4");
    if (!(delta > 0.0) || !(s >= 0.0)) throw ValidationError("diagnostics: s >= 0 and delta > 0 required");
    if (sample_stride < 1 || snapshot_every < 0) throw ValidationError("diagnostics: stride >= 1, snapshot_every >= 0");
    const auto& p = init.profile;
    if (p != "zero" && p != "mode" && p != "gaussian" && p != "rough_packet")
      throw ValidationError("init.profile must be zero, mode, gaussian or rough_packet");
    if (!(init.width > 0.0)) throw ValidationError("init.width must be positive");
    if (p == "mode" && (init.mode < 1 || 2 * init.mode >= n)) throw ValidationError("init.mode out of range");
    if (p == "rough_packet" && (init.reference_n < n || init.reference_n % 2 != 0))
      throw ValidationError("init.reference_n must be even and >= grid.n");
  }
};

inline RunConfig parse_run_config(KeyValues kv) {
  RunConfig c;
  c.n = kv.get("grid.n", c.n);
  c.length = kv.get("grid.length", c.length);
  c.geometry_kind = kv.get("geometry.kind", c.geometry_kind);
  c.depth = kv.get("geometry.depth", c.depth);
  c.g = kv.get("geometry.g", c.g);
  c.kappa = kv.get("geometry.kappa", c.kappa);
  c.init.profile = kv.get("init.profile", c.init.profile);
  c.init.amplitude = kv.get("init.amplitude", c.init.amplitude);
  c.init.mode = kv.get("init.mode", c.init.mode);
  c.init.width = kv.get("init.width", c.init.width);
  c.init.center = kv.get("init.center", c.init.center);
  c.init.tail_weight = kv.get("init.tail_weight", c.init.tail_weight);
  c.init.tail_excess = kv.get("init.tail_excess", c.init.tail_excess);
  c.init.reference_n = kv.get("init.reference_n", c.init.reference_n);
  c.scheme = kv.get("evolution.scheme", c.scheme);
  c.system = kv.get("evolution.system", c.system);
  c.dt = kv.get("evolution.dt", c.dt);
  c.cfl = kv.get("evolution.cfl", c.cfl);
  c.T = kv.get("evolution.T", c.T);
  c.epsilon = kv.get("evolution.epsilon", c.epsilon);
  c.nz = kv.get("evolution.nz", c.nz);
  c.s = kv.get("diagnostics.s", c.s);
  c.delta = kv.get("diagnostics.delta", c.delta);
  c.sample_stride = kv.get("diagnostics.sample_stride", c.sample_stride);
  c.snapshot_every = kv.get("diagnostics.snapshot_every", c.snapshot_every);
  const int seed = kv.get("seed", 0);
  if (seed < 0) throw ValidationError("seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = kv.get("output.dir", c.output_dir);
  if (auto u = kv.unused(); !u.empty()) throw ValidationError("config: unknown key " + u.front());
  c.validate();
  return c;
}

// Localized packet plus a power-law tail: exp(-(x - x0)^2 / w^2) + B tail(x) / max|tail|, where
// tail = exp(-(x - x0)^2 / 4) sum_k <xi_k>^{-p/2} e^{i xi_k (x - x0)}, p = 2 s + tail_excess.
// Built on the reference grid and truncated, so every n sees the same low modes.
inline Field rough_packet(const Grid& g, const InitialSpec& sp, double s) {
  const Grid ref(sp.reference_n, g.length());
  const double p = 2.0 * s + sp.tail_excess;
  CVec pl(ref.n(), cplx{});
  for (int k = 0; k < ref.n(); ++k)
    if (!ref.is_nyquist(k)) pl[k] = std::pow(1.0 + ref.xi(k) * ref.xi(k), -0.25 * p);
  const Field tail = Field::from_spectrum(ref, pl, true);
  RVec tv(ref.n());
  double mx = 0.0;
  for (int j = 0; j < ref.n(); ++j) {
    const double x = ref.x(j);
    tv[j] = tail[j].real() * std::exp(-x * x / 4.0);
    mx = std::max(mx, std::abs(tv[j]));
  }
  CVec v(ref.n());
  for (int j = 0; j < ref.n(); ++j) {
    const double x = ref.x(j);
    v[j] = sp.amplitude * (std::exp(-x * x / (sp.width * sp.width)) + sp.tail_weight * tv[j] / mx);
  }
  const CVec cf = Field::from_values(ref, v, true).spectrum();
  CVec c(g.n(), cplx{});
  for (int k = 0; k < g.n(); ++k) {
    if (g.is_nyquist(k)) continue;
    // shift by x0 after truncation
    c[k] = cf[ref.index(g.wavenumber(k))] * std::polar(1.0, -g.xi(k) * sp.center);
  }
  return Field::from_spectrum(g, c, true);
}

inline WaveState initial_state(const RunConfig& c) {
  const Grid g = c.grid();
  const InitialSpec& sp = c.init;
  WaveState s{0.0, Field(g), Field(g)};
  if (sp.profile == "mode") {
    const double k = 2.0 * pi * sp.mode / g.length();
    s.eta = Field::from_function(g, [&](double x) { return sp.amplitude * std::cos(k * x); });
  } else if (sp.profile == "gaussian") {
    s.eta = Field::from_function(g, [&](double x) {
      const double y = (x - sp.center) / sp.width;
      return sp.amplitude * std::exp(-y * y);
    });
  } else if (sp.profile == "rough_packet") {
    s.eta = rough_packet(g, sp, c.s);
  }
  return s;
}

}  // namespace capwave
