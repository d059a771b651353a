#pragma once

#include <json.hpp>

#include <fstream>
#include <ostream>

#include "smoothing.hpp"

namespace capwave::io {

using json = nlohmann::json;

inline void write_field_csv(const Field& u, std::ostream& os) {
  const Grid& g = u.grid();
  os << "x,re,im\n";
  os.precision(17);
  for (int j = 0; j < g.n(); ++j) os << g.x(j) << ',' << u[j].real() << ',' << u[j].imag() << '\n';
}

inline json field_json(const Field& u) {
  json spec = json::array();
  for (const cplx& c : u.spectrum()) spec.push_back({c.real(), c.imag()});
  return {{"grid", {{"n", u.grid().n()}, {"length", u.grid().length()}}}, {"spectrum", spec}, {"real", u.is_real()}};
}

inline Field field_from_json(const json& j) {
  const Grid g(j.at("grid").at("n").get<int>(), j.at("grid").at("length").get<double>());
  const auto& spec = j.at("spectrum");
  if (static_cast<int>(spec.size()) != g.n()) throw ValidationError("field json: spectrum length != n");
  CVec c(g.n());
  for (int k = 0; k < g.n(); ++k) c[k] = {spec[k].at(0).get<double>(), spec[k].at(1).get<double>()};
  return Field::from_spectrum(g, c, j.value("real", false));
}

// Principal and subprincipal parts sampled on the x grid and the given frequencies.
inline json symbol_json(const Symbol& a, const RVec& xis) {
  const Grid& g = a.grid();
  auto table = [&](double ord) {
    json rows = json::array();
    const bool present = a.has_part(ord);
    const HomPart p = present ? a.part(ord) : hom::zero(g.n(), ord);
    for (int j = 0; j < g.n(); ++j) {
      json row = json::array();
      for (double xi : xis) {
        const cplx v = p.at(j, xi);
        row.push_back({v.real(), v.imag()});
      }
      rows.push_back(row);
    }
    return rows;
  };
  json xs = json::array();
  for (int j = 0; j < g.n(); ++j) xs.push_back(g.x(j));
  return {{"order", a.order()},
          {"x", xs},
          {"xi", xis},
          {"principal", table(a.order())},
          {"subprincipal", table(a.order() - 1.0)}};
}

inline json probe_json(const ProbeReport& r) {
  return {{"claim", r.claim},     {"shells", r.shells},       {"norms", r.norms},
          {"slope", r.slope},     {"measured", r.measured},   {"saturated", r.saturated},
          {"flagged", r.flagged}, {"pass", r.pass}};
}

inline void write_trajectory_csv(const std::vector<DiagnosticRecord>& rs, std::ostream& os) {
  os << "t,eta_norm,psi_norm,M,H_total,H0,w\n";
  os.precision(17);
  for (const auto& r : rs)
    os << r.t << ',' << r.eta_norm << ',' << r.psi_norm << ',' << r.M << ',' << r.H_total << ',' << r.H0 << ','
       << r.w << '\n';
}

inline json state_json(const WaveState& s) { return {{"t", s.t}, {"eta", field_json(s.eta)}, {"psi", field_json(s.psi)}}; }

struct SweepEntry {
  int n = 0;
  KatoReport kato;
};

inline json smoothing_json(double delta, double eps_doi, const BoundReport& b, const KatoReport& k,
                           const std::vector<SweepEntry>& sweep, const GardingReport& gf) {
  json sw = json::array();
  for (const auto& e : sweep)
    sw.push_back({{"n", e.n}, {"weighted", e.kato.weighted}, {"unweighted", e.kato.unweighted},
                  {"sup_energy", e.kato.sup_energy}, {"undersampled", e.kato.undersampled}});
  return {{"delta", delta},
          {"eps_doi", eps_doi},
          {"K_measured", b.K_measured},
          {"bound_pass", b.pass},
          {"kato_integral", {{"weighted", k.weighted}, {"unweighted", k.unweighted}, {"undersampled", k.undersampled}}},
          {"resolution_sweep", sw},
          {"garding", {{"a", gf.a}, {"A", gf.A}, {"feasible", gf.feasible}, {"witness", gf.witness}}}};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << text;
}

}  // namespace capwave::io
