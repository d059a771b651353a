// capwave: batch runner for simulations, oracle suites and reports.
//
// Exit codes: 0 pass, 1 validation error, 2 runtime abort, 3 failed check.
#include <capwave/config.hpp>
#include <capwave/io.hpp>
#include <capwave/verify.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace capwave;
using io::json;

namespace {

enum Exit { ok = 0, validation = 1, aborted = 2, failed = 3 };

void check_thread_env() {
  const char* env = std::getenv("CAPWAVE_THREADS");
  if (!env) return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) throw ValidationError("CAPWAVE_THREADS must be a positive integer");
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw ValidationError("cannot open " + p.string());
  return json::parse(f);
}

void write_json(const fs::path& p, const json& j) { io::write_text(p.string(), j.dump(2) + "\n"); }

double relative(double drift, double scale) { return scale > 0.0 ? drift / scale : drift; }

// ---------------------------------------------------------------------------
// simulate

json smoothing_report(const RunConfig& cfg, const std::vector<WaveState>& states, const Geometry& geo) {
  const Grid g = cfg.grid();
  const EscapeSelection sel = select_escape({states.front().eta, states.back().eta}, cfg.delta);
  const KatoReport k = kato_integral(states, cfg.s, cfg.delta, geo);
  std::vector<Field> fam;
  for (int j = 1; std::ldexp(1.0, j + 1) < 0.5 * g.n() * g.dxi(); ++j)
    fam.push_back(probe_bump(g, j, 0.0, cfg.seed));
  const GardingReport gf = garding_fit(garding_symbol(g, cfg.delta), cfg.delta, fam);
  json r = io::smoothing_json(cfg.delta, sel.escape.eps(), sel.report, k, {{cfg.n, k}}, gf);
  r["eps_doi_halvings"] = sel.halvings;
  r["i35_min"] = sel.report.i35_min;
  r["samples"] = sel.report.samples;
  return r;
}

int run_simulate(const std::string& config_path, const std::string& out_override) {
  const RunConfig cfg = parse_run_config(KeyValues::parse_file(config_path));
  const fs::path out = out_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_override);
  fs::create_directories(out);
  fs::remove(out / "ABORTED");
  if (cfg.snapshot_every > 0) fs::create_directories(out / "snapshots");

  const Geometry geo = cfg.geometry();
  const EvolutionOptions opt = cfg.options();
  const DiagnosticParams dp = cfg.diagnostics();
  const double dt = cfg.step();
  const int steps = cfg.steps();
  const Stepper stepper(cfg.grid(), geo, steps > 0 ? cfg.T / steps : dt, opt);

  std::vector<WaveState> states;
  std::vector<DiagnosticRecord> records;
  double M = 0.0;
  auto sample = [&](const WaveState& s) {
    states.push_back(s);
    records.push_back(diagnose(s, geo, dp, M, opt));
    M = records.back().M;
  };
  auto flush_trajectory = [&] {
    std::ofstream f(out / "trajectory.csv");
    io::write_trajectory_csv(records, f);
  };

  WaveState s = initial_state(cfg);
  sample(s);
  for (int i = 1; i <= steps; ++i) {
    try {
      s = stepper.step(s);
    } catch (const EvolutionAbort& e) {
      flush_trajectory();
      write_json(out / "abort_state.json", io::state_json(e.last));
      io::write_text((out / "ABORTED").string(), std::string(e.what()) + "\n");
      std::cerr << "capwave: run aborted: " << e.what() << "\n";
      return Exit::aborted;
    }
    if (i % cfg.sample_stride == 0 || i == steps) sample(s);
    if (cfg.snapshot_every > 0 && i % cfg.snapshot_every == 0) {
      std::ostringstream name;
      name << "step_" << std::setw(7) << std::setfill('0') << i << ".json";
      write_json(out / "snapshots" / name.str(), io::state_json(s));
    }
  }
  flush_trajectory();

  const MonitorReport mon = monitor(states, cfg.s);
  const DiagnosticRecord &r0 = records.front(), &r1 = records.back();
  const double mass0 = states.front().eta.spectrum()[0].real(), mass1 = states.back().eta.spectrum()[0].real();
  double l1 = 0.0;
  for (const auto& z : states.front().eta.values()) l1 += std::abs(z.real());
  l1 /= cfg.n;
  json summary = {{"config", config_path},
                  {"n", cfg.n},
                  {"length", cfg.length},
                  {"dt", stepper.dt()},
                  {"steps", steps},
                  {"samples", states.size()},
                  {"T", states.back().t},
                  {"seed", cfg.seed},
                  {"energy_drift_rel", relative(std::abs(r1.H_total - r0.H_total), std::abs(r0.H_total))},
                  {"mass_drift_rel", relative(std::abs(mass1 - mass0), l1)},
                  {"monitor", {{"M0", mon.intercept}, {"M_T", mon.M.back()}, {"slope", mon.slope}, {"jumps", mon.jumps}}}};
  if (cfg.init.profile == "mode" && states.size() >= 3) {
    const FrequencyFit f = fit_frequency(states, geo, cfg.init.mode);
    summary["dispersion"] = {{"mode", f.mode},        {"omega", f.omega},       {"expected", f.expected},
                             {"rel_error", f.rel_error}, {"tolerance", 1e-4}, {"pass", f.rel_error <= 1e-4}};
  }
  write_json(out / "summary.json", summary);
  write_json(out / "smoothing.json", smoothing_report(cfg, states, geo));
  std::cout << "capwave: " << steps << " steps, outputs in " << out.string() << "\n";
  return Exit::ok;
}

// ---------------------------------------------------------------------------
// verify

int run_verify(const std::string& which, const std::string& out_path) {
  const auto& known = verify::suite_names();
  std::vector<std::string> names;
  if (which == "all")
    names = known;
  else if (std::find(known.begin(), known.end(), which) != known.end())
    names = {which};
  else
    throw ValidationError("unknown suite '" + which + "' (expected dno, calculus, symbols, smoothing or all)");

  json report = json::object();
  std::vector<std::string> failures;
  for (const auto& name : names) {
    const verify::Suite suite = verify::run_suite(name);
    report[name] = verify::to_json(suite);
    for (const auto& c : suite)
      if (!c.pass) failures.push_back(name + "/" + c.name);
  }
  report["pass"] = failures.empty();
  if (out_path.empty())
    std::cout << report.dump(2) << "\n";
  else
    write_json(out_path, report);
  for (const auto& f : failures) std::cerr << "capwave: check failed: " << f << "\n";
  return failures.empty() ? Exit::ok : Exit::failed;
}

// ---------------------------------------------------------------------------
// dno-test

int run_dno_test(const std::string& config_path, const std::string& out_override) {
  const RunConfig cfg = parse_run_config(KeyValues::parse_file(config_path));
  const fs::path out = out_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_override);
  fs::create_directories(out);
  const Grid g = cfg.grid();
  const Geometry geo = cfg.geometry();
  const double h = geo.depth;

  // Flat surface: k tanh(k h) per mode.
  double worst = 0.0;
  const int kmax = std::min(20, g.n() / 2 - 1);
  for (int k = 1; k <= kmax; ++k) {
    const double xi = k * g.dxi();
    const Field psi = Field::from_function(g, [xi](double x) { return std::cos(xi * x); });
    const CVec c = dirichlet_neumann(Field(g), psi, geo, cfg.nz).spectrum();
    worst = std::max(worst, std::abs(c[k].real() / 0.5 - xi * std::tanh(xi * h)) / (xi * std::tanh(xi * h)));
  }

  const WaveState s0 = initial_state(cfg);
  const Field psi = Field::from_function(g, [&](double x) { return std::sin(g.dxi() * x); });
  const StripSolution sol = solve_strip(s0.eta, psi, geo, cfg.nz);
  const Field G = dn_trace(sol, psi);
  const double pos = inner(G, psi).real();
  json rep = {{"n", g.n()},
              {"nz", cfg.nz},
              {"depth", h},
              {"flat_oracle", {{"kmax", kmax}, {"max_rel_error", worst}, {"tolerance", 1e-8}}},
              {"surface", {{"G_psi_l2", l2_norm(G)}, {"psi_G_psi", pos}, {"mean", std::abs(G.spectrum()[0])}}}};
  bool pass = worst <= 1e-8 && pos >= 0.0;
  if (geo.kind == Geometry::Kind::flat_bottom) {
    const CancellationReport c = cancellation(s0.eta, psi, geo, cfg.nz);
    rep["cancellation"] = {{"residual", c.residual}, {"dxV_norm", c.reference}};
  }
  rep["pass"] = pass;
  write_json(out / "dno.json", rep);
  std::ofstream f(out / "strip.csv");
  write_strip_csv(sol, f);
  std::cout << rep.dump(2) << "\n";
  return pass ? Exit::ok : Exit::failed;
}

// ---------------------------------------------------------------------------
// report

int run_report(const std::string& dir) {
  const fs::path d(dir);
  if (!fs::is_directory(d)) throw ValidationError("report: not a directory: " + dir);
  bool any = false;
  std::cout << "run directory " << d.string() << "\n";
  if (fs::exists(d / "ABORTED")) {
    std::ifstream f(d / "ABORTED");
    std::string why;
    std::getline(f, why);
    std::cout << "  ABORTED: " << why << "\n";
    any = true;
  }
  if (fs::exists(d / "summary.json")) {
    const json s = read_json(d / "summary.json");
    std::cout << "  steps " << s.at("steps") << ", dt " << s.at("dt") << ", T " << s.at("T") << "\n"
              << "  energy drift (rel) " << s.at("energy_drift_rel") << ", mass drift (rel) " << s.at("mass_drift_rel")
              << "\n"
              << "  monitor M0 " << s.at("monitor").at("M0") << ", M(T) " << s.at("monitor").at("M_T") << ", slope "
              << s.at("monitor").at("slope") << "\n";
    if (s.contains("dispersion")) {
      const json& f = s.at("dispersion");
      std::cout << "  dispersion mode " << f.at("mode") << ": omega " << f.at("omega") << " expected "
                << f.at("expected") << " rel error " << f.at("rel_error") << "\n";
    }
    any = true;
  }
  if (fs::exists(d / "smoothing.json")) {
    const json s = read_json(d / "smoothing.json");
    std::cout << "  smoothing: delta " << s.at("delta") << ", eps_doi " << s.at("eps_doi") << ", K_measured "
              << s.at("K_measured") << "\n"
              << "  kato integral weighted " << s.at("kato_integral").at("weighted") << ", unweighted "
              << s.at("kato_integral").at("unweighted") << "\n"
              << "  garding a " << s.at("garding").at("a") << ", A " << s.at("garding").at("A") << "\n";
    any = true;
  }
  if (fs::exists(d / "dno.json")) {
    const json s = read_json(d / "dno.json");
    std::cout << "  dno flat oracle max rel error " << s.at("flat_oracle").at("max_rel_error") << ", pass "
              << s.at("pass") << "\n";
    any = true;
  }
  if (fs::exists(d / "trajectory.csv")) {
    std::ifstream f(d / "trajectory.csv");
    const auto rows = std::count(std::istreambuf_iterator<char>(f), {}, '\n') - 1;
    std::cout << "  trajectory rows " << rows << "\n";
    any = true;
  }
  if (!any) throw ValidationError("report: no capwave outputs in " + dir);
  return Exit::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capwave: gravity-capillary water waves, paradifferential diagnostics"};
  app.require_subcommand(1);
  std::string config, out, suite, dir;

  auto* sim = app.add_subcommand("simulate", "run an evolution from a config file");
  sim->add_option("config", config, "config file")->required();
  sim->add_option("-o,--out", out, "output directory (overrides output.dir)");

  auto* ver = app.add_subcommand("verify", "run an oracle suite: dno, calculus, symbols, smoothing or all");
  ver->add_option("suite", suite, "suite name")->required();
  ver->add_option("-o,--out", out, "write the JSON summary here instead of stdout");

  auto* dno = app.add_subcommand("dno-test", "Dirichlet-Neumann checks on the configured grid and geometry");
  dno->add_option("config", config, "config file")->required();
  dno->add_option("-o,--out", out, "output directory (overrides output.dir)");

  auto* rep = app.add_subcommand("report", "summarize the outputs in a run directory");
  rep->add_option("dir", dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::validation;
  }

  try {
    check_thread_env();
    if (*sim) return run_simulate(config, out);
    if (*ver) return run_verify(suite, out);
    if (*dno) return run_dno_test(config, out);
    if (*rep) return run_report(dir);
  } catch (const ValidationError& e) {
    std::cerr << "capwave: " << e.what() << "\n";
    return Exit::validation;
  } catch (const json::exception& e) {
    std::cerr << "capwave: malformed output file: " << e.what() << "\n";
    return Exit::validation;
  } catch (const std::exception& e) {
    std::cerr << "capwave: " << e.what() << "\n";
    return Exit::aborted;
  }
  return Exit::validation;
}
