#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diracflow/cliutil.hpp"
#include "diracflow/complex.hpp"
#include "diracflow/diagnostics.hpp"
#include "diracflow/flow.hpp"
#include "diracflow/operators.hpp"
#include "diracflow/oracles.hpp"
#include "diracflow/spectral.hpp"

namespace diracflow {
namespace {

// %g rendering with eigenvalues snapped to zero below display precision.
std::string fmt_eig(double x) {
  if (std::abs(x) < 1e-12) x = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

OrientedComplex load_complex(const std::string& path) {
  Graph g = parse_graph_file(path);
  if (g.vertices.empty()) throw UsageError("graph file " + path + " declares no vertices");
  return build_complex(g);
}

// Flags shared by flow and diagnose; a value wins over the config file only
// when its flag was actually given.
struct CommonFlags {
  std::string config_path;
  std::string graph;
  std::string output_dir = ".";
  double beta = 0.0;
  double t_end = 10.0;
  double h = 1e-3;
  std::vector<double> gamma;
  std::vector<double> flow_poly;
  std::vector<std::string> checks;
  std::uint64_t seed = 0;
  int snapshot_every = 10;
  bool no_unitary = false;

  CLI::Option* graph_o = nullptr;
  CLI::Option* beta_o = nullptr;
  CLI::Option* t_end_o = nullptr;
  CLI::Option* h_o = nullptr;
  CLI::Option* gamma_o = nullptr;
  CLI::Option* poly_o = nullptr;
  CLI::Option* checks_o = nullptr;
  CLI::Option* seed_o = nullptr;
  CLI::Option* snap_o = nullptr;
  CLI::Option* no_unitary_o = nullptr;
  CLI::Option* outdir_o = nullptr;

  void attach(CLI::App* cmd, bool with_checks) {
    graph_o = cmd->add_option("graph", graph, "graph file (overrides config)");
    cmd->add_option("--config", config_path, "JSON run configuration");
    beta_o = cmd->add_option("--beta", beta, "deformation parameter");
    gamma_o = cmd->add_option("--gamma", gamma, "per-degree couplings")->delimiter(',');
    t_end_o = cmd->add_option("--t-end", t_end, "integration endpoint (nonzero, may be negative)");
    h_o = cmd->add_option("--h", h, "step size");
    poly_o = cmd->add_option("--flow-poly", flow_poly, "higher-flow polynomial coefficients")->delimiter(',');
    if (with_checks)
      checks_o = cmd->add_option("--checks", checks, "check groups, or 'all'")->delimiter(',');
    seed_o = cmd->add_option("--seed", seed, "seed for randomized pieces");
    snap_o = cmd->add_option("--snapshot-every", snapshot_every, "record every k-th step");
    no_unitary_o = cmd->add_flag("--no-unitary", no_unitary, "do not carry the conjugating unitary");
    outdir_o = cmd->add_option("--output-dir", output_dir, "directory for output files");
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config_path.empty()) c = load_run_config(config_path);
    if (graph_o->count()) c.graph_path = graph;
    if (beta_o->count()) c.beta = beta;
    if (gamma_o->count()) c.gamma = gamma;
    if (t_end_o->count()) c.t_end = t_end;
    if (h_o->count()) c.h = h;
    if (poly_o->count()) c.flow_poly = flow_poly;
    if (checks_o && checks_o->count()) c.checks = checks;
    if (seed_o->count()) c.seed = seed;
    if (snap_o->count()) c.snapshot_every = snapshot_every;
    if (no_unitary_o->count()) c.with_unitary = false;
    if (outdir_o->count()) c.output_dir = output_dir;
    validate_run_config(c);
    if (c.graph_path.empty())
      throw UsageError("no graph given (positional argument or config graph_path)");
    return c;
  }
};

int cmd_build(const std::string& graph_path, const std::vector<double>& gamma,
              const std::string& dump_path) {
  OrientedComplex c = load_complex(graph_path);
  GradedOperator D = dirac(c, gamma);
  std::vector<double> spec = sorted_spectrum(D.m);

  std::string line = "f=(";
  for (std::size_t i = 0; i < c.f_vector.size(); ++i) {
    if (i) line += ",";
    line += std::to_string(c.f_vector[i]);
  }
  line += ") chi=" + std::to_string(euler_characteristic(c)) + " spec=[";
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (i) line += ", ";
    line += fmt_eig(spec[i]);
  }
  line += "]";
  std::cout << line << "\n";

  if (!dump_path.empty()) {
    nlohmann::json canonical = {{"cmd", "build"}, {"graph_path", graph_path}, {"gamma", gamma}};
    nlohmann::json j = dump_matrix(D);
    j["config_hash"] = hash_hex(config_hash(canonical));
    write_text_file(dump_path, j.dump(2) + "\n");
  }
  return 0;
}

// Standard series filtered down to the configured selection, pinned order.
std::vector<Observer> select_observers(const FlowState& initial,
                                       const std::vector<std::string>& wanted) {
  std::vector<Observer> all = standard_observers(initial);
  if (wanted.empty()) return all;
  std::vector<Observer> out;
  for (const auto& o : all) {
    std::string key = o.name;
    if (key == "str_U_re" || key == "str_U_im") key = "str_U";
    if (std::find(wanted.begin(), wanted.end(), key) != wanted.end()) out.push_back(o);
  }
  return out;
}

std::string observers_csv(const Trajectory& traj, const nlohmann::json& canonical) {
  std::ostringstream out;
  out << config_hash_line(canonical);
  out << "t";
  for (const auto& name : traj.observer_names) out << "," << name;
  out << "\n";
  const auto ts = traj.times();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out << fmt17(ts[i]);
    for (double v : traj.observer_rows[i]) out << "," << fmt17(v);
    out << "\n";
  }
  return out.str();
}

nlohmann::json trajectory_json(const Trajectory& traj, const RunConfig& cfg) {
  const nlohmann::json canonical = run_config_json(cfg);
  nlohmann::json j;
  j["config_hash"] = hash_hex(config_hash(canonical));
  j["config"] = canonical;
  std::vector<int> f;
  for (int p = 0; p < traj.front().grading().degrees(); ++p)
    f.push_back(traj.front().grading().block_size(p));
  j["f_vector"] = f;
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : traj.snapshots) {
    nlohmann::json e;
    e["t"] = s.t;
    e["d"] = dump_matrix(s.d);
    e["b"] = dump_matrix(s.b);
    snaps.push_back(std::move(e));
  }
  j["snapshots"] = std::move(snaps);
  return j;
}

int cmd_flow(const CommonFlags& flags) {
  RunConfig cfg = flags.resolve();
  OrientedComplex c = load_complex(cfg.graph_path);
  FlowState s0 = initial_state(c, cfg.beta, cfg.gamma, cfg.with_unitary);
  EvolveOptions opts;
  opts.snapshot_every = cfg.snapshot_every;
  opts.flow_poly = cfg.flow_poly;
  Trajectory traj = evolve(s0, cfg.t_end, cfg.h, select_observers(s0, cfg.observers), opts);

  const nlohmann::json canonical = run_config_json(cfg);
  const std::string csv_path = output_path(cfg.output_dir, "observers.csv");
  const std::string json_path = output_path(cfg.output_dir, "run.json");
  write_text_file(csv_path, observers_csv(traj, canonical));
  write_text_file(json_path, trajectory_json(traj, cfg).dump() + "\n");

  double norm_d = 0.0;
  for (int i = 0; i < traj.back().d.m.size(); ++i)
    norm_d = std::max(norm_d, std::abs(traj.back().d.m.data()[i]));
  std::printf("wrote %s and %s (%zu snapshots, final max|d| = %.3e)\n", csv_path.c_str(),
              json_path.c_str(), traj.snapshots.size(), norm_d);
  return 0;
}

int cmd_diagnose(const CommonFlags& flags) {
  RunConfig cfg = flags.resolve();
  OrientedComplex c = load_complex(cfg.graph_path);
  DiagnoseSettings ds;
  ds.beta = cfg.beta;
  ds.gamma = cfg.gamma;
  ds.t_end = cfg.t_end;
  ds.h = cfg.h;
  ds.snapshot_every = cfg.snapshot_every;
  ds.with_unitary = cfg.with_unitary;
  ds.flow_poly = cfg.flow_poly;
  ds.checks = cfg.checks;
  DiagnosticsReport report = run_all_checks(c, ds);

  const nlohmann::json canonical = run_config_json(cfg);
  nlohmann::json j = report_json(report);
  j["config_hash"] = hash_hex(config_hash(canonical));
  j["config"] = canonical;
  write_text_file(output_path(cfg.output_dir, "report.json"), j.dump(2) + "\n");
  const std::string text = report_text(report);
  write_text_file(output_path(cfg.output_dir, "report.txt"),
                  config_hash_line(canonical) + text);
  write_text_file(output_path(cfg.output_dir, "series.csv"),
                  config_hash_line(canonical) + series_csv(report));

  std::cout << text;
  int failed = 0;
  for (const auto& chk : report.checks)
    if (!chk.skipped && !chk.pass) ++failed;
  if (failed > 0)
    throw CheckFailure(std::to_string(failed) + " check(s) failed");
  return 0;
}

int cmd_oracle_k2(double t_end, double h, int every, const std::string& compare_path,
                  const std::string& output_dir) {
  if (!(h > 0)) throw UsageError("step size h must be positive");
  if (!(t_end > 0)) throw UsageError("t_end must be positive");
  if (every < 1) throw UsageError("--every must be at least 1");

  nlohmann::json canonical = {{"cmd", "oracle-k2"}, {"t_end", t_end}, {"h", h}, {"every", every}};
  std::ostringstream csv;
  csv << config_hash_line(canonical) << "t,d,b\n";
  const long total = std::lround(t_end / h);
  for (long i = 0; i <= total; i += every) {
    K2State s = k2_closed_form(i * h);
    csv << fmt17(s.t) << "," << fmt17(s.d) << "," << fmt17(s.b) << "\n";
  }
  write_text_file(output_path(output_dir, "k2_closed.csv"), csv.str());

  K2Inflection infl = k2_inflection();
  std::printf("closed form written; d-extremum at t*=%.9f slope=%.9f (half-speed %.9f)\n",
              infl.t_star_numeric, infl.slope_numeric, infl.slope_star);

  if (!compare_path.empty()) {
    nlohmann::json run;
    try {
      run = nlohmann::json::parse(read_text_file(compare_path));
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError("trajectory file " + compare_path + " is not valid JSON: " + e.what());
    }
    if (!run.contains("snapshots") || !run["snapshots"].is_array() || run["snapshots"].empty())
      throw UsageError("trajectory file has no snapshots");
    if (run.contains("config") && run["config"].contains("beta") &&
        run["config"]["beta"].get<double>() != 0)
      throw UsageError("closed-form comparison needs a beta=0 trajectory");
    double max_dev = 0.0;
    for (const auto& snap : run["snapshots"]) {
      GradedOperator d = load_matrix(snap["d"]);
      GradedOperator b = load_matrix(snap["b"]);
      if (d.dim() != 3 || d.grading.degrees() != 2 || d.grading.block_size(0) != 2)
        throw UsageError("trajectory is not a two-point-graph run");
      const double t = snap["t"].get<double>();
      K2State cf = k2_closed_form(t);
      max_dev = std::max(max_dev, std::abs(std::abs(d.m(2, 0)) - cf.d));
      max_dev = std::max(max_dev, std::abs(std::abs(b.m(0, 0)) - cf.b));
    }
    std::printf("max deviation: %.6e\n", max_dev);
  }
  return 0;
}

int cmd_oracle_k3(double gamma0, double gamma1, double beta, double t_end, double h,
                  bool quad, const std::string& output_dir) {
  if (!(h > 0)) throw UsageError("step size h must be positive");
  if (!(t_end > 0)) throw UsageError("t_end must be positive");
  K3Comparison cmp = k3_compare_reduced_full(gamma0, gamma1, beta, t_end, h, quad);
  nlohmann::json canonical = {{"cmd", "oracle-k3"}, {"gamma0", gamma0}, {"gamma1", gamma1},
                              {"beta", beta},       {"t_end", t_end},   {"h", h},
                              {"quad", quad}};
  nlohmann::json j;
  j["config_hash"] = hash_hex(config_hash(canonical));
  j["gamma0"] = gamma0;
  j["gamma1"] = gamma1;
  j["beta"] = beta;
  j["t_end"] = t_end;
  j["h"] = h;
  j["quad"] = quad;
  j["max_gap"] = cmp.max_gap;
  j["final_gap"] = cmp.final_gap;
  write_text_file(output_path(output_dir, "k3_oracle.json"), j.dump(2) + "\n");
  std::printf("reduced vs full: max gap = %.6e, final gap = %.6e\n", cmp.max_gap,
              cmp.final_gap);
  return 0;
}

int cmd_oracle_circle(int n, double t_end, double h, int every,
                      const std::string& output_dir) {
  if (n < 1) throw UsageError("--n must be at least 1");
  if (!(h > 0)) throw UsageError("step size h must be positive");
  if (!(t_end > 0)) throw UsageError("t_end must be positive");
  CircleModelState s0 = circle_model_init(n);
  CircleTrajectory traj = circle_model_evolve(s0, t_end, h, every);

  nlohmann::json canonical = {{"cmd", "oracle-circle"}, {"n", n}, {"t_end", t_end},
                              {"h", h},                 {"every", every}};
  std::ostringstream csv;
  csv << config_hash_line(canonical) << "t";
  for (const auto& name : traj.observer_names) csv << "," << name;
  csv << "\n";
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    csv << fmt17(traj.snapshots[i].t);
    for (double v : traj.observer_rows[i]) csv << "," << fmt17(v);
    csv << "\n";
  }
  write_text_file(output_path(output_dir, "circle_oracle.csv"), csv.str());

  double max_invariant = 0.0;
  for (const auto& row : traj.observer_rows) max_invariant = std::max(max_invariant, row[1]);
  std::printf("final ||A|| = %.6e, max ||BA+AC|| = %.6e\n", traj.observer_rows.back()[0],
              max_invariant);
  return 0;
}

int cmd_zeta_dirac(const std::string& graph_path, double s_re, double s_im,
                   const std::vector<double>& gamma, const std::string& output_dir,
                   bool write_file) {
  OrientedComplex c = load_complex(graph_path);
  GradedOperator D = dirac(c, gamma);
  ZetaSpec zs = zeta_spectrum(D);
  cplx val = dirac_zeta(zs, cplx(s_re, s_im));
  std::printf("zeta(%g%+gi): re=%.15g im=%.15g\n", s_re, s_im, val.real(), val.imag());
  if (write_file) {
    nlohmann::json canonical = {{"cmd", "zeta-dirac"},
                                {"graph_path", graph_path},
                                {"s", {s_re, s_im}},
                                {"gamma", gamma}};
    nlohmann::json j;
    j["config_hash"] = hash_hex(config_hash(canonical));
    j["s"] = {s_re, s_im};
    j["zeta"] = {val.real(), val.imag()};
    j["positive_eigenvalues"] = zs.positive_eigenvalues;
    write_text_file(output_path(output_dir, "zeta.json"), j.dump(2) + "\n");
  }
  return 0;
}

int cmd_zeta_circle(int n, bool grid, double s_re, double s_im, double re_lo, double re_hi,
                    double im_lo, double im_hi, double step, const std::string& exponent,
                    const std::string& output_dir) {
  ZetaExponent exp_kind;
  if (exponent == "printed")
    exp_kind = ZetaExponent::as_printed;
  else if (exponent == "spectral")
    exp_kind = ZetaExponent::spectral;
  else
    throw UsageError("--exponent must be 'printed' or 'spectral'");

  if (!grid) {
    cplx printed = circle_graph_zeta(n, cplx(s_re, s_im), ZetaExponent::as_printed);
    cplx spectral = circle_graph_zeta(n, cplx(s_re, s_im), ZetaExponent::spectral);
    std::printf("zeta_C%d(%g%+gi): printed re=%.15g im=%.15g | spectral re=%.15g im=%.15g\n",
                n, s_re, s_im, printed.real(), printed.imag(), spectral.real(),
                spectral.imag());
    return 0;
  }

  nlohmann::json canonical = {{"cmd", "zeta-circle-grid"}, {"n", n},         {"re_lo", re_lo},
                              {"re_hi", re_hi},            {"im_lo", im_lo}, {"im_hi", im_hi},
                              {"step", step},              {"exponent", exponent}};
  auto pts = zeta_grid(n, re_lo, re_hi, im_lo, im_hi, step, exp_kind, thread_budget());
  write_text_file(output_path(output_dir, "zeta_grid.csv"),
                  config_hash_line(canonical) + zeta_grid_csv(pts));
  std::printf("wrote zeta_grid.csv (%zu points)\n", pts.size());
  return 0;
}

int cmd_wave(const std::string& graph_path, double t_end, int samples,
             std::uint64_t seed, bool seeded, bool project_kernel,
             const std::string& output_dir) {
  if (samples < 2) throw UsageError("--samples must be at least 2");
  if (t_end <= 0) throw UsageError("t_end must be positive");
  OrientedComplex c = load_complex(graph_path);
  GradedOperator L = laplacian(dirac(c));
  const int n = L.dim();

  Vector u0 = Vector::Zero(n), v0 = Vector::Zero(n);
  if (seeded) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < n; ++i) {
      u0[i] = cplx(gauss(rng), gauss(rng));
      v0[i] = cplx(gauss(rng), gauss(rng));
    }
    u0 /= u0.norm();
    v0 /= v0.norm();
  } else {
    u0[0] = 1.0;
  }

  std::vector<double> times, energies;
  double drift = 0.0, e0 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = t_end * i / (samples - 1);
    WaveSolution w = wave_solve(L, u0, v0, t, project_kernel);
    const double e = wave_energy(L, w.u, w.v);
    if (i == 0) e0 = e;
    drift = std::max(drift, std::abs(e - e0));
    times.push_back(t);
    energies.push_back(e);
  }

  nlohmann::json canonical = {{"cmd", "wave"},     {"graph_path", graph_path},
                              {"t_end", t_end},    {"samples", samples},
                              {"seed", seed},      {"seeded", seeded},
                              {"project_kernel", project_kernel}};
  nlohmann::json j;
  j["config_hash"] = hash_hex(config_hash(canonical));
  j["times"] = times;
  j["energies"] = energies;
  j["energy_drift"] = drift;
  j["seeded"] = seeded;
  j["project_kernel"] = project_kernel;
  write_text_file(output_path(output_dir, "wave.json"), j.dump(2) + "\n");
  std::printf("energy drift over [0,%g]: %.6e\n", t_end, drift);
  return 0;
}

int cmd_distance(const std::string& graph_path, double t, int from, int to, double beta,
                 double h, int starts, std::uint64_t seed, const std::string& output_dir,
                 bool write_file) {
  if (!(h > 0)) throw UsageError("step size h must be positive");
  if (starts < 1) throw UsageError("--starts must be at least 1");
  OrientedComplex c = load_complex(graph_path);
  FlowState s = initial_state(c, beta, {}, false);
  if (t != 0) {
    EvolveOptions opts;
    opts.snapshot_every = 1 << 30;
    s = evolve(s, t, h, {}, opts).back();
  }
  GradedOperator C = reconstruct_C(s);
  double dist = connes_distance(C, c, from, to, starts, seed);
  std::printf("d(%d, %d) = %.6g\n", from, to, dist);

  if (write_file) {
    nlohmann::json canonical = {{"cmd", "distance"}, {"graph_path", graph_path},
                                {"t", t},            {"from", from},
                                {"to", to},          {"beta", beta},
                                {"h", h},            {"starts", starts},
                                {"seed", seed}};
    nlohmann::json j;
    j["config_hash"] = hash_hex(config_hash(canonical));
    j["t"] = t;
    j["from"] = from;
    j["to"] = to;
    j["beta"] = beta;
    j["distance"] = std::isinf(dist) ? nlohmann::json("inf") : nlohmann::json(dist);
    write_text_file(output_path(output_dir, "distance.json"), j.dump(2) + "\n");
  }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Isospectral deformation toolkit for graph Dirac operators"};
  app.require_subcommand(1);
  // --h is a real option (step size), so help is long-form only, everywhere.
  app.set_help_flag("--help", "print help and exit");

  // build
  auto* build = app.add_subcommand("build", "parse a graph, print f-vector, chi, and D(0) spectrum");
  std::string build_graph, build_dump;
  std::vector<double> build_gamma;
  build->add_option("graph", build_graph, "graph file")->required();
  build->add_option("--gamma", build_gamma, "per-degree couplings")->delimiter(',');
  build->add_option("--dump", build_dump, "write D(0) as JSON to this path");

  // flow
  auto* flow = app.add_subcommand("flow", "integrate the deformation, write observers and snapshots");
  CommonFlags flow_flags;
  flow_flags.attach(flow, false);

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "run invariant checks, write a report");
  CommonFlags diag_flags;
  diag_flags.attach(diag, true);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "closed-form and reduced-system references");
  oracle->require_subcommand(1);
  auto* ok2 = oracle->add_subcommand("k2", "two-point closed form, optional trajectory comparison");
  double ok2_t_end = 3.0, ok2_h = 1e-3;
  int ok2_every = 10;
  std::string ok2_compare, ok2_outdir = ".";
  ok2->add_option("--t-end", ok2_t_end, "endpoint");
  ok2->add_option("--h", ok2_h, "grid step");
  ok2->add_option("--every", ok2_every, "write every k-th point");
  ok2->add_option("--compare", ok2_compare, "run.json to diff against the closed form");
  ok2->add_option("--output-dir", ok2_outdir, "directory for output files");

  auto* ok3 = oracle->add_subcommand("k3", "triangle symmetric ansatz vs full 7x7 flow");
  double ok3_g0 = 1.0, ok3_g1 = 1.0, ok3_beta = 0.0, ok3_t_end = 3.0, ok3_h = 1e-3;
  bool ok3_quad = false;
  std::string ok3_outdir = ".";
  ok3->add_option("--gamma0", ok3_g0, "vertex-to-edge coupling");
  ok3->add_option("--gamma1", ok3_g1, "edge-to-triangle coupling");
  ok3->add_option("--beta", ok3_beta, "deformation parameter");
  ok3->add_option("--t-end", ok3_t_end, "endpoint");
  ok3->add_option("--h", ok3_h, "step size");
  ok3->add_flag("--quad", ok3_quad, "integrate both systems in quad precision");
  ok3->add_option("--output-dir", ok3_outdir, "directory for output files");

  auto* ocirc = oracle->add_subcommand("circle", "truncated Fourier circle model");
  int ocirc_n = 4, ocirc_every = 10;
  double ocirc_t_end = 10.0, ocirc_h = 1e-3;
  std::string ocirc_outdir = ".";
  ocirc->add_option("--n", ocirc_n, "frequency cutoff N");
  ocirc->add_option("--t-end", ocirc_t_end, "endpoint");
  ocirc->add_option("--h", ocirc_h, "step size");
  ocirc->add_option("--every", ocirc_every, "record every k-th step");
  ocirc->add_option("--output-dir", ocirc_outdir, "directory for output files");

  // zeta
  auto* zeta = app.add_subcommand("zeta", "spectral zeta values and grids");
  zeta->require_subcommand(1);
  auto* zd = zeta->add_subcommand("dirac", "zeta of a graph Dirac operator at one point");
  std::string zd_graph, zd_outdir = ".";
  double zd_sre = 2.0, zd_sim = 0.0;
  std::vector<double> zd_gamma;
  bool zd_write = false;
  zd->add_option("graph", zd_graph, "graph file")->required();
  zd->add_option("--s-re", zd_sre, "Re s");
  zd->add_option("--s-im", zd_sim, "Im s");
  zd->add_option("--gamma", zd_gamma, "per-degree couplings")->delimiter(',');
  zd->add_flag("--write", zd_write, "also write zeta.json");
  zd->add_option("--output-dir", zd_outdir, "directory for output files");

  auto* zc = zeta->add_subcommand("circle-graph", "cycle-graph zeta, single point or grid");
  int zc_n = 500;
  bool zc_grid = false;
  double zc_sre = 2.0, zc_sim = 0.0;
  double zc_relo = -1.5, zc_rehi = 1.5, zc_imlo = 0.0, zc_imhi = 18.0, zc_step = 0.05;
  std::string zc_exponent = "printed", zc_outdir = ".";
  zc->add_option("--n", zc_n, "cycle length");
  zc->add_flag("--grid", zc_grid, "evaluate over a rectangular window, write CSV");
  zc->add_option("--s-re", zc_sre, "Re s (point mode)");
  zc->add_option("--s-im", zc_sim, "Im s (point mode)");
  zc->add_option("--re-lo", zc_relo, "window: lowest Re s");
  zc->add_option("--re-hi", zc_rehi, "window: highest Re s");
  zc->add_option("--im-lo", zc_imlo, "window: lowest Im s");
  zc->add_option("--im-hi", zc_imhi, "window: highest Im s");
  zc->add_option("--step", zc_step, "window grid step");
  zc->add_option("--exponent", zc_exponent, "'printed' or 'spectral' eigenvalue convention");
  zc->add_option("--output-dir", zc_outdir, "directory for output files");

  // wave
  auto* wave = app.add_subcommand("wave", "solve the half-wave equation on the Laplacian");
  std::string wave_graph, wave_outdir = ".";
  double wave_t_end = 10.0;
  int wave_samples = 101;
  std::uint64_t wave_seed = 0;
  bool wave_project = false;
  wave->add_option("graph", wave_graph, "graph file")->required();
  wave->add_option("--t-end", wave_t_end, "endpoint");
  wave->add_option("--samples", wave_samples, "number of sample times");
  auto* wave_seed_o = wave->add_option("--seed", wave_seed, "random normalized u0, v0");
  wave->add_flag("--project-kernel", wave_project, "drop the kernel component of v0");
  wave->add_option("--output-dir", wave_outdir, "directory for output files");

  // distance
  auto* dist = app.add_subcommand("distance", "Connes distance between two vertices at time t");
  std::string dist_graph, dist_outdir = ".";
  double dist_t = 0.0, dist_beta = 0.0, dist_h = 1e-3;
  int dist_from = 0, dist_to = 0, dist_starts = 20;
  std::uint64_t dist_seed = 0;
  bool dist_write = false;
  dist->add_option("--graph", dist_graph, "graph file")->required();
  dist->add_option("--t", dist_t, "deformation time");
  dist->add_option("--from", dist_from, "first vertex label")->required();
  dist->add_option("--to", dist_to, "second vertex label")->required();
  dist->add_option("--beta", dist_beta, "deformation parameter");
  dist->add_option("--h", dist_h, "step size for the evolution to t");
  dist->add_option("--starts", dist_starts, "multi-start count for the search");
  dist->add_option("--seed", dist_seed, "seed for the random starts");
  dist->add_flag("--write", dist_write, "also write distance.json");
  dist->add_option("--output-dir", dist_outdir, "directory for output files");

  std::function<void(CLI::App*)> help_long_only = [&](CLI::App* a) {
    a->set_help_flag("--help", "print help and exit");
    for (auto* s : a->get_subcommands(std::function<bool(CLI::App*)>{}))
      help_long_only(s);
  };
  help_long_only(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (build->parsed()) return cmd_build(build_graph, build_gamma, build_dump);
    if (flow->parsed()) return cmd_flow(flow_flags);
    if (diag->parsed()) return cmd_diagnose(diag_flags);
    if (oracle->parsed()) {
      if (ok2->parsed()) return cmd_oracle_k2(ok2_t_end, ok2_h, ok2_every, ok2_compare, ok2_outdir);
      if (ok3->parsed())
        return cmd_oracle_k3(ok3_g0, ok3_g1, ok3_beta, ok3_t_end, ok3_h, ok3_quad, ok3_outdir);
      if (ocirc->parsed())
        return cmd_oracle_circle(ocirc_n, ocirc_t_end, ocirc_h, ocirc_every, ocirc_outdir);
    }
    if (zeta->parsed()) {
      if (zd->parsed())
        return cmd_zeta_dirac(zd_graph, zd_sre, zd_sim, zd_gamma, zd_outdir, zd_write);
      if (zc->parsed())
        return cmd_zeta_circle(zc_n, zc_grid, zc_sre, zc_sim, zc_relo, zc_rehi, zc_imlo,
                               zc_imhi, zc_step, zc_exponent, zc_outdir);
    }
    if (wave->parsed())
      return cmd_wave(wave_graph, wave_t_end, wave_samples, wave_seed,
                      wave_seed_o->count() > 0, wave_project, wave_outdir);
    if (dist->parsed())
      return cmd_distance(dist_graph, dist_t, dist_from, dist_to, dist_beta, dist_h,
                          dist_starts, dist_seed, dist_outdir, dist_write);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CheckFailure& e) {
    std::cerr << "check failure: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace
}  // namespace diracflow

int main(int argc, char** argv) { return diracflow::run(argc, argv); }
