// Command-line front end: one subcommand per analysis, plus validate and run for config files.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glvortex/glvortex.hpp"

namespace fs = std::filesystem;
using namespace glv;

namespace {

std::vector<double> parse_list(const std::string& s, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

// "r0:r1:n" -> n geometric radii
std::vector<double> parse_radii(const std::string& s) {
  const auto v = parse_list(s, ':');
  if (v.size() != 3 || v[2] < 2 || !(v[0] > 0.0 && v[1] > v[0])) throw InputError("radii must be r0:r1:n with 0 < r0 < r1, n >= 2");
  std::vector<double> r;
  const std::size_t n = std::size_t(v[2]);
  for (std::size_t i = 0; i < n; ++i) r.push_back(v[0] * std::pow(v[1] / v[0], double(i) / double(n - 1)));
  return r;
}

// Output to a file when a path is given, stdout otherwise.
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream(path, std::ios::binary) << content;
}

ExperimentConfig config_or_default(const std::string& path) {
  if (!path.empty()) return load_config(path);
  return parse_config("", "<defaults>");
}

Trajectory simulate_first(const ExperimentConfig& c) {
  if (c.ladder.empty()) throw InputError("empty epsilon ladder");
  const TorusGeometry g = c.geometry();
  return evolve(make_initial(g, c.ladder.front(), c.spec, {c.allow_underresolved}), c.integrator);
}

void print_diagnostics(const std::vector<Diagnostic>& d) {
  for (const auto& x : d) std::cerr << x.severity << ": " << x.key << ": " << x.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glvortex: parabolic Ginzburg-Landau experiments on flat tori"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "FFT worker threads (0 = library default)");

  // validate
  std::string cfg_path;
  auto* validate_cmd = app.add_subcommand("validate", "static checks of a config file");
  validate_cmd->add_option("config", cfg_path, "config file")->required();

  // run / simulate
  std::string out_dir;
  auto* run_cmd = app.add_subcommand("run", "simulation plus every enabled analysis");
  run_cmd->add_option("config", cfg_path, "config file")->required();
  run_cmd->add_option("-o,--output", out_dir, "output directory (overrides the config)");
  auto* sim_cmd = app.add_subcommand("simulate", "simulation only, analyses disabled");
  sim_cmd->add_option("config", cfg_path, "config file")->required();
  sim_cmd->add_option("-o,--output", out_dir, "output directory (overrides the config)");

  // monotonicity
  std::string center_s, radii_s, csv_out;
  double T = -1.0, tau = 1e-3;
  auto* mono_cmd = app.add_subcommand("monotonicity", "weighted-energy scan Z(R) at a space-time point");
  mono_cmd->add_option("-c,--config", cfg_path, "config file (first ladder epsilon is used)");
  mono_cmd->add_option("--center", center_s, "x,y[,z]")->required();
  mono_cmd->add_option("--T", T, "final time of the scan (default t_end)");
  mono_cmd->add_option("--radii", radii_s, "r0:r1:n")->required();
  mono_cmd->add_option("--tau", tau, "monotonicity slack factor");
  mono_cmd->add_option("-o,--output", csv_out, "CSV path (default stdout)");

  // hodge
  std::string snap_path, json_out;
  auto* hodge_cmd = app.add_subcommand("hodge", "Hodge decomposition of the current of a snapshot");
  hodge_cmd->add_option("--snapshot", snap_path, "snapshot file")->required();
  hodge_cmd->add_option("-o,--output", json_out, "JSON path (default stdout)");

  // gauge
  double t1 = -1.0, t2 = -1.0;
  auto* gauge_cmd = app.add_subcommand("gauge", "gauge splitting u = exp(i phi) w over a time window");
  gauge_cmd->add_option("-c,--config", cfg_path, "config file (first ladder epsilon is used)");
  gauge_cmd->add_option("--from", t1, "window start")->required();
  gauge_cmd->add_option("--to", t2, "window end")->required();
  gauge_cmd->add_option("-o,--output", out_dir, "directory for gauge.json and component snapshots")->required();

  // vortex
  std::string emit_path;
  auto* vortex_cmd = app.add_subcommand("vortex", "vortex filaments or points of a snapshot");
  vortex_cmd->add_option("--snapshot", snap_path, "snapshot file")->required();
  vortex_cmd->add_option("--emit", emit_path, "polyline JSON path (default stdout)");

  // clearing-out
  std::vector<double> sigmas;
  std::string ladder_s, factors_s = "4,8";
  auto* clear_cmd = app.add_subcommand("clearing-out", "weighted energy at probes down an epsilon ladder");
  clear_cmd->add_option("-c,--config", cfg_path, "config file for geometry, data and integrator");
  clear_cmd->add_option("--sigma", sigmas, "threshold(s) in (0,1)")->required();
  clear_cmd->add_option("--ladder", ladder_s, "decreasing epsilons, comma separated")->required();
  clear_cmd->add_option("--radius-factors", factors_s, "probe radii as multiples of epsilon");
  clear_cmd->add_option("-o,--output", out_dir, "directory for clearing_out.csv and .json")->required();

  // mcf-ring
  double r0 = 0.3, eps = 0.04, dt_factor = 0.2, length = 1.0;
  int grid = 128, stride = 4;
  auto* ring_cmd = app.add_subcommand("mcf-ring", "shrinking vortex ring against the circle solution");
  ring_cmd->add_option("--r0", r0, "initial radius");
  ring_cmd->add_option("--epsilon", eps, "epsilon");
  ring_cmd->add_option("--grid", grid, "nodes per axis");
  ring_cmd->add_option("--length", length, "torus side");
  ring_cmd->add_option("--dt-factor", dt_factor, "dt = dt_factor eps^2");
  ring_cmd->add_option("--stride", stride, "steps per snapshot");
  ring_cmd->add_option("-o,--output", csv_out, "CSV path (default stdout)");
  ring_cmd->add_option("--summary", json_out, "JSON summary path");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_fft_threads(threads);

  try {
    if (*validate_cmd) {
      const auto c = load_config(cfg_path);
      const auto d = validate(c);
      print_diagnostics(d);
      if (d.empty()) std::cout << "ok\n";
      return has_errors(d) ? 1 : 0;
    }

    if (*run_cmd || *sim_cmd) {
      ExperimentConfig c = load_config(cfg_path);
      if (!out_dir.empty()) c.output = out_dir;
      if (*sim_cmd) c.monotonicity = c.clearing_out = c.hodge = c.gauge = c.vortex = c.mcf = false;
      RunOptions opt;
      opt.log = &std::cerr;
      const auto r = run(c, opt);
      print_diagnostics(r.diagnostics);
      if (r.status != 3) std::cout << r.directory.string() << "\n";
      return r.status;
    }

    if (*mono_cmd) {
      ExperimentConfig c = config_or_default(cfg_path);
      const Trajectory traj = simulate_first(c);
      const auto xs = parse_list(center_s);
      if (int(xs.size()) != c.dim) throw InputError("--center needs one coordinate per dimension");
      Point x{0.0, 0.0, 0.0};
      for (std::size_t a = 0; a < xs.size(); ++a) x[a] = xs[a];
      const double t = T >= 0.0 ? T : traj.back().time;
      const auto led = monotonicity_scan(traj, SpaceTimePoint{x, t}, parse_radii(radii_s), tau);
      std::ostringstream os;
      led.write_csv(os);
      emit(csv_out, os.str());
      return led.monotone() ? 0 : 1;
    }

    if (*hodge_cmd) {
      emit(json_out, hodge_report(read_snapshot(snap_path)).dump(2) + "\n");
      return 0;
    }

    if (*gauge_cmd) {
      ExperimentConfig c = config_or_default(cfg_path);
      const Trajectory traj = simulate_first(c);
      const auto gr = gauge_decompose(traj, t1, t2);
      fs::create_directories(out_dir);
      std::ofstream(fs::path(out_dir) / "gauge.json") << gr.to_json().dump(2) << "\n";
      write_snapshot(fs::path(out_dir) / "u_h.glf", gr.u_h);
      for (std::size_t i = 0; i < gr.snapshots.size(); ++i) {
        const auto& s = gr.snapshots[i];
        ComplexField phi(s.w.geom, s.w.epsilon, s.time);
        for (std::size_t m = 0; m < phi.values.size(); ++m) phi.values[m] = cplx(s.phi[m], 0.0);
        write_snapshot(fs::path(out_dir) / ("w_" + std::to_string(i) + ".glf"), s.w);
        write_snapshot(fs::path(out_dir) / ("phi_" + std::to_string(i) + ".glf"), phi);
      }
      return 0;
    }

    if (*vortex_cmd) {
      const auto u = read_snapshot(snap_path);
      const auto vs = extract_vortex_set(u);
      emit(emit_path, vs.to_json().dump(2) + "\n");
      return 0;
    }

    if (*clear_cmd) {
      ClearingOutConfig cc;
      ExperimentConfig c = config_or_default(cfg_path);
      cc.dim = c.dim;
      cc.lengths = c.lengths;
      cc.grid = c.grid[0];
      cc.spec = c.spec;
      cc.t_end = c.integrator.t_end;
      cc.dt_factor = c.integrator.dt_factor;
      cc.ladder = parse_list(ladder_s);
      cc.sigmas = sigmas;
      cc.radius_factors = parse_list(factors_s);
      cc.allow_underresolved = c.allow_underresolved;
      const auto rep = clearing_out_experiment(cc);
      fs::create_directories(out_dir);
      std::ofstream csv(fs::path(out_dir) / "clearing_out.csv");
      rep.write_csv(csv);
      std::ofstream(fs::path(out_dir) / "clearing_out.json") << rep.summary().dump(2) << "\n";
      return 0;
    }

    if (*ring_cmd) {
      ExperimentConfig c = parse_config("", "<mcf-ring>");
      c.dim = 3;
      c.lengths = {length, length, length};
      c.grid = {std::size_t(grid), std::size_t(grid), std::size_t(grid)};
      c.spec = VortexRing{{0.5 * length, 0.5 * length, 0.5 * length}, r0, 2};
      c.integrator.t_end = 0.5 * r0 * r0;
      c.integrator.dt_factor = dt_factor;
      c.integrator.snapshot_stride = std::size_t(stride);
      c.ladder = {eps};
      const Trajectory traj = simulate_first(c);
      const auto tr = ring_mcf_compare(traj, r0);
      Trajectory window;
      for (std::size_t i = 0; i < traj.size(); ++i)
        if (traj.snapshots[i].time <= tr.window_end + 1e-12) window.push(traj.snapshots[i], traj.energies[i]);
      const auto br = brakke_diagnostic(window, RealGrid(c.geometry().node_count(), 1.0), 0.1, 2.0 * eps * eps);
      std::ostringstream os;
      os << "t,r_measured,r_exact,tube_energy,brakke_lhs,brakke_rhs\n";
      os.precision(12);
      for (std::size_t i = 0; i < tr.times.size(); ++i) {
        os << tr.times[i] << ',' << tr.radii[i] << ',' << tr.exact[i];
        const BrakkeSample* s = nullptr;
        for (const auto& b : br.samples)
          if (b.time == tr.times[i]) s = &b;
        if (s) os << ',' << s->nu_one << ',' << s->dnu << ',' << s->b() << '\n';
        else os << ",,,\n";
      }
      emit(csv_out, os.str());
      if (!json_out.empty()) emit(json_out, nlohmann::json{{"ring", tr.to_json()}, {"brakke", br.summary()}}.dump(2) + "\n");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
