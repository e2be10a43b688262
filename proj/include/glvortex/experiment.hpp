#ifndef GLVORTEX_EXPERIMENT_HPP
#define GLVORTEX_EXPERIMENT_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <fftw3.h>
#include <openssl/evp.h>
#include <json.hpp>

#include "glvortex/config.hpp"
#include "glvortex/dynamics.hpp"
#include "glvortex/energy.hpp"
#include "glvortex/hodge.hpp"
#include "glvortex/mcf.hpp"
#include "glvortex/snapshot_io.hpp"
#include "glvortex/vortex.hpp"
#include "glvortex/weighted_energy.hpp"

namespace glv {

inline constexpr const char* kVersion = "0.1.0";

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open for hashing: " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), std::streamsize(buf.size()));
    if (is.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), std::size_t(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

/// Writes files under a root directory and remembers them for the manifest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  const std::filesystem::path& root() const { return root_; }

  void text(const std::filesystem::path& rel, const std::string& content) {
    const auto p = prepare(rel);
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    os << content;
    if (!os) throw InputError("failed writing " + p.string());
    files_.push_back(rel);
  }

  void json(const std::filesystem::path& rel, const nlohmann::json& j) { text(rel, j.dump(2) + "\n"); }

  void csv(const std::filesystem::path& rel, const std::function<void(std::ostream&)>& body) {
    std::ostringstream os;
    body(os);
    text(rel, os.str());
  }

  void snapshot(const std::filesystem::path& rel, const ComplexField& f) {
    write_snapshot(prepare(rel), f);
    files_.push_back(rel);
  }

  nlohmann::json listing() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& rel : files_) {
      const auto p = root_ / rel;
      out.push_back({{"path", rel.generic_string()},
                     {"sha256", sha256_file(p)},
                     {"bytes", std::filesystem::file_size(p)}});
    }
    return out;
  }

 private:
  std::filesystem::path prepare(const std::filesystem::path& rel) {
    const auto p = root_ / rel;
    std::filesystem::create_directories(p.parent_path());
    return p;
  }

  std::filesystem::path root_;
  std::vector<std::filesystem::path> files_;
};

struct BlockRecord {
  std::string name;
  std::string scope;  // epsilon directory or "ladder"
  bool ok = true;
  std::string error;
  double seconds = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j{{"name", name}, {"scope", scope}, {"ok", ok}, {"seconds", seconds}};
    if (!ok) j["error"] = error;
    return j;
  }
};

struct RunOptions {
  int threads = 0;              // 0 leaves the FFT thread count alone
  std::ostream* log = nullptr;  // progress lines
};

struct RunResult {
  int status = 0;  // 0 ok, 1 some analysis failed, 2 a simulation failed, 3 invalid config
  std::filesystem::path directory;
  std::vector<Diagnostic> diagnostics;
  std::vector<BlockRecord> blocks;
  nlohmann::json manifest;
};

namespace detail {

inline std::string eps_dir_name(std::size_t i, double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "eps%02zu_%g", i, eps);
  return buf;
}

inline Point torus_centre(const TorusGeometry& g) {
  Point c{0.0, 0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) c[a] = 0.5 * g.length(a);
  return c;
}

/// Smooth compactly supported bump of radius inj/2 around the torus centre, peak 1.
inline RealGrid centred_bump(const TorusGeometry& g) {
  const Point c = torus_centre(g);
  const double rho = 0.5 * g.inj();
  RealGrid chi(g.node_count());
  for (std::size_t m = 0; m < chi.size(); ++m) {
    const double d = torus_distance(g, g.node_position(m), c) / rho;
    chi[m] = d < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - d * d)) : 0.0;
  }
  return chi;
}

inline std::vector<double> geometric(double a, double b, std::size_t n) {
  std::vector<double> r;
  for (std::size_t i = 0; i < n; ++i) r.push_back(a * std::pow(b / a, double(i) / double(n - 1)));
  return r;
}

}  // namespace detail

/// Hodge parts of the current of one snapshot: winding, part norms, orthogonality defects.
inline nlohmann::json hodge_report(const ComplexField& u) {
  const OneForm j = current(u);
  const auto parts = hodge_decompose(j);
  const auto def = hodge_defects(j, parts);
  const auto w = winding_from_gamma(u.geom, parts.gamma);
  return {{"time", u.time},
          {"winding_raw", w.raw},
          {"winding_integer", w.integer},
          {"gamma", parts.gamma},
          {"part_norms",
           {{"form", l2_norm(j)},
            {"exact", l2_norm(parts.exact_part())},
            {"coexact", l2_norm(parts.coexact_part())},
            {"harmonic", l2_norm(parts.harmonic_part())},
            {"nyquist", l2_norm(parts.zeta)}}},
          {"orthogonality_defects",
           {{"exact_coexact", def.exact_coexact},
            {"exact_harmonic", def.exact_harmonic},
            {"coexact_harmonic", def.coexact_harmonic},
            {"reconstruction", def.reconstruction}}}};
}

/// Simulation plus enabled analyses for every epsilon of the ladder. Each analysis block is
/// isolated: a failure is recorded in the manifest and the remaining blocks still run.
inline RunResult run(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  RunResult res;
  res.diagnostics = validate(cfg);
  res.directory = output_directory(cfg);
  if (has_errors(res.diagnostics)) {
    res.status = 3;
    return res;
  }
  if (opt.threads > 0) set_fft_threads(opt.threads);
  ArtifactWriter out(res.directory);
  out.text("config.ini", cfg.source);
  auto say = [&](const std::string& s) {
    if (opt.log) *opt.log << s << std::endl;
  };

  auto block = [&](const std::string& name, const std::string& scope, const std::function<void()>& body) {
    BlockRecord r{name, scope, true, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    say((r.ok ? "  ok     " : "  FAILED ") + scope + "/" + name + (r.ok ? "" : ": " + r.error));
    res.blocks.push_back(r);
    return r.ok;
  };

  const TorusGeometry g = cfg.geometry();
  const double h = g.max_spacing();
  const double T = cfg.integrator.t_end;
  std::vector<Probe> probes = default_probes(g, cfg.spec);
  std::vector<ClearingOutSample> clearing;
  nlohmann::json ladder = nlohmann::json::array();

  for (std::size_t li = 0; li < cfg.ladder.size(); ++li) {
    const double eps = cfg.ladder[li];
    const std::string dir = detail::eps_dir_name(li, eps);
    const std::filesystem::path d(dir);
    say("epsilon " + std::to_string(eps) + " -> " + dir);
    nlohmann::json summary{{"epsilon", eps}, {"directory", dir}};
    Trajectory traj;

    const bool sim_ok = block("simulate", dir, [&] {
      const ComplexField u0 = make_initial(g, eps, cfg.spec, {cfg.allow_underresolved});
      traj = evolve(u0, cfg.integrator);
      out.csv(d / "energy.csv", [&](std::ostream& os) {
        os << "t,energy,energy_normalized\n";
        os.precision(12);
        const double L = log_scale(eps);
        for (std::size_t i = 0; i < traj.size(); ++i)
          os << traj.snapshots[i].time << ',' << traj.energies[i] << ',' << traj.energies[i] / L << '\n';
      });
      nlohmann::json sim{{"snapshots", traj.size()},
                         {"dt", cfg.integrator.dt(eps)},
                         {"steps", cfg.integrator.step_count(eps)},
                         {"energy_initial", traj.energies.front()},
                         {"energy_final", traj.energies.back()},
                         {"m0", traj.energies.front() / log_scale(eps)},
                         {"max_modulus", traj.back().max_modulus()}};
      if (traj.size() >= 2) {
        sim["dissipation_one"] = dissipation_check(traj, RealGrid(g.node_count(), 1.0), "one").to_json();
        sim["dissipation_bump"] = dissipation_check(traj, detail::centred_bump(g), "bump").to_json();
      }
      out.json(d / "simulation.json", sim);
      summary["m0"] = sim["m0"];
      summary["energy_final_normalized"] = traj.energies.back() / log_scale(eps);
      if (cfg.save_snapshots == "all") {
        for (std::size_t i = 0; i < traj.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "snap_%05zu.glf", i);
          out.snapshot(d / "snapshots" / name, traj.snapshots[i]);
        }
      } else if (cfg.save_snapshots == "final") {
        out.snapshot(d / "snapshots" / "initial.glf", traj.front());
        out.snapshot(d / "snapshots" / "final.glf", traj.back());
      }
    });
    if (!sim_ok) {
      summary["status"] = "simulation failed";
      ladder.push_back(summary);
      continue;
    }

    if (cfg.monotonicity)
      block("monotonicity", dir, [&] {
        Point c = detail::torus_centre(g);
        for (std::size_t a = 0; a < cfg.mono_center.size(); ++a) c[a] = cfg.mono_center[a];
        const SpaceTimePoint z{c, T};
        const double r_max = cfg.mono_r_max > 0.0 ? cfg.mono_r_max : 0.9 * std::min({std::sqrt(T), 1.0, g.inj()});
        const double r_min = cfg.mono_r_min > 0.0 ? cfg.mono_r_min : std::max(2.0 * h, r_max / 8.0);
        const auto radii = snapshot_aligned_radii(traj, T, r_min, r_max, cfg.mono_radii);
        if (radii.size() < 2) throw RangeError("fewer than two snapshot-aligned radii; lower the snapshot stride");
        const auto led = monotonicity_scan(traj, z, radii, cfg.mono_tau);
        out.csv(d / "monotonicity.csv", [&](std::ostream& os) { led.write_csv(os); });
        nlohmann::json j = led.summary();
        j["time_integrated_identity"] = time_integrated_identity(traj, z).to_json();
        out.json(d / "monotonicity.json", j);
        summary["monotonicity"] = {{"monotone", led.monotone()}, {"derivative_mismatch", led.derivative_mismatch()}};
      });

    if (cfg.clearing_out)
      block("clearing_out", dir, [&] {
        const auto s = clearing_out_samples(traj, probes, cfg.radius_factors);
        ClearingOutReport rep;
        rep.samples = s;
        out.csv(d / "clearing_out.csv", [&](std::ostream& os) { rep.write_csv(os); });
        clearing.insert(clearing.end(), s.begin(), s.end());
      });

    if (cfg.hodge) {
      block("hodge", dir, [&] {
        const auto j = hodge_report(traj.back());
        out.json(d / "hodge.json", j);
        summary["winding"] = j["winding_integer"];
      });
      if (cfg.gauge)
        block("gauge", dir, [&] {
          const double t1 = cfg.gauge_t1 >= 0.0 ? cfg.gauge_t1 : 0.5 * T;
          const double t2 = cfg.gauge_t2 >= 0.0 ? cfg.gauge_t2 : T;
          const auto gr = gauge_decompose(traj, t1, t2);
          out.json(d / "gauge.json", gr.to_json());
          if (!gr.snapshots.empty()) summary["grad_w_lp_final"] = gr.snapshots.back().grad_w_lp;
        });
    }

    if (cfg.vortex)
      block("vortex", dir, [&] {
        const auto vs = extract_vortex_set(traj.back());
        out.json(d / "vortex.json", vs.to_json());
        summary["vortex_filaments"] = vs.filaments.size();
        summary["vortex_points"] = vs.points.size();
        std::vector<double> radii = cfg.density_radii;
        if (radii.empty()) {
          const double lo = std::max(2.0 * h, 2.0 * eps), hi = 0.5 * g.inj();
          if (lo < hi) radii = detail::geometric(lo, hi, 6);
        }
        if (radii.empty()) return;
        const auto led = energy_density(traj.back());
        out.csv(d / "density.csv", [&](std::ostream& os) {
          os << "probe,on_structure,x0,x1,x2,r,theta,theta_parabolic\n";
          os.precision(12);
          for (std::size_t p = 0; p < probes.size(); ++p) {
            const auto ds = density_scan(led, probes[p].x, radii);
            for (std::size_t i = 0; i < radii.size(); ++i)
              os << p << ',' << (probes[p].on_structure ? 1 : 0) << ',' << probes[p].x[0] << ',' << probes[p].x[1] << ','
                 << probes[p].x[2] << ',' << radii[i] << ',' << ds.theta[i] << ',' << ds.theta_parabolic[i] << '\n';
          }
        });
      });

    if (cfg.mcf)
      block("mcf", dir, [&] {
        const double from = cfg.brakke_from >= 0.0 ? cfg.brakke_from : 2.0 * eps * eps;
        const RealGrid one(g.node_count(), 1.0);
        nlohmann::json j;
        Trajectory window = traj;
        std::optional<RingTrack> tr;
        if (const auto* ring = std::get_if<VortexRing>(&cfg.spec)) {
          tr = ring_mcf_compare(traj, ring->radius);
          j["ring"] = tr->to_json();
          window = Trajectory{};
          for (std::size_t i = 0; i < traj.size(); ++i)
            if (traj.snapshots[i].time <= tr->window_end + 1e-12) window.push(traj.snapshots[i], traj.energies[i]);
        }
        const auto br = brakke_diagnostic(window, one, cfg.tau_brakke, from);
        j["brakke"] = br.summary();
        out.csv(d / "brakke.csv", [&](std::ostream& os) { br.write_csv(os); });
        if (tr) {
          out.csv(d / "mcf_ring.csv", [&](std::ostream& os) {
            os << "t,r_measured,r_exact,tube_energy,brakke_lhs,brakke_rhs\n";
            os.precision(12);
            for (std::size_t i = 0; i < tr->times.size(); ++i) {
              os << tr->times[i] << ',' << tr->radii[i] << ',' << tr->exact[i];
              const auto it = std::find_if(br.samples.begin(), br.samples.end(),
                                           [&](const BrakkeSample& s) { return s.time == tr->times[i]; });
              if (it != br.samples.end()) os << ',' << it->nu_one << ',' << it->dnu << ',' << it->b() << '\n';
              else os << ",,,\n";
            }
          });
          summary["ring_max_rel_err"] = tr->max_rel_err;
        }
        out.json(d / "mcf.json", j);
      });

    out.json(d / "summary.json", summary);
    ladder.push_back(summary);
  }

  if (cfg.clearing_out)
    block("clearing_out_ladder", "ladder", [&] {
      check_clearing_out_ladder(cfg.ladder, cfg.sigmas);
      ClearingOutReport rep;
      rep.samples = clearing;
      rep.sigmas = cfg.sigmas;
      for (double s : cfg.sigmas) rep.eta_hat.push_back(ClearingOutReport::eta_for(rep.samples, s));
      out.json("clearing_out.json", rep.summary());
    });
  out.json("ladder_summary.json", {{"ladder", cfg.ladder}, {"levels", ladder}});

  bool sim_failed = false, any_failed = false;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : res.blocks) {
    blocks.push_back(b.to_json());
    any_failed = any_failed || !b.ok;
    sim_failed = sim_failed || (!b.ok && b.name == "simulate");
  }
  nlohmann::json diags = nlohmann::json::array();
  for (const auto& x : res.diagnostics) diags.push_back(x.to_json());
  res.manifest = {{"config", cfg.to_json()},
                  {"seed", cfg.seed},
                  {"versions", {{"glvortex", kVersion}, {"fftw", std::string(fftw_version)}, {"compiler", __VERSION__}}},
                  {"diagnostics", diags},
                  {"blocks", blocks},
                  {"files", out.listing()}};
  res.status = sim_failed ? 2 : (any_failed ? 1 : 0);
  res.manifest["status"] = res.status;
  std::ofstream(res.directory / "manifest.json") << res.manifest.dump(2) << "\n";
  return res;
}

}  // namespace glv

#endif  // GLVORTEX_EXPERIMENT_HPP
