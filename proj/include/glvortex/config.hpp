#ifndef GLVORTEX_CONFIG_HPP
#define GLVORTEX_CONFIG_HPP

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "glvortex/dynamics.hpp"
#include "glvortex/errors.hpp"
#include "glvortex/geometry.hpp"

// Experiment configuration: INI text with sections. Lists are whitespace or comma separated.
//
//   output = runs/default        relative paths resolve against $GLVORTEX_OUTPUT_ROOT
//   seed = 1
//   [geometry]      dim, lengths, grid
//   [integrator]    t_end, dt_factor, snapshot_stride, dealias, save_snapshots (none|final|all)
//   [initial]       kind = wave|ring|lines|points|random, plus kind-specific keys
//   [ladder]        epsilons (strictly decreasing)
//   [monotonicity]  enabled, center, radii, r_min, r_max, tau
//   [clearing_out]  enabled, sigmas, radius_factors
//   [hodge]         enabled, gauge, gauge_t1, gauge_t2
//   [vortex]        enabled, density_radii
//   [mcf]           enabled, tau_brakke, brakke_from

namespace glv {

struct ExperimentConfig {
  std::string output = "runs/default";
  std::uint64_t seed = 1;

  int dim = 3;
  std::array<double, 3> lengths{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> grid{64, 64, 64};

  IntegratorConfig integrator{0.2, 0.02, 1, false};
  std::string save_snapshots = "final";

  std::string kind = "wave";
  InitialData spec = PhaseWave{{1, 0, 0}, 0.3, {0, 1, 0}};
  bool allow_underresolved = false;

  std::vector<double> ladder{0.05};

  bool monotonicity = true;
  std::vector<double> mono_center;  // empty: torus centre
  std::size_t mono_radii = 16;
  double mono_r_min = 0.0;  // 0: automatic
  double mono_r_max = 0.0;
  double mono_tau = 1e-3;

  bool clearing_out = false;
  std::vector<double> sigmas{0.1, 0.25, 0.5};
  std::vector<double> radius_factors{4.0, 8.0};

  bool hodge = true;
  bool gauge = true;
  double gauge_t1 = -1.0;  // negative: half of t_end
  double gauge_t2 = -1.0;  // negative: t_end

  bool vortex = true;
  std::vector<double> density_radii;  // empty: automatic

  bool mcf = false;
  double tau_brakke = 0.1;
  double brakke_from = -1.0;  // negative: 2 eps^2

  std::string source;  // raw text, echoed into the manifest

  TorusGeometry geometry() const { return TorusGeometry(dim, lengths, grid); }

  nlohmann::json to_json() const;
};

struct Diagnostic {
  std::string severity;  // "error" or "warning"
  std::string key;
  std::string message;

  nlohmann::json to_json() const { return {{"severity", severity}, {"key", key}, {"message", message}}; }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// section.key -> line number, for diagnostics; the property tree does not keep lines.
inline std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> out;
  std::istringstream is(text);
  std::string line, section;
  for (int n = 1; std::getline(is, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      out[section] = n;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(t.substr(0, eq));
    out[section.empty() ? key : section + "." + key] = n;
  }
  return out;
}

class ConfigReader {
 public:
  ConfigReader(const boost::property_tree::ptree& pt, std::map<std::string, int> lines, std::string origin)
      : pt_(pt), lines_(std::move(lines)), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const auto it = lines_.find(key);
    const std::string where = it != lines_.end() ? origin_ + ":" + std::to_string(it->second) : origin_;
    throw ConfigError(where + ": key '" + key + "': " + msg);
  }

  bool has(const std::string& key) const {
    used_.insert(key);
    return pt_.get_optional<std::string>(key).has_value();
  }

  std::string text(const std::string& key, const std::string& def) const {
    used_.insert(key);
    const auto v = pt_.get_optional<std::string>(key);
    return v ? trim(*v) : def;
  }

  double number(const std::string& key, double def) const {
    if (!has(key)) return def;
    return parse_double(key, text(key, ""));
  }

  long integer(const std::string& key, long def) const {
    if (!has(key)) return def;
    const std::string s = text(key, "");
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(s, &pos);
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + s + "'");
    }
    if (pos != s.size()) fail(key, "expected an integer, got '" + s + "'");
    return v;
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    std::string s = text(key, "");
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    fail(key, "expected true or false, got '" + s + "'");
  }

  std::vector<double> list(const std::string& key, std::vector<double> def) const {
    if (!has(key)) return def;
    std::string s = text(key, "");
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_double(key, tok));
    if (out.empty()) fail(key, "expected a list of numbers");
    return out;
  }

  /// Keys present in the file but never read.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : lines_) {
      if (pt_.get_child_optional(k) && !pt_.get_child(k).empty()) continue;  // section header
      if (!used_.count(k)) out.push_back(k);
    }
    return out;
  }

  int line_of(const std::string& key) const {
    const auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  double parse_double(const std::string& key, const std::string& s) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(v)) fail(key, "expected a finite number, got '" + s + "'");
    return v;
  }

  const boost::property_tree::ptree& pt_;
  std::map<std::string, int> lines_;
  std::string origin_;
  mutable std::set<std::string> used_;
};

template <std::size_t K>
std::array<double, K> fixed(const ConfigReader& r, const std::string& key, std::array<double, K> def, std::size_t need) {
  if (!r.has(key)) return def;
  const auto v = r.list(key, {});
  if (v.size() != need) r.fail(key, "expected " + std::to_string(need) + " values, got " + std::to_string(v.size()));
  std::array<double, K> out = def;
  for (std::size_t i = 0; i < need; ++i) out[i] = v[i];
  return out;
}

inline std::array<int, 3> int_triple(const ConfigReader& r, const std::string& key, std::array<int, 3> def, int dim) {
  const auto v = fixed<3>(r, key, {double(def[0]), double(def[1]), double(def[2])}, std::size_t(dim));
  std::array<int, 3> out{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    if (v[a] != std::round(v[a])) r.fail(key, "expected integers");
    out[a] = int(v[a]);
  }
  return out;
}

inline std::vector<PlanarVortex> planar_vortices(const ConfigReader& r, const std::string& section) {
  const auto pos = r.list(section + ".positions", {});
  const auto deg = r.list(section + ".degrees", {});
  if (pos.size() != 2 * deg.size())
    r.fail(section + ".positions", "need two coordinates per entry of " + section + ".degrees");
  std::vector<PlanarVortex> out;
  for (std::size_t i = 0; i < deg.size(); ++i) out.push_back({{pos[2 * i], pos[2 * i + 1]}, int(deg[i])});
  return out;
}

}  // namespace detail

/// Parses INI text. Syntax errors and bad values raise ConfigError naming the line and key.
inline ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  const detail::ConfigReader r(tree, detail::key_lines(text), origin);
  ExperimentConfig c;
  c.source = text;
  c.output = r.text("output", c.output);
  const long seed = r.integer("seed", long(c.seed));
  if (seed < 0) r.fail("seed", "must be non-negative");
  c.seed = std::uint64_t(seed);

  c.dim = int(r.integer("geometry.dim", c.dim));
  if (c.dim != 2 && c.dim != 3) r.fail("geometry.dim", "must be 2 or 3");
  const std::size_t nd = std::size_t(c.dim);
  if (r.has("geometry.lengths")) {
    const auto v = r.list("geometry.lengths", {});
    if (v.size() != 1 && v.size() != nd) r.fail("geometry.lengths", "expected 1 or dim values");
    for (std::size_t a = 0; a < nd; ++a) c.lengths[a] = v.size() == 1 ? v[0] : v[a];
  }
  if (r.has("geometry.grid")) {
    const auto v = r.list("geometry.grid", {});
    if (v.size() != 1 && v.size() != nd) r.fail("geometry.grid", "expected 1 or dim values");
    for (std::size_t a = 0; a < nd; ++a) {
      const double n = v.size() == 1 ? v[0] : v[a];
      if (n < 2 || n != std::round(n)) r.fail("geometry.grid", "grid sizes must be integers >= 2");
      c.grid[a] = std::size_t(n);
    }
  }
  if (c.dim == 2) {
    c.grid[2] = 1;
    c.lengths[2] = 1.0;
  }
  for (std::size_t a = 0; a < nd; ++a)
    if (!(c.lengths[a] > 0.0)) r.fail("geometry.lengths", "lengths must be positive");

  c.integrator.t_end = r.number("integrator.t_end", c.integrator.t_end);
  c.integrator.dt_factor = r.number("integrator.dt_factor", c.integrator.dt_factor);
  const long stride = r.integer("integrator.snapshot_stride", long(c.integrator.snapshot_stride));
  if (stride < 1) r.fail("integrator.snapshot_stride", "must be at least 1");
  c.integrator.snapshot_stride = std::size_t(stride);
  c.integrator.dealias = r.flag("integrator.dealias", c.integrator.dealias);
  c.save_snapshots = r.text("integrator.save_snapshots", c.save_snapshots);
  if (c.save_snapshots != "none" && c.save_snapshots != "final" && c.save_snapshots != "all")
    r.fail("integrator.save_snapshots", "expected none, final or all");
  if (!(c.integrator.t_end >= 0.0)) r.fail("integrator.t_end", "must be non-negative");
  if (!(c.integrator.dt_factor > 0.0)) r.fail("integrator.dt_factor", "must be positive");

  c.kind = r.text("initial.kind", c.kind);
  c.allow_underresolved = r.flag("initial.allow_underresolved", false);
  if (c.kind == "wave") {
    PhaseWave w;
    w.k = detail::int_triple(r, "initial.k", {1, 0, 0}, c.dim);
    w.delta = r.number("initial.delta", 0.3);
    w.q = detail::int_triple(r, "initial.q", {0, 1, 0}, c.dim);
    c.spec = w;
  } else if (c.kind == "ring") {
    if (c.dim != 3) r.fail("initial.kind", "rings need dim = 3");
    VortexRing v;
    const Point mid{0.5 * c.lengths[0], 0.5 * c.lengths[1], 0.5 * c.lengths[2]};
    v.center = detail::fixed<3>(r, "initial.center", mid, 3);
    v.radius = r.number("initial.radius", 0.25);
    v.axis = int(r.integer("initial.axis", 2));
    if (v.axis < 0 || v.axis > 2) r.fail("initial.axis", "must be 0, 1 or 2");
    if (!(v.radius > 0.0)) r.fail("initial.radius", "must be positive");
    c.spec = v;
  } else if (c.kind == "lines") {
    if (c.dim != 3) r.fail("initial.kind", "lines need dim = 3");
    VortexLines v;
    v.lines = detail::planar_vortices(r, "initial");
    v.axis = int(r.integer("initial.axis", 2));
    if (v.axis < 0 || v.axis > 2) r.fail("initial.axis", "must be 0, 1 or 2");
    c.spec = v;
  } else if (c.kind == "points") {
    if (c.dim != 2) r.fail("initial.kind", "points need dim = 2");
    c.spec = VortexPoints{detail::planar_vortices(r, "initial")};
  } else if (c.kind == "random") {
    RandomBudget b;
    b.m0 = r.number("initial.m0", 1.0);
    b.max_mode = int(r.integer("initial.max_mode", 3));
    b.seed = c.seed;
    if (!(b.m0 > 0.0)) r.fail("initial.m0", "must be positive");
    if (b.max_mode < 1) r.fail("initial.max_mode", "must be at least 1");
    c.spec = b;
  } else {
    r.fail("initial.kind", "unknown kind '" + c.kind + "' (wave, ring, lines, points, random)");
  }

  c.ladder = r.list("ladder.epsilons", c.ladder);

  c.monotonicity = r.flag("monotonicity.enabled", c.monotonicity);
  c.mono_center = r.list("monotonicity.center", {});
  if (!c.mono_center.empty() && c.mono_center.size() != nd) r.fail("monotonicity.center", "expected dim values");
  const long nr = r.integer("monotonicity.radii", long(c.mono_radii));
  if (nr < 2) r.fail("monotonicity.radii", "need at least two radii");
  c.mono_radii = std::size_t(nr);
  c.mono_r_min = r.number("monotonicity.r_min", 0.0);
  c.mono_r_max = r.number("monotonicity.r_max", 0.0);
  c.mono_tau = r.number("monotonicity.tau", c.mono_tau);

  c.clearing_out = r.flag("clearing_out.enabled", c.clearing_out);
  c.sigmas = r.list("clearing_out.sigmas", c.sigmas);
  c.radius_factors = r.list("clearing_out.radius_factors", c.radius_factors);

  c.hodge = r.flag("hodge.enabled", c.hodge);
  c.gauge = r.flag("hodge.gauge", c.gauge);
  c.gauge_t1 = r.number("hodge.gauge_t1", c.gauge_t1);
  c.gauge_t2 = r.number("hodge.gauge_t2", c.gauge_t2);

  c.vortex = r.flag("vortex.enabled", c.vortex);
  c.density_radii = r.list("vortex.density_radii", {});

  c.mcf = r.flag("mcf.enabled", c.mcf);
  c.tau_brakke = r.number("mcf.tau_brakke", c.tau_brakke);
  c.brakke_from = r.number("mcf.brakke_from", c.brakke_from);

  for (const auto& k : r.unused()) r.fail(k, "unknown key");
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

/// Output directory with relative paths resolved against $GLVORTEX_OUTPUT_ROOT when set.
inline std::filesystem::path output_directory(const ExperimentConfig& c) {
  std::filesystem::path p(c.output);
  if (p.is_relative())
    if (const char* root = std::getenv("GLVORTEX_OUTPUT_ROOT"); root && *root) p = std::filesystem::path(root) / p;
  return p;
}

inline nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["output"] = output;
  j["seed"] = seed;
  j["geometry"] = {{"dim", dim},
                   {"lengths", std::vector<double>(lengths.begin(), lengths.begin() + dim)},
                   {"grid", std::vector<std::size_t>(grid.begin(), grid.begin() + dim)}};
  j["integrator"] = {{"t_end", integrator.t_end},
                     {"dt_factor", integrator.dt_factor},
                     {"snapshot_stride", integrator.snapshot_stride},
                     {"dealias", integrator.dealias},
                     {"save_snapshots", save_snapshots}};
  nlohmann::json init{{"kind", kind}, {"allow_underresolved", allow_underresolved}};
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, PhaseWave>) {
          init["k"] = s.k;
          init["delta"] = s.delta;
          init["q"] = s.q;
        } else if constexpr (std::is_same_v<S, VortexRing>) {
          init["center"] = s.center;
          init["radius"] = s.radius;
          init["axis"] = s.axis;
        } else if constexpr (std::is_same_v<S, VortexLines> || std::is_same_v<S, VortexPoints>) {
          nlohmann::json v = nlohmann::json::array();
          const auto& list = [&]() -> const std::vector<PlanarVortex>& {
            if constexpr (std::is_same_v<S, VortexLines>) return s.lines;
            else return s.points;
          }();
          for (const auto& p : list) v.push_back({{"position", p.position}, {"degree", p.degree}});
          init["vortices"] = v;
          if constexpr (std::is_same_v<S, VortexLines>) init["axis"] = s.axis;
        } else {
          init["m0"] = s.m0;
          init["max_mode"] = s.max_mode;
          init["seed"] = s.seed;
        }
      },
      spec);
  j["initial"] = init;
  j["ladder"] = ladder;
  j["monotonicity"] = {{"enabled", monotonicity}, {"center", mono_center}, {"radii", mono_radii},
                       {"r_min", mono_r_min},     {"r_max", mono_r_max},   {"tau", mono_tau}};
  j["clearing_out"] = {{"enabled", clearing_out}, {"sigmas", sigmas}, {"radius_factors", radius_factors}};
  j["hodge"] = {{"enabled", hodge}, {"gauge", gauge}, {"gauge_t1", gauge_t1}, {"gauge_t2", gauge_t2}};
  j["vortex"] = {{"enabled", vortex}, {"density_radii", density_radii}};
  j["mcf"] = {{"enabled", mcf}, {"tau_brakke", tau_brakke}, {"brakke_from", brakke_from}};
  return j;
}

namespace detail {

inline bool writable_target(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::path q = std::filesystem::absolute(p, ec);
  if (ec) return false;
  while (!q.empty() && !std::filesystem::exists(q, ec)) {
    if (q == q.parent_path()) break;
    q = q.parent_path();
  }
  return std::filesystem::is_directory(q, ec) && ::access(q.c_str(), W_OK) == 0;
}

}  // namespace detail

/// Static checks; problems are returned, never thrown.
inline std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  auto err = [&](std::string k, std::string m) { d.push_back({"error", std::move(k), std::move(m)}); };
  auto warn = [&](std::string k, std::string m) { d.push_back({"warning", std::move(k), std::move(m)}); };

  double h = 0.0, lmin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < c.dim; ++a) {
    h = std::max(h, c.lengths[a] / double(c.grid[a]));
    lmin = std::min(lmin, c.lengths[a]);
  }
  const double inj = 0.5 * lmin;

  if (c.ladder.empty()) err("ladder.epsilons", "empty epsilon ladder");
  for (std::size_t i = 0; i < c.ladder.size(); ++i) {
    if (!(c.ladder[i] > 0.0 && c.ladder[i] < 1.0)) err("ladder.epsilons", "epsilon must lie in (0, 1)");
    if (i > 0 && !(c.ladder[i] < c.ladder[i - 1])) err("ladder.epsilons", "epsilon ladder must be strictly decreasing");
  }
  const double eps_min = c.ladder.empty() ? 0.0 : *std::min_element(c.ladder.begin(), c.ladder.end());

  if (carries_vortices(c.spec) && h > 0.5 * eps_min) {
    const std::string m = "grid spacing " + std::to_string(h) + " exceeds eps/2 = " + std::to_string(0.5 * eps_min);
    if (c.allow_underresolved) warn("geometry.grid", m);
    else err("geometry.grid", m + " (resolution)");
  }
  if (c.integrator.dt_factor > 0.5)
    warn("integrator.dt_factor", "dt_factor above 0.5 degrades the splitting accuracy");
  if (!(c.integrator.t_end > 0.0) && (c.monotonicity || c.mcf || c.clearing_out))
    err("integrator.t_end", "enabled analyses need t_end > 0");

  if (const auto* r = std::get_if<VortexRing>(&c.spec)) {
    const int a = (r->axis + 1) % 3, b = (r->axis + 2) % 3;
    if (2.0 * r->radius >= std::min(c.lengths[a], c.lengths[b]))
      err("initial.radius", "ring diameter does not fit the torus cross-section");
  }
  if (const auto* l = std::get_if<VortexLines>(&c.spec)) {
    int total = 0;
    for (const auto& v : l->lines) total += v.degree;
    if (l->lines.empty() || total != 0) err("initial.degrees", "line degrees must be +-1 and sum to zero");
  }
  if (const auto* p = std::get_if<VortexPoints>(&c.spec)) {
    int total = 0;
    for (const auto& v : p->points) total += v.degree;
    if (p->points.empty() || total != 0) err("initial.degrees", "point degrees must be +-1 and sum to zero");
  }

  if (c.monotonicity) {
    const double rmax_allowed = std::min(std::sqrt(c.integrator.t_end), 1.0);
    if (c.mono_r_max > 0.0 && c.mono_r_max > rmax_allowed)
      err("monotonicity.r_max", "radii must not exceed min(sqrt(t_end), 1)");
    if (c.mono_r_min > 0.0 && c.mono_r_min <= h) err("monotonicity.r_min", "radii must exceed the grid spacing");
    if (c.mono_r_min > 0.0 && c.mono_r_max > 0.0 && c.mono_r_min >= c.mono_r_max)
      err("monotonicity.r_min", "r_min must be below r_max");
  }
  for (double r : c.density_radii)
    if (!(r > h && r < inj)) err("vortex.density_radii", "density radii must lie in (h, inj)");
  if (c.clearing_out) {
    for (double s : c.sigmas)
      if (!(s > 0.0 && s < 1.0)) err("clearing_out.sigmas", "sigma must lie in (0, 1)");
    for (double f : c.radius_factors)
      if (!(f > 0.0)) err("clearing_out.radius_factors", "radius factors must be positive");
  }
  if (c.mcf && !std::holds_alternative<VortexRing>(c.spec) && !std::holds_alternative<VortexLines>(c.spec))
    err("mcf.enabled", "MCF diagnostics need ring or line data");
  if (c.gauge_t1 >= 0.0 && c.gauge_t2 >= 0.0 && c.gauge_t1 > c.gauge_t2)
    err("hodge.gauge_t1", "gauge window must satisfy t1 <= t2");
  if (c.gauge_t2 > c.integrator.t_end) err("hodge.gauge_t2", "gauge window ends after t_end");

  if (!detail::writable_target(output_directory(c))) err("output", "output directory is not writable");
  return d;
}

inline bool has_errors(const std::vector<Diagnostic>& d) {
  return std::any_of(d.begin(), d.end(), [](const Diagnostic& x) { return x.severity == "error"; });
}

}  // namespace glv

#endif  // GLVORTEX_CONFIG_HPP
