#include "snls/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "snls/io.hpp"

namespace snls {

// ---------------------------------------------------------------------------
// RunConfig

GridPtr RunConfig::make_grid() const { return snls::make_grid(dim, n, box_length); }

NoiseSpec RunConfig::make_noise(const GridPtr& grid) const {
  if (noise.kind == NoiseKind::zero) return NoiseSpec::zero(grid);
  return NoiseSpec::multiplier(grid, noise.amplitude, noise.sigma, noise.cutoff);
}

ComplexField RunConfig::make_initial(const GridPtr& grid) const {
  const auto& ini = initial;
  if (ini.type == "constant") return initial_constant(grid, ini.value);
  if (ini.type == "plane_wave") {
    std::vector<int> modes = ini.modes;
    modes.resize(static_cast<std::size_t>(grid->dim()), 0);
    return initial_plane_wave(grid, modes);
  }
  if (ini.type == "gaussian_bump") return initial_gaussian_bump(grid, ini.amplitude, ini.width);
  if (ini.type == "random") return initial_random_band_limited(grid, ini.h1_norm, ini.k_max, ini.seed);
  throw ConfigError("unknown initial data type '" + ini.type + "'");
}

SolverConfig RunConfig::solver_config() const {
  SolverConfig cfg;
  cfg.grid = make_grid();
  cfg.t_final = t_final;
  cfg.dt = dt;
  cfg.scheme = scheme;
  cfg.noise = make_noise(cfg.grid);
  cfg.initial_v = make_initial(cfg.grid);
  cfg.snapshot_stride = snapshot_stride;
  cfg.nonlinearity = nonlinearity;
  return cfg;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream s;
  auto d = [](double x) { return format_double(x); };
  s << "grid.dim = " << dim << "\ngrid.n = " << n << "\ngrid.L = " << d(box_length) << '\n';
  s << "time.t_final = " << d(t_final) << "\ntime.dt = " << d(dt)
    << "\ntime.scheme = " << to_string(scheme) << "\ntime.snapshot_stride = " << snapshot_stride
    << "\ntime.nonlinearity = " << (nonlinearity ? "true" : "false") << "\ntime.dt_list =";
  for (double x : dt_list) s << ' ' << d(x);
  s << "\nnoise.kind = " << (noise.kind == NoiseKind::zero ? "zero" : "multiplier")
    << "\nnoise.amplitude = " << d(noise.amplitude) << "\nnoise.sigma = " << d(noise.sigma)
    << "\nnoise.cutoff = " << (noise.cutoff ? d(*noise.cutoff) : "none") << '\n';
  s << "initial.type = " << initial.type << "\ninitial.amplitude = " << d(initial.amplitude)
    << "\ninitial.width = " << d(initial.width) << "\ninitial.value = " << d(initial.value.real())
    << ' ' << d(initial.value.imag()) << "\ninitial.modes =";
  for (int m : initial.modes) s << ' ' << m;
  s << "\ninitial.h1_norm = " << d(initial.h1_norm) << "\ninitial.k_max = " << d(initial.k_max)
    << "\ninitial.seed = " << initial.seed << '\n';
  s << "ensemble.size = " << ensemble_size << "\nensemble.seed = " << master_seed
    << "\nensemble.eta = " << d(eta) << '\n';
  s << "output.emit_snapshots = " << (emit_snapshots ? "true" : "false") << '\n';
  return s.str();
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct BadValue {
  std::string message;
};

double parse_real(std::string_view text) {
  auto s = trim(text);
  double factor = 1.0;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    factor = std::numbers::pi;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty()) return factor;
  }
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw BadValue{"expected a real number, got '" + std::string(text) + "'"};
  }
  return x * factor;
}

template <typename Int>
Int parse_integer(std::string_view text) {
  const auto s = trim(text);
  Int x{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw BadValue{"expected an integer, got '" + std::string(text) + "'"};
  }
  return x;
}

bool parse_bool(std::string_view text) {
  const auto s = trim(text);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw BadValue{"expected a boolean, got '" + std::string(text) + "'"};
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view text, Parse parse) {
  std::vector<T> out;
  std::string_view rest = text;
  while (!trim(rest).empty()) {
    const auto comma = rest.find(',');
    out.push_back(parse(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;
using SectionTable = std::map<std::string, Setter, std::less<>>;

const std::map<std::string, SectionTable, std::less<>>& schema() {
  static const std::map<std::string, SectionTable, std::less<>> table{
      {"grid",
       {
           {"dim", [](RunConfig& c, std::string_view v) { c.dim = parse_integer<int>(v); }},
           {"n", [](RunConfig& c, std::string_view v) { c.n = parse_integer<std::size_t>(v); }},
           {"L", [](RunConfig& c, std::string_view v) { c.box_length = parse_real(v); }},
       }},
      {"time",
       {
           {"t_final", [](RunConfig& c, std::string_view v) { c.t_final = parse_real(v); }},
           {"dt", [](RunConfig& c, std::string_view v) { c.dt = parse_real(v); }},
           {"scheme",
            [](RunConfig& c, std::string_view v) {
              try {
                c.scheme = parse_scheme(trim(v));
              } catch (const ConfigError& e) {
                throw BadValue{e.what()};
              }
            }},
           {"snapshot_stride",
            [](RunConfig& c, std::string_view v) { c.snapshot_stride = parse_integer<std::size_t>(v); }},
           {"nonlinearity", [](RunConfig& c, std::string_view v) { c.nonlinearity = parse_bool(v); }},
           {"dt_list",
            [](RunConfig& c, std::string_view v) { c.dt_list = parse_list<double>(v, parse_real); }},
       }},
      {"noise",
       {
           {"kind",
            [](RunConfig& c, std::string_view v) {
              const auto s = trim(v);
              if (s == "zero") {
                c.noise.kind = NoiseKind::zero;
              } else if (s == "multiplier") {
                c.noise.kind = NoiseKind::multiplier;
              } else {
                throw BadValue{"noise kind must be zero or multiplier, got '" + std::string(s) + "'"};
              }
            }},
           {"amplitude", [](RunConfig& c, std::string_view v) { c.noise.amplitude = parse_real(v); }},
           {"sigma", [](RunConfig& c, std::string_view v) { c.noise.sigma = parse_real(v); }},
           {"cutoff",
            [](RunConfig& c, std::string_view v) {
              if (trim(v) == "none") {
                c.noise.cutoff.reset();
              } else {
                c.noise.cutoff = parse_real(v);
              }
            }},
       }},
      {"initial",
       {
           {"type",
            [](RunConfig& c, std::string_view v) {
              const std::string s(trim(v));
              if (s != "constant" && s != "plane_wave" && s != "gaussian_bump" && s != "random") {
                throw BadValue{"unknown initial data type '" + s + "'"};
              }
              c.initial.type = s;
            }},
           {"amplitude", [](RunConfig& c, std::string_view v) { c.initial.amplitude = parse_real(v); }},
           {"width", [](RunConfig& c, std::string_view v) { c.initial.width = parse_real(v); }},
           {"value_re",
            [](RunConfig& c, std::string_view v) { c.initial.value.real(parse_real(v)); }},
           {"value_im",
            [](RunConfig& c, std::string_view v) { c.initial.value.imag(parse_real(v)); }},
           {"modes",
            [](RunConfig& c, std::string_view v) {
              c.initial.modes = parse_list<int>(v, parse_integer<int>);
            }},
           {"h1_norm", [](RunConfig& c, std::string_view v) { c.initial.h1_norm = parse_real(v); }},
           {"k_max", [](RunConfig& c, std::string_view v) { c.initial.k_max = parse_real(v); }},
           {"seed",
            [](RunConfig& c, std::string_view v) { c.initial.seed = parse_integer<std::uint64_t>(v); }},
       }},
      {"ensemble",
       {
           {"size",
            [](RunConfig& c, std::string_view v) { c.ensemble_size = parse_integer<std::size_t>(v); }},
           {"seed",
            [](RunConfig& c, std::string_view v) { c.master_seed = parse_integer<std::uint64_t>(v); }},
           {"eta", [](RunConfig& c, std::string_view v) { c.eta = parse_real(v); }},
           {"workers", [](RunConfig& c, std::string_view v) { c.workers = parse_integer<unsigned>(v); }},
       }},
      {"output",
       {
           {"dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); }},
           {"emit_snapshots",
            [](RunConfig& c, std::string_view v) { c.emit_snapshots = parse_bool(v); }},
       }},
  };
  return table;
}

void validate(const RunConfig& c, const std::map<std::string, std::size_t>& lines,
              std::vector<ConfigIssue>& issues) {
  auto line_of = [&](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? std::size_t{0} : it->second;
  };
  auto fail = [&](const std::string& key, std::string msg) {
    issues.push_back({line_of(key), key, std::move(msg)});
  };

  if (c.dim < 1 || c.dim > 4) fail("dim", "dim must be in {1,2,3,4}");
  if (c.n < 8 || (c.n & (c.n - 1)) != 0) fail("n", "n must be a power of two >= 8");
  if (!(c.box_length > 0.0) || !std::isfinite(c.box_length)) fail("L", "L must be positive");

  const bool dt_ok = c.dt > 0.0 && std::isfinite(c.dt);
  const bool t_ok = c.t_final > 0.0 && std::isfinite(c.t_final);
  if (!dt_ok) fail("dt", "dt must be positive");
  if (!t_ok) fail("t_final", "t_final must be positive");
  if (dt_ok && t_ok) {
    if (c.dt > c.t_final) {
      fail("dt", "dt must not exceed t_final");
    } else {
      const double ratio = c.t_final / c.dt;
      const double steps = std::round(ratio);
      if (std::abs(ratio - steps) > 1e-9 * steps) {
        fail("dt", "t_final / dt must be an integer");
      } else if (c.snapshot_stride == 0 ||
                 static_cast<std::size_t>(steps) % c.snapshot_stride != 0) {
        fail("snapshot_stride", "snapshot_stride must divide t_final / dt");
      }
    }
  }
  for (double x : c.dt_list) {
    if (!(x > 0.0)) fail("dt_list", "dt_list entries must be positive");
  }
  if (c.noise.amplitude < 0.0 || !std::isfinite(c.noise.amplitude)) {
    fail("amplitude", "noise amplitude must be >= 0");
  }
  if (c.noise.sigma < 0.0) fail("sigma", "noise sigma must be >= 0");
  if (c.initial.type == "gaussian_bump" && !(c.initial.width > 0.0)) {
    fail("width", "gaussian bump width must be positive");
  }
  if (c.ensemble_size < 1) fail("size", "ensemble size must be >= 1");
  if (!(c.eta > 0.0)) fail("eta", "eta must be positive");
  if (c.workers < 1) fail("workers", "workers must be >= 1");
}

}  // namespace

ConfigParseError::ConfigParseError(std::vector<ConfigIssue> issues)
    : ConfigError([&] {
        std::ostringstream s;
        for (const auto& i : issues) {
          s << "line " << i.line << ": " << i.key << ": " << i.message << '\n';
        }
        return s.str();
      }()),
      issues_(std::move(issues)) {}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::vector<ConfigIssue> issues;
  std::map<std::string, std::size_t> lines;
  const SectionTable* section = nullptr;
  bool in_unknown_section = false;

  std::size_t line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({line_no, std::string(line), "malformed section header"});
        continue;
      }
      const auto name = trim(line.substr(1, line.size() - 2));
      const auto it = schema().find(name);
      if (it == schema().end()) {
        issues.push_back({line_no, std::string(name), "unknown section"});
        section = nullptr;
        in_unknown_section = true;
      } else {
        section = &it->second;
        in_unknown_section = false;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back({line_no, std::string(line), "expected key = value"});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (in_unknown_section) continue;
    if (!section) {
      issues.push_back({line_no, key, "key outside of any section"});
      continue;
    }
    const auto setter = section->find(key);
    if (setter == section->end()) {
      issues.push_back({line_no, key, "unknown key"});
      continue;
    }
    try {
      setter->second(cfg, value);
      lines[key] = line_no;
    } catch (const BadValue& e) {
      issues.push_back({line_no, key, e.message});
    }
  }

  validate(cfg, lines, issues);
  if (!issues.empty()) throw ConfigParseError(std::move(issues));
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Ensembles

namespace {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be
// written by index so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

std::string member_file_name(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "member_%06zu.bin", i);
  return name;
}

double final_distance(const Trajectory& a, const Trajectory& b) {
  auto diff = a.v_star(a.size() - 1);
  diff -= b.v_star(b.size() - 1);
  return lebesgue_norm(diff, 2.0);
}

}  // namespace

MemberSummary summarize_member(const Trajectory& traj, double eta, std::size_t index) {
  MemberSummary m;
  m.index = index;
  std::vector<double> energies;
  if (traj.noise_path) {
    const auto ledger = ito_ledger(traj);
    energies = ledger.energy;
    m.ham3_final = ledger.ham3.back();
    m.residual_final = ledger.residual.back();
  } else {
    for (std::size_t j = 0; j < traj.size(); ++j) energies.push_back(energy(traj.v_star(j)));
    m.residual_final = energies.back() - energies.front();
  }
  m.final_energy = energies.back();
  m.sup_energy = *std::max_element(energies.begin(), energies.end());
  if (traj.size() >= 2) m.intervals = partition_intervals(traj, eta).count();
  return m;
}

void aggregate(EnsembleReport& report) {
  std::vector<double> fe, se, h3, res, j;
  report.failed = 0;
  for (const auto& m : report.members) {
    if (m.failed) {
      ++report.failed;
      continue;
    }
    fe.push_back(m.final_energy);
    se.push_back(m.sup_energy);
    h3.push_back(m.ham3_final);
    res.push_back(m.residual_final);
    j.push_back(static_cast<double>(m.intervals));
  }
  report.final_energy = mean_with_error(fe);
  report.sup_energy = mean_with_error(se);
  report.ham3_final = mean_with_error(h3);
  report.residual_final = mean_with_error(res);
  report.intervals = mean_with_error(j);
  report.sup_energy_quantiles.clear();
  if (!se.empty()) {
    for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) report.sup_energy_quantiles.push_back(quantile(se, q));
  }
}

EnsembleReport run_ensemble(const RunConfig& config, bool write_outputs) {
  const SolverConfig solver = config.solver_config();
  solver.validate();

  EnsembleReport report;
  report.config_hash = config.hash();
  report.master_seed = config.master_seed;
  report.members.resize(config.ensemble_size);
  const bool snapshots = write_outputs && config.emit_snapshots;
  if (write_outputs) std::filesystem::create_directories(config.output_dir);

  parallel_for(config.ensemble_size, config.workers, [&](std::size_t i) {
    MemberSummary& slot = report.members[i];
    try {
      const auto traj = solve(solver, {config.master_seed, i, nullptr});
      slot = summarize_member(traj, config.eta, i);
      if (snapshots) write_trajectory(config.output_dir / member_file_name(i), traj);
    } catch (const std::exception& e) {
      slot = MemberSummary{};
      slot.index = i;
      slot.failed = true;
      slot.failure = e.what();
    }
  });
  aggregate(report);

  if (write_outputs) {
    write_report(report, config.output_dir / "report.txt");
    write_members_csv(report, config.output_dir / "members.csv");
  }
  return report;
}

void write_report(const EnsembleReport& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  auto est = [&](const char* name, const MomentEstimate& m) {
    out << name << ".mean = " << format_double(m.mean) << '\n'
        << name << ".std_error = " << format_double(m.std_error) << '\n';
  };
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.config_hash));
  out << "version = " << r.version << '\n'
      << "config_hash = " << hash << '\n'
      << "master_seed = " << r.master_seed << '\n'
      << "members = " << r.members.size() << '\n'
      << "failed = " << r.failed << '\n';
  est("final_energy", r.final_energy);
  est("sup_energy", r.sup_energy);
  est("ham3_final", r.ham3_final);
  est("residual_final", r.residual_final);
  est("intervals", r.intervals);
  out << "sup_energy.quantiles =";
  for (double q : r.sup_energy_quantiles) out << ' ' << format_double(q);
  out << '\n';
  for (const auto& m : r.members) {
    if (m.failed) out << "member." << m.index << ".failure = " << m.failure << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_members_csv(const EnsembleReport& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "member,failed,final_energy,sup_energy,intervals,ham3_final,residual_final\n";
  for (const auto& m : r.members) {
    out << m.index << ',' << (m.failed ? 1 : 0) << ',' << format_double(m.final_energy) << ','
        << format_double(m.sup_energy) << ',' << m.intervals << ',' << format_double(m.ham3_final)
        << ',' << format_double(m.residual_final) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Refinement studies

double fit_log_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::nan("");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

std::vector<std::size_t> refinement_factors(std::span<const double> dt_list, double t_final) {
  if (dt_list.size() < 2) throw UsageError("refinement needs at least two dt values");
  const double finest = dt_list.back();
  std::vector<std::size_t> factors;
  for (std::size_t i = 0; i < dt_list.size(); ++i) {
    const double dt = dt_list[i];
    if (!(dt > 0.0)) throw UsageError("dt values must be positive");
    if (i > 0 && !(dt < dt_list[i - 1])) throw UsageError("dt list must be strictly decreasing");
    const double steps = t_final / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
      throw UsageError("dt " + format_double(dt) + " does not divide t_final");
    }
    const double ratio = dt / finest;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      throw UsageError("dt " + format_double(dt) + " is not an integer multiple of the finest dt");
    }
    factors.push_back(static_cast<std::size_t>(std::round(ratio)));
  }
  return factors;
}

namespace {

// One solve per dt, all driven by the same finest-level Brownian path.
std::vector<Trajectory> solve_on_shared_path(const SolverConfig& base, std::span<const double> dts,
                                             std::span<const std::size_t> factors, std::uint64_t seed,
                                             std::uint64_t stream, Scheme scheme) {
  const double finest = dts.back();
  const auto fine_steps = static_cast<std::size_t>(std::llround(base.t_final / finest));
  std::optional<NoisePath> fine;
  if (is_stochastic(scheme)) {
    fine = generate_noise_path(base.noise, finest, fine_steps, seed, stream);
  }
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    SolverConfig cfg = base;
    cfg.scheme = scheme;
    cfg.dt = dts[i];
    cfg.snapshot_stride = fine_steps / factors[i];
    std::optional<NoisePath> path;
    if (fine) path = factors[i] == 1 ? *fine : coarsen(*fine, factors[i]);
    out.push_back(solve(cfg, {seed, stream, path ? &*path : nullptr}));
  }
  return out;
}

}  // namespace

ConvergenceStudy convergence_study(const RunConfig& config, std::span<const double> dt_list) {
  const auto factors = refinement_factors(dt_list, config.t_final);
  const SolverConfig base = config.solver_config();
  const std::size_t levels = dt_list.size();
  const std::size_t members = is_stochastic(config.scheme) ? config.ensemble_size : 1;

  std::vector<std::vector<double>> err(members, std::vector<double>(levels, 0.0));
  std::vector<std::vector<double>> diff(members, std::vector<double>(levels - 1, 0.0));
  parallel_for(members, config.workers, [&](std::size_t m) {
    const auto runs = solve_on_shared_path(base, dt_list, factors, config.master_seed, m, config.scheme);
    for (std::size_t i = 0; i < levels; ++i) err[m][i] = final_distance(runs[i], runs.back());
    for (std::size_t i = 0; i + 1 < levels; ++i) diff[m][i] = final_distance(runs[i], runs[i + 1]);
  });

  ConvergenceStudy study;
  study.dts.assign(dt_list.begin(), dt_list.end());
  study.error_vs_finest.assign(levels, 0.0);
  study.successive_difference.assign(levels - 1, 0.0);
  for (std::size_t m = 0; m < members; ++m) {
    for (std::size_t i = 0; i < levels; ++i) study.error_vs_finest[i] += err[m][i] * err[m][i];
    for (std::size_t i = 0; i + 1 < levels; ++i) {
      study.successive_difference[i] += diff[m][i] * diff[m][i];
    }
  }
  for (auto& e : study.error_vs_finest) e = std::sqrt(e / static_cast<double>(members));
  for (auto& e : study.successive_difference) e = std::sqrt(e / static_cast<double>(members));

  const std::span<const double> coarse(study.dts.data(), levels - 1);
  study.observed_order = fit_log_slope(coarse, study.successive_difference);
  study.order_vs_finest = fit_log_slope(coarse, std::span<const double>(study.error_vs_finest.data(), levels - 1));
  return study;
}

CrossSolverStudy cross_solver_study(const RunConfig& config, std::span<const double> dt_list) {
  std::vector<double> dts(dt_list.begin(), dt_list.end());
  if (dts.size() < 2) throw UsageError("cross-solver study needs at least two dt values");
  const auto factors = refinement_factors(dts, config.t_final);
  const SolverConfig base = config.solver_config();
  const std::size_t members = config.ensemble_size;

  std::vector<std::vector<double>> dist(members, std::vector<double>(dts.size(), 0.0));
  parallel_for(members, config.workers, [&](std::size_t m) {
    const auto direct = solve_on_shared_path(base, dts, factors, config.master_seed, m, Scheme::direct);
    const auto dpd = solve_on_shared_path(base, dts, factors, config.master_seed, m, Scheme::dpd);
    for (std::size_t i = 0; i < dts.size(); ++i) dist[m][i] = final_distance(direct[i], dpd[i]);
  });

  CrossSolverStudy study;
  study.dts = dts;
  study.distance.assign(dts.size(), 0.0);
  for (const auto& row : dist) {
    for (std::size_t i = 0; i < dts.size(); ++i) study.distance[i] += row[i] * row[i];
  }
  for (auto& d : study.distance) d = std::sqrt(d / static_cast<double>(members));
  study.observed_order = fit_log_slope(study.dts, study.distance);
  return study;
}

LedgerRefinement ledger_refinement(const RunConfig& config, std::size_t levels) {
  if (levels < 2) throw UsageError("ledger refinement needs at least two levels");
  std::vector<double> dts;
  for (std::size_t l = 0; l < levels; ++l) dts.push_back(config.dt / std::pow(2.0, static_cast<double>(l)));
  const auto factors = refinement_factors(dts, config.t_final);

  SolverConfig base = config.solver_config();
  LedgerRefinement out;
  out.dts = dts;
  const double finest = dts.back();
  const auto fine_steps = static_cast<std::size_t>(std::llround(base.t_final / finest));
  const auto fine = generate_noise_path(base.noise, finest, fine_steps, config.master_seed, 0);
  for (std::size_t i = 0; i < levels; ++i) {
    SolverConfig cfg = base;
    cfg.scheme = Scheme::direct;
    cfg.dt = dts[i];
    cfg.snapshot_stride = 1;
    const auto path = factors[i] == 1 ? fine : coarsen(fine, factors[i]);
    const auto traj = solve(cfg, {config.master_seed, 0, &path});
    out.literal_residual.push_back(std::abs(ito_ledger(traj, LedgerVariant::literal).residual.back()));
    out.balanced_residual.push_back(std::abs(ito_ledger(traj, LedgerVariant::balanced).residual.back()));
  }
  auto non_increasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[i - 1]) return false;
    }
    return true;
  };
  out.literal_non_increasing = non_increasing(out.literal_residual);
  out.balanced_non_increasing = non_increasing(out.balanced_residual);

  if (!out.literal_non_increasing) {
    std::ostringstream s;
    s << "ledger discrepancy: |residual(T)| of the literal ledger does not decrease under dt refinement\n"
      << "literal terms: drift t*||phi||^2_{HS(L2;H1)}, integrand (|v*|^2 + (Im v*)^2 + 4 Re v*)|phi_n|^2\n"
      << "balanced terms: drift (t/2)*||phi||^2_{HS(L2;H1)}, integrand (|v*|^2 + 2 Re v*)|phi_n|^2\n"
      << "noise normalisation: E|phi dW|^2 = dt ||phi||^2_{HS(L2;L2)}\n"
      << "dt, literal |residual(T)|, balanced |residual(T)|\n";
    for (std::size_t i = 0; i < levels; ++i) {
      s << format_double(dts[i]) << ", " << format_double(out.literal_residual[i]) << ", "
        << format_double(out.balanced_residual[i]) << '\n';
    }
    s << "balanced residual non-increasing: " << (out.balanced_non_increasing ? "yes" : "no") << '\n';
    out.discrepancy = s.str();
  }
  return out;
}

NoiseStatistics noise_statistics(const RunConfig& config) {
  const auto grid = config.make_grid();
  const auto spec = config.make_noise(grid);
  const auto doubled = spec.scaled(2.0);
  const std::size_t steps = static_cast<std::size_t>(std::llround(config.t_final / config.dt));
  const std::size_t members = config.ensemble_size;

  std::vector<double> final_h1(members), sup_h1(members), final_doubled(members), ratio(members);
  auto record = [&](std::size_t m, double h1, double sup, double doubled_h1) {
    final_h1[m] = h1;
    sup_h1[m] = sup;
    final_doubled[m] = doubled_h1;
    ratio[m] = h1 > 0.0 ? doubled_h1 / h1 : 0.0;
  };

  if (spec.kind() == NoiseKind::multiplier) {
    // Diagonal phi: run the recursion on Fourier coefficients with the same
    // counter Gaussians the physical-space stepper draws, no transforms needed.
    const auto k2 = grid->k_squared();
    const auto sym = spec.symbol();
    const auto sym2 = doubled.symbol();
    const double root_dt = std::sqrt(config.dt);
    const std::size_t size = sym.size();
    std::vector<Complex> phase(size);
    std::vector<double> weight(size);
    for (std::size_t i = 0; i < size; ++i) {
      phase[i] = std::polar(1.0, -k2[i] * config.dt);
      weight[i] = 1.0 + k2[i];
    }
    parallel_for(members, config.workers, [&](std::size_t m) {
      std::vector<Complex> c(size), c2(size);
      double sup = 0.0, h = 0.0, h2 = 0.0;
      for (std::size_t n = 0; n < steps; ++n) {
        h = 0.0;
        h2 = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
          c[i] *= phase[i];
          c2[i] *= phase[i];
          if (sym[i] != 0.0) {
            const Complex z = counter_gaussian(config.master_seed, m, n, i);
            c[i] += Complex(0.0, -1.0) * ((sym[i] * root_dt) * z);
            c2[i] += Complex(0.0, -1.0) * ((sym2[i] * root_dt) * z);
          }
          h += weight[i] * std::norm(c[i]);
          h2 += weight[i] * std::norm(c2[i]);
        }
        sup = std::max(sup, h);
      }
      record(m, h, sup, h2);
    });
  } else {
      parallel_for(members, config.workers, [&](std::size_t m) {
      RngState rng{config.master_seed, m, 0};
      RngState rng2{config.master_seed, m, 0};
      ComplexField psi(grid), psi2(grid);
      double sup = 0.0;
      for (std::size_t n = 0; n < steps; ++n) {
        psi = step_stochastic_convolution(psi, spec, config.dt, rng);
        psi2 = step_stochastic_convolution(psi2, doubled, config.dt, rng2);
        const double h = sobolev_norm(psi, 1.0);
        sup = std::max(sup, h * h);
      }
      const double h = sobolev_norm(psi, 1.0);
      const double h2 = sobolev_norm(psi2, 1.0);
      record(m, h * h, sup, h2 * h2);
    });
  }

  NoiseStatistics stats;
  stats.t = static_cast<double>(steps) * config.dt;
  stats.hs_h1 = hs_norm(spec, 1.0);
  stats.h1_expected = stats.t * stats.hs_h1 * stats.hs_h1;
  stats.h1_moment = mean_with_error(final_h1);
  stats.h1_sup_moment = mean_with_error(sup_h1);
  stats.doubled_h1_moment = mean_with_error(final_doubled);
  stats.doubled_ratio = mean_with_error(ratio);
  return stats;
}

std::vector<EnergyBoundReport> energy_bound_sweep(const RunConfig& config,
                                                  std::span<const double> amplitudes) {
  std::vector<EnergyBoundReport> out;
  for (double a : amplitudes) {
    RunConfig cfg = config;
    cfg.noise.kind = NoiseKind::multiplier;
    cfg.noise.amplitude = a;
    const SolverConfig solver = cfg.solver_config();
    std::vector<double> sups(cfg.ensemble_size, 0.0);
    parallel_for(cfg.ensemble_size, cfg.workers, [&](std::size_t m) {
      const auto traj = solve(solver, {cfg.master_seed, m, nullptr});
      double sup = 0.0;
      for (std::size_t j = 0; j < traj.size(); ++j) sup = std::max(sup, energy(traj.v_star(j)));
      sups[m] = sup;
    });
    out.push_back(energy_bound_report(sups));
  }
  return out;
}

}  // namespace snls
