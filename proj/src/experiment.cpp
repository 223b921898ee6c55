#include "mfsde/experiment.hpp"

#include "mfsde/diagnostics.hpp"
#include "mfsde/krylov.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace mfsde {

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::Simulate, "simulate"}, {ExperimentKind::Converge, "converge"},
    {ExperimentKind::Krylov, "krylov"},     {ExperimentKind::Chaos, "chaos"},
    {ExperimentKind::Meanfield, "meanfield"}, {ExperimentKind::Report, "report"},
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, int line, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw ConfigError(line, key, "malformed number '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(line, key, "value must be finite");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, int line, const std::string& key) {
  std::vector<T> out;
  for (auto item : split_list(text)) out.push_back(parse_number<T>(item, line, key));
  return out;
}

const std::set<std::string, std::less<>> kKeys = {
    "kind", "experiment_id", "model", "dim", "T", "n", "n_sweep", "R", "N", "N_sweep", "M", "beta", "p",
    "r_sweep", "seed", "out", "json_out", "threads", "x0", "init", "reference_factor", "weak_radius"};

struct Entry {
  std::string value;
  int line = 0;
};

int line_of(const std::map<std::string, Entry>& e, const std::string& key) {
  const auto it = e.find(key);
  return it == e.end() ? 0 : it->second.line;
}

void require(const std::map<std::string, Entry>& e, std::initializer_list<const char*> keys,
             std::string_view kind) {
  for (const char* k : keys) {
    if (!e.contains(k)) {
      throw ConfigError(0, k, "missing required key '" + std::string(k) + "' for kind " + std::string(kind));
    }
  }
}

void check_params(const CatalogEntry& entry, const ParamMap& params, const std::map<std::string, int>& lines,
                  const std::string& prefix) {
  for (const auto& [name, value] : params) {
    const bool known = std::any_of(entry.defaults.begin(), entry.defaults.end(),
                                   [&](const auto& d) { return d.first == name; });
    if (!known) {
      throw ConfigError(lines.at(name), prefix + name,
                        "unknown parameter '" + name + "' for '" + entry.name + "'");
    }
  }
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKinds) {
    if (n == name) return k;
  }
  return std::nullopt;
}

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string("config: ")) + "key '" +
                         key + "': " + message),
      line_(line),
      key_(std::move(key)) {}

ExperimentConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  std::map<std::string, Entry> entries;
  std::map<std::string, int> param_lines;
  std::map<std::string, int> init_lines;
  ExperimentConfig cfg;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(line_no, std::string(line), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(line_no, key, "empty key");
    if (entries.contains(key)) throw ConfigError(line_no, key, "duplicate key");
    if (key.starts_with("param.")) {
      const std::string name = key.substr(6);
      cfg.params[name] = parse_number<double>(value, line_no, key);
      param_lines[name] = line_no;
    } else if (key.starts_with("init.")) {
      const std::string name = key.substr(5);
      cfg.init_params[name] = parse_number<double>(value, line_no, key);
      init_lines[name] = line_no;
    } else if (!kKeys.contains(key)) {
      throw ConfigError(line_no, key, "unknown key '" + key + "'");
    }
    entries[key] = {value, line_no};
  }

  auto get = [&](const char* key) -> const Entry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  // kind
  if (const Entry* e = get("kind")) {
    const auto k = parse_kind(e->value);
    if (!k) throw ConfigError(e->line, "kind", "unknown experiment kind '" + e->value + "'");
    if (overrides.kind && *overrides.kind != *k) {
      throw ConfigError(e->line, "kind",
                        "config kind '" + e->value + "' does not match subcommand '" +
                            std::string(kind_name(*overrides.kind)) + "'");
    }
    cfg.kind = *k;
  } else if (overrides.kind) {
    cfg.kind = *overrides.kind;
  } else {
    throw ConfigError(0, "kind", "missing required key 'kind'");
  }
  const std::string_view kname = kind_name(cfg.kind);

  // seed
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
  } else if (const Entry* e = get("seed")) {
    cfg.seed = parse_number<std::uint64_t>(e->value, e->line, "seed");
  } else {
    throw ConfigError(0, "seed", "missing required key 'seed'");
  }

  // model
  const Entry* model = get("model");
  if (!model) throw ConfigError(0, "model", "missing required key 'model'");
  cfg.model = model->value;
  const CatalogEntry* entry = find_catalog_entry(cfg.model);
  if (!entry) throw ConfigError(model->line, "model", "unknown model '" + cfg.model + "'");
  const bool ok_kind = [&] {
    switch (cfg.kind) {
      case ExperimentKind::Converge: return entry->kind == CatalogKind::Field;
      case ExperimentKind::Krylov: return entry->kind == CatalogKind::Rule;
      case ExperimentKind::Chaos:
      case ExperimentKind::Meanfield: return entry->kind == CatalogKind::Kernel;
      case ExperimentKind::Simulate:
      case ExperimentKind::Report:
        return entry->kind == CatalogKind::Field || entry->kind == CatalogKind::Kernel;
    }
    return false;
  }();
  if (!ok_kind) {
    throw ConfigError(model->line, "model", "model '" + cfg.model + "' cannot be used with kind " + std::string(kname));
  }
  check_params(*entry, cfg.params, param_lines, "param.");

  // scalar keys
  if (const Entry* e = get("experiment_id")) cfg.experiment_id = e->value;
  if (cfg.experiment_id.empty()) cfg.experiment_id = std::string(kname);
  if (cfg.experiment_id.find_first_of(",\"\n") != std::string::npos) {
    throw ConfigError(line_of(entries, "experiment_id"), "experiment_id", "must not contain commas or quotes");
  }
  if (const Entry* e = get("dim")) {
    cfg.dim = parse_number<int>(e->value, e->line, "dim");
    if (cfg.dim < 1 || cfg.dim > kMaxDim) {
      throw ConfigError(e->line, "dim", "dimension must be in 1.." + std::to_string(kMaxDim));
    }
  }
  if (const Entry* e = get("T")) {
    cfg.T = parse_number<double>(e->value, e->line, "T");
    if (!(cfg.T > 0.0)) throw ConfigError(e->line, "T", "horizon must be positive");
  }
  if (get("n") && get("n_sweep")) throw ConfigError(get("n_sweep")->line, "n_sweep", "give either n or n_sweep");
  if (get("N") && get("N_sweep")) throw ConfigError(get("N_sweep")->line, "N_sweep", "give either N or N_sweep");
  for (const char* key : {"n", "n_sweep"}) {
    if (const Entry* e = get(key)) cfg.n_sweep = parse_list<int>(e->value, e->line, key);
  }
  for (const char* key : {"N", "N_sweep"}) {
    if (const Entry* e = get(key)) cfg.N_sweep = parse_list<int>(e->value, e->line, key);
  }
  for (const char* key : {"n", "n_sweep", "N", "N_sweep"}) {
    const Entry* e = get(key);
    if (!e) continue;
    const auto& sweep = (key[0] == 'n') ? cfg.n_sweep : cfg.N_sweep;
    if (sweep.empty() || std::any_of(sweep.begin(), sweep.end(), [](int v) { return v < 1; })) {
      throw ConfigError(e->line, key, "sweep values must be positive integers");
    }
  }
  if (const Entry* e = get("R")) {
    cfg.R = parse_number<int>(e->value, e->line, "R");
    if (cfg.R < 1) throw ConfigError(e->line, "R", "replications must be >= 1");
  }
  if (const Entry* e = get("M")) {
    cfg.M = parse_number<int>(e->value, e->line, "M");
    if (cfg.M < 1) throw ConfigError(e->line, "M", "pool size must be >= 1");
  }
  if (const Entry* e = get("beta")) {
    cfg.beta = parse_number<double>(e->value, e->line, "beta");
    if (cfg.beta < 2.0) throw ConfigError(e->line, "beta", "moment order must be >= 2");
  }
  if (const Entry* e = get("p")) {
    cfg.p = parse_number<double>(e->value, e->line, "p");
    if (!(cfg.p > 1.0)) throw ConfigError(e->line, "p", "exponent must be > 1");
  }
  if (const Entry* e = get("r_sweep")) {
    cfg.r_sweep = parse_list<double>(e->value, e->line, "r_sweep");
    if (std::any_of(cfg.r_sweep.begin(), cfg.r_sweep.end(), [](double r) { return !(r > 0.0); })) {
      throw ConfigError(e->line, "r_sweep", "radii must be positive");
    }
  }
  if (const Entry* e = get("threads")) {
    const int t = parse_number<int>(e->value, e->line, "threads");
    if (t < 1) throw ConfigError(e->line, "threads", "thread count must be >= 1");
    cfg.threads = static_cast<unsigned>(t);
  }
  if (const Entry* e = get("x0")) cfg.x0 = parse_number<double>(e->value, e->line, "x0");
  if (const Entry* e = get("reference_factor")) {
    cfg.reference_factor = parse_number<int>(e->value, e->line, "reference_factor");
    if (cfg.reference_factor < 2) throw ConfigError(e->line, "reference_factor", "must be >= 2");
  }
  if (const Entry* e = get("weak_radius")) {
    cfg.weak_radius = parse_number<double>(e->value, e->line, "weak_radius");
    if (!(cfg.weak_radius > 0.0)) throw ConfigError(e->line, "weak_radius", "must be positive");
  }
  if (const Entry* e = get("out")) cfg.out = e->value;
  if (const Entry* e = get("json_out")) cfg.json_out = e->value;
  if (overrides.out) cfg.out = *overrides.out;
  if (overrides.json_out) cfg.json_out = *overrides.json_out;
  if (overrides.threads) {
    if (*overrides.threads < 1) throw ConfigError(0, "threads", "thread count must be >= 1");
    cfg.threads = *overrides.threads;
  }

  // initial law
  if (const Entry* e = get("init")) cfg.init = e->value;
  const CatalogEntry* law = find_catalog_entry(cfg.init);
  if (!law || law->kind != CatalogKind::Law) {
    throw ConfigError(line_of(entries, "init"), "init", "unknown initial law '" + cfg.init + "'");
  }
  check_params(*law, cfg.init_params, init_lines, "init.");

  // per-kind requirements
  switch (cfg.kind) {
    case ExperimentKind::Simulate:
      require(entries, {"R"}, kname);
      if (cfg.n_sweep.empty()) throw ConfigError(0, "n", "missing required key 'n' for kind simulate");
      if (entry->kind == CatalogKind::Kernel && cfg.N_sweep.empty()) {
        throw ConfigError(0, "N", "missing required key 'N' for a kernel model");
      }
      break;
    case ExperimentKind::Converge:
    case ExperimentKind::Report:
      require(entries, {"R"}, kname);
      if (cfg.n_sweep.empty()) throw ConfigError(0, "n_sweep", "missing required key 'n_sweep' for kind " + std::string(kname));
      if (entry->kind == CatalogKind::Kernel && cfg.N_sweep.empty()) {
        throw ConfigError(0, "N", "missing required key 'N' for a kernel model");
      }
      {
        const int top = *std::max_element(cfg.n_sweep.begin(), cfg.n_sweep.end());
        for (int n : cfg.n_sweep) {
          if (top % n != 0) {
            throw ConfigError(line_of(entries, get("n") ? "n" : "n_sweep"), get("n") ? "n" : "n_sweep",
                              "every step count must divide the largest one");
          }
        }
      }
      if (cfg.kind == ExperimentKind::Converge && cfg.n_sweep.size() < 3) {
        throw ConfigError(line_of(entries, "n_sweep"), "n_sweep", "a rate fit needs at least 3 step counts");
      }
      break;
    case ExperimentKind::Krylov:
      require(entries, {"R"}, kname);
      if (cfg.N_sweep.empty()) throw ConfigError(0, "N_sweep", "missing required key 'N_sweep' for kind krylov");
      break;
    case ExperimentKind::Chaos:
      require(entries, {"R"}, kname);
      if (cfg.n_sweep.size() != 1) throw ConfigError(line_of(entries, "n_sweep"), "n", "chaos needs a single 'n'");
      if (cfg.N_sweep.empty()) throw ConfigError(0, "N_sweep", "missing required key 'N_sweep' for kind chaos");
      if (*std::max_element(cfg.N_sweep.begin(), cfg.N_sweep.end()) > cfg.M) {
        throw ConfigError(line_of(entries, "M"), "M", "pool size must be at least the largest N");
      }
      break;
    case ExperimentKind::Meanfield:
      if (cfg.n_sweep.size() != 1) throw ConfigError(line_of(entries, "n_sweep"), "n", "meanfield needs a single 'n'");
      break;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

using Clock = std::chrono::steady_clock;

struct Emitter {
  const ExperimentConfig& cfg;
  std::vector<ResultRow>& rows;
  Clock::time_point start = Clock::now();

  ResultRow& emit(std::string metric, double value) {
    ResultRow r;
    r.experiment_id = cfg.experiment_id;
    r.kind = std::string(kind_name(cfg.kind));
    r.model = cfg.model;
    r.metric = std::move(metric);
    r.value = value;
    r.seed = cfg.seed;
    if (cfg.kind == ExperimentKind::Simulate || cfg.kind == ExperimentKind::Report) r.beta = cfg.beta;
    r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    rows.push_back(std::move(r));
    return rows.back();
  }
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string with_params(const std::string& model, const ParamMap& params) {
  if (params.empty()) return model;
  std::string out = model + "(";
  bool first = true;
  for (const auto& [k, v] : params) {
    out += (first ? "" : ";") + k + "=" + format_double(v);
    first = false;
  }
  return out + ")";
}

StreamKey master_key(const ExperimentConfig& cfg) { return StreamKey(cfg.seed); }

double slope_of(std::span<const double> u, std::span<const double> y) {
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double suu = 0.0;
  double suy = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suy += (u[i] - mu) * (y[i] - my);
  }
  return suy / suu;
}

void emit_rate(Emitter& em, const std::vector<std::pair<double, double>>& points,
               const std::vector<double>& std_errors, const std::string& prefix) {
  if (points.size() < 3) return;
  const RateFit fit = fit_rate(points);
  em.emit(prefix + "rate_slope", fit.slope).std_error = fit.slope_std_error;
  em.emit(prefix + "rate_r_squared", fit.r_squared);
  // Propagated Monte Carlo error of the slope (delta method on the logs).
  std::vector<double> u;
  std::vector<double> s;
  for (std::size_t i = 0; i < points.size(); ++i) {
    u.push_back(std::log(points[i].first));
    s.push_back(std_errors[i] / points[i].second);
  }
  em.emit(prefix + "rate_slope_mc_stderr", slope_std_error(u, s));
}

// --- simulate ---------------------------------------------------------------

void run_simulate(const ExperimentConfig& cfg, Emitter& em) {
  const Exec exec{cfg.threads};
  const StreamKey master = master_key(cfg);
  const int n = cfg.n_sweep.front();
  const TimeGrid grid = make_grid(cfg.T, n);
  const CatalogEntry* entry = find_catalog_entry(cfg.model);
  std::vector<Trajectory> paths(static_cast<std::size_t>(cfg.R));
  std::vector<double> terminal_mean(paths.size());
  std::optional<int> n_particles;

  if (entry->kind == CatalogKind::Field) {
    const SdeModel model = make_field_model(cfg.model, cfg.params, cfg.dim);
    const Vec x0 = Vec::Constant(cfg.dim, cfg.x0);
    parallel_for(exec, paths.size(), [&](std::size_t r) {
      const BrownianPath bm = sample_brownian(grid, cfg.dim, master.with("path", static_cast<std::int64_t>(r)));
      paths[r] = simulate_euler(model.drift, model.diffusion, x0, grid, bm).states;
      terminal_mean[r] = paths[r](n, 0);
    });
  } else {
    const InteractionKernel kernel = make_kernel(cfg.model, cfg.params, cfg.dim);
    const InitialLaw law = make_law(cfg.init, cfg.init_params, cfg.dim);
    const int N = cfg.N_sweep.front();
    n_particles = N;
    parallel_for(exec, paths.size(), [&](std::size_t r) {
      const ParticleEnsemble ps =
          simulate_particle_system(kernel, law, N, grid, master.with("rep", static_cast<std::int64_t>(r)));
      paths[r] = ps.trajectory(0);
      terminal_mean[r] = ps.nodes.back().col(0).sum() / N;
    });
  }

  const PathEnsemble ens = make_path_ensemble(grid, std::move(paths), master, cfg.model);
  std::vector<double> second(ens.paths.size());
  for (std::size_t r = 0; r < ens.paths.size(); ++r) second[r] = ens.paths[r].row(n).squaredNorm();

  auto tag = [&](ResultRow& row, const Estimate& e) {
    row.model = with_params(cfg.model, cfg.params);
    row.h = grid.step();
    row.n_steps = n;
    row.n_particles = n_particles;
    row.std_error = e.std_error;
    row.replications = e.replications;
  };
  const Estimate m = mean_estimate(terminal_mean);
  tag(em.emit("terminal_mean", m.value), m);
  const Estimate s = mean_estimate(second);
  tag(em.emit("terminal_second_moment", s.value), s);
  const ErrorEstimate sm = sup_moment(ens, cfg.beta);
  tag(em.emit("sup_moment", sm.value), {sm.value, sm.std_error, sm.replications});
}

// --- converge / report on field models ----------------------------------------

struct LevelSamples {
  std::vector<double> sup_sq;    // sup |X^h - X^{h/f}|^2 on the finer grid
  std::vector<double> weak_diff; // occupation(X^h) - occupation(X^{h/f})
  std::vector<Trajectory> paths; // kept for report
};

std::vector<LevelSamples> coupled_levels(const ExperimentConfig& cfg, const SdeModel& model, bool keep_paths) {
  const Exec exec{cfg.threads};
  const StreamKey master = master_key(cfg);
  const int top = *std::max_element(cfg.n_sweep.begin(), cfg.n_sweep.end());
  const int finest = top * cfg.reference_factor;
  const TimeGrid fine_grid = make_grid(cfg.T, finest);
  const Vec x0 = Vec::Constant(cfg.dim, cfg.x0);
  const double radius2 = cfg.weak_radius * cfg.weak_radius;
  auto occupation = [&](const EulerPath& p) {
    double acc = 0.0;
    for (int k = 0; k < p.grid.steps(); ++k) acc += p.states.row(k).squaredNorm() <= radius2 ? 1.0 : 0.0;
    return p.grid.step() * acc;
  };

  std::vector<LevelSamples> levels(cfg.n_sweep.size());
  for (auto& l : levels) {
    l.sup_sq.resize(static_cast<std::size_t>(cfg.R));
    l.weak_diff.resize(static_cast<std::size_t>(cfg.R));
    if (keep_paths) l.paths.resize(static_cast<std::size_t>(cfg.R));
  }
  parallel_for(exec, static_cast<std::size_t>(cfg.R), [&](std::size_t r) {
    const BrownianPath bm = sample_brownian(fine_grid, cfg.dim, master.with("path", static_cast<std::int64_t>(r)));
    std::map<int, std::pair<BrownianPath, EulerPath>> cache;
    auto level = [&](int n) -> const std::pair<BrownianPath, EulerPath>& {
      auto it = cache.find(n);
      if (it == cache.end()) {
        BrownianPath b = coarsen(bm, finest / n);
        EulerPath e = simulate_euler(model.drift, model.diffusion, x0, b.grid(), b);
        it = cache.emplace(n, std::make_pair(std::move(b), std::move(e))).first;
      }
      return it->second;
    };
    for (std::size_t i = 0; i < cfg.n_sweep.size(); ++i) {
      const int n = cfg.n_sweep[i];
      const auto& [bm_h, path_h] = level(n);
      const auto& [bm_ref, path_ref] = level(n * cfg.reference_factor);
      const EulerPath lifted = interpolate_onto(path_h, model.drift, model.diffusion, bm_ref);
      levels[i].sup_sq[r] = sup_square_difference(lifted.states, bm_ref.grid(), path_ref.states, bm_ref.grid());
      if (cfg.weak_radius > 0.0) levels[i].weak_diff[r] = occupation(path_h) - occupation(path_ref);
      if (keep_paths) levels[i].paths[r] = path_h.states;
    }
  });
  return levels;
}

void run_converge(const ExperimentConfig& cfg, Emitter& em) {
  const SdeModel model = make_field_model(cfg.model, cfg.params, cfg.dim);
  const auto levels = coupled_levels(cfg, model, false);
  std::vector<std::pair<double, double>> points;
  std::vector<double> errs;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const int n = cfg.n_sweep[i];
    const double h = cfg.T / n;
    const Estimate rms = jackknife_of_mean(levels[i].sup_sq, [](double m) { return std::sqrt(m); });
    ResultRow& row = em.emit("strong_rms_error", rms.value);
    row.model = with_params(cfg.model, cfg.params);
    row.h = h;
    row.n_steps = n;
    row.std_error = rms.std_error;
    row.replications = rms.replications;
    points.emplace_back(h, rms.value);
    errs.push_back(rms.std_error);
    if (cfg.weak_radius > 0.0) {
      const Estimate w = mean_estimate(levels[i].weak_diff);
      ResultRow& wr = em.emit("weak_occupation_error", std::abs(w.value));
      wr.model = row.model;
      wr.h = h;
      wr.n_steps = n;
      wr.std_error = w.std_error;
      wr.replications = w.replications;
    }
  }
  const std::size_t first = em.rows.size();
  emit_rate(em, points, errs, "");
  for (std::size_t i = first; i < em.rows.size(); ++i) {
    em.rows[i].model = with_params(cfg.model, cfg.params);
    em.rows[i].replications = cfg.R;
  }
}

void run_report(const ExperimentConfig& cfg, Emitter& em) {
  const StreamKey master = master_key(cfg);
  const CatalogEntry* entry = find_catalog_entry(cfg.model);
  std::vector<LevelSamples> levels;
  std::optional<int> n_particles;
  if (entry->kind == CatalogKind::Field) {
    levels = coupled_levels(cfg, make_field_model(cfg.model, cfg.params, cfg.dim), true);
  } else {
    const InteractionKernel kernel = make_kernel(cfg.model, cfg.params, cfg.dim);
    const InitialLaw law = make_law(cfg.init, cfg.init_params, cfg.dim);
    const int N = cfg.N_sweep.front();
    n_particles = N;
    levels.resize(cfg.n_sweep.size());
    for (std::size_t i = 0; i < cfg.n_sweep.size(); ++i) {
      const TimeGrid grid = make_grid(cfg.T, cfg.n_sweep[i]);
      levels[i].paths.resize(static_cast<std::size_t>(cfg.R));
      parallel_for(Exec{cfg.threads}, levels[i].paths.size(), [&](std::size_t r) {
        levels[i].paths[r] =
            simulate_particle_system(kernel, law, N, grid, master.with("rep", static_cast<std::int64_t>(r)))
                .trajectory(0);
      });
    }
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const int n = cfg.n_sweep[i];
    const TimeGrid grid = make_grid(cfg.T, n);
    const PathEnsemble ens = make_path_ensemble(grid, std::move(levels[i].paths), master, cfg.model);
    auto tag = [&](ResultRow& row) {
      row.model = with_params(cfg.model, cfg.params);
      row.h = grid.step();
      row.n_steps = n;
      row.n_particles = n_particles;
      row.replications = cfg.R;
      return std::ref(row);
    };
    const ErrorEstimate sm = sup_moment(ens, cfg.beta);
    tag(em.emit("sup_moment", sm.value)).get().std_error = sm.std_error;
    tag(em.emit("holder_ratio", holder_ratio(ens, cfg.beta)));
    if (cfg.weak_radius > 0.0 && entry->kind == CatalogKind::Field) {
      const Estimate w = mean_estimate(levels[i].weak_diff);
      tag(em.emit("weak_occupation_error", std::abs(w.value))).get().std_error = w.std_error;
    }
  }
}

// --- krylov -------------------------------------------------------------------

void run_krylov(const ExperimentConfig& cfg, Emitter& em) {
  const Exec exec{cfg.threads};
  const StreamKey master = master_key(cfg);
  const AdaptedCoefficientRule rule = make_rule(cfg.model, cfg.params, cfg.dim);
  const Vec xi0 = Vec::Constant(cfg.dim, cfg.x0);
  const std::size_t nr = cfg.r_sweep.size();

  double max_ratio = 0.0;
  std::vector<double> logN;
  std::vector<double> worst;
  std::vector<double> worst_err;
  for (int N : cfg.N_sweep) {
    const TimeGrid grid = make_grid(1.0, N);
    std::vector<GridFunctionFamily> families;
    for (double r : cfg.r_sweep) families.push_back(ball_indicator_family(r, cfg.dim, N));
    std::vector<std::vector<double>> occ(nr, std::vector<double>(static_cast<std::size_t>(cfg.R)));
    parallel_for(exec, static_cast<std::size_t>(cfg.R), [&](std::size_t i) {
      const StreamKey key = master.with("krylov", static_cast<std::int64_t>(i));
      const DiscretizedItoPath path = simulate_discretized_ito(rule, xi0, sample_brownian(grid, cfg.dim, key), key);
      for (std::size_t a = 0; a < nr; ++a) occ[a][i] = occupation_samples(std::span(&path, 1), families[a]).front();
    });
    double best = -1.0;
    double best_err = 0.0;
    for (std::size_t a = 0; a < nr; ++a) {
      const KrylovRatio kr = krylov_ratio(occ[a], families[a], cfg.p);
      const std::string model = cfg.model + "(r=" + format_double(cfg.r_sweep[a]) + ")";
      for (auto [metric, value, se] : {std::tuple{"krylov_ratio", kr.ratio, kr.std_error},
                                       std::tuple{"occupation_average", kr.occupation, kr.std_error * kr.normalizer}}) {
        ResultRow& row = em.emit(metric, value);
        row.model = model;
        row.h = 1.0 / N;
        row.n_steps = N;
        row.p = cfg.p;
        row.std_error = se;
        row.replications = cfg.R;
      }
      if (kr.ratio > best) {
        best = kr.ratio;
        best_err = kr.std_error;
      }
    }
    max_ratio = std::max(max_ratio, best);
    logN.push_back(std::log(static_cast<double>(N)));
    worst.push_back(best);
    worst_err.push_back(best_err);
  }
  auto summary = [&](const char* metric, double value) -> ResultRow& {
    ResultRow& row = em.emit(metric, value);
    row.p = cfg.p;
    row.replications = cfg.R;
    return row;
  };
  summary("krylov_max_ratio", max_ratio);
  if (logN.size() >= 2) {
    summary("krylov_trend_slope", slope_of(logN, worst)).std_error = slope_std_error(logN, worst_err);
  }
}

// --- chaos / meanfield --------------------------------------------------------

IidEnsemble prefix(const IidEnsemble& all, int N) {
  IidEnsemble out;
  out.law_pool = all.law_pool;
  out.copies.grid = all.copies.grid;
  out.copies.keys.assign(all.copies.keys.begin(), all.copies.keys.begin() + N);
  for (const auto& node : all.copies.nodes) out.copies.nodes.push_back(node.topRows(N));
  return out;
}

void run_chaos(const ExperimentConfig& cfg, Emitter& em) {
  const Exec exec{cfg.threads};
  const StreamKey master = master_key(cfg);
  const InteractionKernel kernel = make_kernel(cfg.model, cfg.params, cfg.dim);
  const InitialLaw law = make_law(cfg.init, cfg.init_params, cfg.dim);
  const int n = cfg.n_sweep.front();
  const TimeGrid grid = make_grid(cfg.T, n);
  const auto pool = simulate_law_pool(kernel, law, cfg.M, grid, master.with("law", 0), exec);
  const int top = *std::max_element(cfg.N_sweep.begin(), cfg.N_sweep.end());
  const std::size_t nN = cfg.N_sweep.size();
  const auto R = static_cast<std::size_t>(cfg.R);
  const bool closed = static_cast<bool>(kernel.closed_form_drift);

  // chaos[a][j][r], deviation[a][r]
  std::vector<std::vector<std::vector<double>>> chaos(nN);
  for (std::size_t a = 0; a < nN; ++a) {
    chaos[a].assign(static_cast<std::size_t>(cfg.N_sweep[a]), std::vector<double>(R));
  }
  std::vector<std::vector<double>> deviation(nN, std::vector<double>(R));
  parallel_for(exec, R, [&](std::size_t r) {
    const StreamKey rep = master.with("rep", static_cast<std::int64_t>(r));
    const IidEnsemble all = simulate_mckean(kernel, law, top, pool, rep);
    for (std::size_t a = 0; a < nN; ++a) {
      const int N = cfg.N_sweep[a];
      const IidEnsemble copies = prefix(all, N);
      const ParticleEnsemble ps = simulate_particle_system(kernel, law, N, grid, rep);
      const auto sups = chaos_sup_samples(ps, copies);
      for (int j = 0; j < N; ++j) chaos[a][static_cast<std::size_t>(j)][r] = sups[static_cast<std::size_t>(j)];
      if (closed) deviation[a][r] = kernel_average_deviation_sample(copies, kernel, n, N);
    }
  });

  std::vector<std::pair<double, double>> chaos_points;
  std::vector<double> chaos_err;
  std::vector<std::pair<double, double>> dev_points;
  std::vector<double> dev_err;
  for (std::size_t a = 0; a < nN; ++a) {
    const int N = cfg.N_sweep[a];
    auto tag = [&](ResultRow& row, double se) {
      row.model = with_params(cfg.model, cfg.params);
      row.h = grid.step();
      row.n_steps = n;
      row.n_particles = N;
      row.std_error = se;
      row.replications = cfg.R;
    };
    const ErrorEstimate c = worst_particle_error(chaos[a]);
    tag(em.emit("chaos_sup_error", c.value), c.std_error);
    chaos_points.emplace_back(N, c.value);
    chaos_err.push_back(c.std_error);
    if (closed) {
      const Estimate d = mean_estimate(deviation[a]);
      tag(em.emit("kernel_average_deviation", d.value), d.std_error);
      dev_points.emplace_back(N, d.value);
      dev_err.push_back(d.std_error);
    }
  }
  const std::size_t first = em.rows.size();
  if (std::all_of(chaos_points.begin(), chaos_points.end(), [](const auto& q) { return q.second > 0.0; })) {
    emit_rate(em, chaos_points, chaos_err, "chaos_");
  }
  if (closed && std::all_of(dev_points.begin(), dev_points.end(), [](const auto& q) { return q.second > 0.0; })) {
    emit_rate(em, dev_points, dev_err, "deviation_");
  }
  for (std::size_t i = first; i < em.rows.size(); ++i) {
    em.rows[i].model = with_params(cfg.model, cfg.params);
    em.rows[i].h = grid.step();
    em.rows[i].n_steps = n;
    em.rows[i].replications = cfg.R;
  }
}

void run_meanfield(const ExperimentConfig& cfg, Emitter& em) {
  const Exec exec{cfg.threads};
  const StreamKey master = master_key(cfg);
  const InteractionKernel kernel = make_kernel(cfg.model, cfg.params, cfg.dim);
  const InitialLaw law = make_law(cfg.init, cfg.init_params, cfg.dim);
  const int n = cfg.n_sweep.front();
  const TimeGrid grid = make_grid(cfg.T, n);

  std::vector<double> means;
  std::vector<double> seconds;
  std::shared_ptr<const ParticleEnsemble> first_pool;
  for (int r = 0; r < cfg.R; ++r) {
    const auto pool = simulate_law_pool(kernel, law, cfg.M, grid, master.with("law", r), exec);
    const Trajectory& last = pool->nodes.back();
    means.push_back(last.col(0).sum() / cfg.M);
    seconds.push_back(last.rowwise().squaredNorm().sum() / cfg.M);
    if (r == 0) first_pool = pool;
  }
  auto across = [&](const std::vector<double>& per_pool, auto&& per_atom) {
    if (per_pool.size() >= 2) return mean_estimate(per_pool);
    // One pool: the naive within-pool standard error.
    const Trajectory& last = first_pool->nodes.back();
    std::vector<double> v(static_cast<std::size_t>(last.rows()));
    for (Eigen::Index i = 0; i < last.rows(); ++i) v[static_cast<std::size_t>(i)] = per_atom(last, i);
    return mean_estimate(v);
  };
  auto tag = [&](ResultRow& row, const Estimate& e, std::optional<int> particles) {
    row.model = with_params(cfg.model, cfg.params);
    row.h = grid.step();
    row.n_steps = n;
    row.n_particles = particles;
    row.std_error = e.std_error;
    row.replications = cfg.R;
  };
  const Estimate m = across(means, [](const Trajectory& t, Eigen::Index i) { return t(i, 0); });
  tag(em.emit("pool_mean", m.value), m, cfg.M);
  const Estimate s = across(seconds, [](const Trajectory& t, Eigen::Index i) { return t.row(i).squaredNorm(); });
  tag(em.emit("pool_second_moment", s.value), s, cfg.M);

  const EmpiricalMeasure law_T = first_pool->measure_at(n);
  for (int N : cfg.N_sweep) {
    const ParticleEnsemble ps = simulate_particle_system(kernel, law, N, grid, master.with("rep", 0), exec);
    const double w1 = wasserstein(ps.measure_at(n), law_T, 1, 64, master.with("directions", 0));
    ResultRow& row = em.emit("wasserstein1", w1);
    tag(row, {w1, 0.0, 1}, N);
    row.std_error.reset();
  }
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }
std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

}  // namespace

std::vector<ResultRow> run_rows(const ExperimentConfig& config) {
  std::vector<ResultRow> rows;
  Emitter em{config, rows};
  switch (config.kind) {
    case ExperimentKind::Simulate: run_simulate(config, em); break;
    case ExperimentKind::Converge: run_converge(config, em); break;
    case ExperimentKind::Krylov: run_krylov(config, em); break;
    case ExperimentKind::Chaos: run_chaos(config, em); break;
    case ExperimentKind::Meanfield: run_meanfield(config, em); break;
    case ExperimentKind::Report: run_report(config, em); break;
  }
  return rows;
}

std::vector<ResultRow> run(const ExperimentConfig& config) {
  auto rows = run_rows(config);
  auto write = [](const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << body;
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
  };
  if (!config.out.empty()) write(config.out, to_csv(rows));
  if (!config.json_out.empty()) write(config.json_out, to_json(rows));
  return rows;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.experiment_id << ',' << r.kind << ',' << r.model << ',' << opt(r.h) << ',' << opt(r.n_steps) << ','
       << opt(r.n_particles) << ',' << opt(r.p) << ',' << opt(r.beta) << ',' << r.metric << ','
       << format_double(r.value) << ',' << opt(r.std_error) << ',' << opt(r.replications) << ',' << r.seed << ','
       << format_double(r.wall_ms) << '\n';
  }
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

std::string to_json(const std::vector<ResultRow>& rows) {
  auto j = nlohmann::json::array();
  auto put = [](nlohmann::json& o, const char* key, const auto& v) {
    if (v) o[key] = *v;
    else o[key] = nullptr;
  };
  for (const auto& r : rows) {
    nlohmann::json o;
    o["experiment_id"] = r.experiment_id;
    o["kind"] = r.kind;
    o["model"] = r.model;
    put(o, "h", r.h);
    put(o, "n_steps", r.n_steps);
    put(o, "n_particles", r.n_particles);
    put(o, "p", r.p);
    put(o, "beta", r.beta);
    o["metric"] = r.metric;
    o["value"] = r.value;
    put(o, "stderr", r.std_error);
    put(o, "replications", r.replications);
    o["seed"] = r.seed;
    o["wall_ms"] = r.wall_ms;
    j.push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

}  // namespace mfsde
