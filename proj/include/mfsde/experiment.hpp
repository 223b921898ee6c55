#pragma once

#include "mfsde/catalog.hpp"
#include "mfsde/parallel.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mfsde {

enum class ExperimentKind { Simulate, Converge, Krylov, Chaos, Meanfield, Report };

std::string_view kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);

/// Malformed configuration. line is 1-based; 0 means the problem is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string key, const std::string& message);
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Simulate;
  std::string experiment_id;
  std::string model;
  ParamMap params;  ///< from `param.<name>` keys
  int dim = 1;
  double T = 1.0;
  std::vector<int> n_sweep;  ///< `n` or `n_sweep`
  int R = 1;
  std::vector<int> N_sweep;  ///< `N` or `N_sweep`
  int M = 4096;
  double beta = 2.0;
  double p = 3.0;
  std::vector<double> r_sweep{1.0};
  std::uint64_t seed = 0;
  std::string out;
  std::string json_out;
  unsigned threads = 1;
  double x0 = 0.0;
  std::string init = "dirac";
  ParamMap init_params;  ///< from `init.<name>` keys
  int reference_factor = 16;
  double weak_radius = 0.0;  ///< > 0 adds weak errors for f = 1_{|x| <= weak_radius}
};

/// Values that replace (or supply) config entries, e.g. from the command line.
struct ConfigOverrides {
  std::optional<ExperimentKind> kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> json_out;
  std::optional<unsigned> threads;
};

/**
 * Flat `key = value` lines, `#` starts a comment, lists are comma separated.
 * Throws ConfigError for unknown keys, malformed values, unknown models and
 * missing required keys.
 */
ExperimentConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});

struct ResultRow {
  std::string experiment_id;
  std::string kind;
  std::string model;
  std::optional<double> h;
  std::optional<int> n_steps;
  std::optional<int> n_particles;
  std::optional<double> p;
  std::optional<double> beta;
  std::string metric;
  double value = 0.0;
  std::optional<double> std_error;
  std::optional<int> replications;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "experiment_id,kind,model,h,n_steps,n_particles,p,beta,metric,value,stderr,replications,seed,wall_ms";

/// Runs the experiment and writes config.out / config.json_out when set.
std::vector<ResultRow> run(const ExperimentConfig& config);

/// Same, without touching the file system.
std::vector<ResultRow> run_rows(const ExperimentConfig& config);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<ResultRow>& rows);
std::string to_json(const std::vector<ResultRow>& rows);

}  // namespace mfsde
