#ifndef ETFP_EXPERIMENT_HPP_
#define ETFP_EXPERIMENT_HPP_

// Monte Carlo harness: simulate uniformly weighted collusions of size K,
// sweep the detection threshold over a grid, pick the smallest threshold
// whose empirical false-alarm rate meets the constraint, and tabulate the
// resulting probability of catching at least one colluder.
//
// Trial t of coalition-size slot i draws everything (coalition, then noise)
// from a generator seeded with trial_seed(master_seed, i, t), so results do
// not depend on how trials are split across threads.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etfp/designs.hpp"

namespace etfp {

// Where an experiment's design comes from. Text form `<type>:<argument>`:
//   etf:<v>                 (2,2,v)-Steiner ETF with a Sylvester Hadamard
//   steiner:<path>          incidence file + Sylvester Hadamard of order r+1
//   orthogonal:<N>          identity
//   simplex:<N>             regular simplex, M = N+1
//   file:<path>             design matrix file
struct DesignSource {
  enum class Type { etf_pairs, steiner_file, orthogonal, simplex, design_file };

  Type type = Type::orthogonal;
  Index size = 0;
  std::filesystem::path path;

  static DesignSource parse(std::string_view text);
  std::string to_string() const;
  DesignMatrix<double> build() const;
};

struct ExperimentConfig {
  std::vector<DesignSource> designs;
  std::vector<Index> k_values;
  std::uint64_t trials = 50'000;
  double per_dim_energy = 1.0;
  double sigma2 = 1.0;
  double p_fa_max = 1e-3;
  Index tau_grid_count = 512;
  double tau_grid_min = 0.0;
  std::optional<double> tau_grid_max;  // default 1 + mu of each design
  std::vector<double> tau_grid_values;  // explicit grid; overrides count/min/max
  std::optional<std::uint64_t> master_seed;  // unset runs as seed 0
  unsigned threads = 1;                 // 0 = hardware concurrency

  void validate() const;
  std::vector<double> tau_grid(double mu) const;
};

// Flat `key = value` text, `#` starts a comment. Keys are the field names
// above; `designs` and `k_values` take comma lists, and k_values also
// accepts ranges such as `1-12`.
ExperimentConfig parse_experiment_config(std::istream &in);
ExperimentConfig load_experiment_config(const std::filesystem::path &path);
std::string to_config_text(const ExperimentConfig &cfg);

// Counts for one coalition size over the whole threshold grid.
struct SweepRow {
  Index K = 0;
  std::uint64_t trials = 0;
  std::vector<double> tau;
  std::vector<std::uint64_t> detections;    // trials with some colluder at T >= tau
  std::vector<std::uint64_t> false_alarms;  // trials with some innocent at T >= tau

  SweepRow &operator+=(const SweepRow &other);
};

struct SweepAggregate {
  std::vector<SweepRow> rows;  // in cfg.k_values order

  const SweepRow &at(Index K) const;
};

SweepAggregate run_sweep(const ExperimentConfig &cfg, const DesignMatrix<double> &F);

struct CurvePoint {
  Index K = 0;
  std::uint64_t trials = 0;
  bool feasible = false;
  double tau = 0;
  double p_fa = 0;
  double p_d = 0;
};

// Smallest grid tau with false_alarms / trials <= p_fa_max. A zero count
// satisfies any positive constraint.
CurvePoint select_threshold(const SweepAggregate &agg, Index K, double p_fa_max);

struct DesignCurve {
  std::string design;  // kind name
  Index N = 0;
  Index M = 0;
  double mu = 0;
  std::vector<CurvePoint> points;
};

struct ExperimentResult {
  std::uint64_t master_seed = 0;
  std::vector<DesignCurve> curves;
};

ExperimentResult run_experiment(const ExperimentConfig &cfg);
ExperimentResult run_experiment(const ExperimentConfig &cfg,
                                const std::vector<DesignMatrix<double>> &designs);

// Header `design,N,M,K,trials,tau,p_fa,p_d,seed`, one row per (design, K),
// reals with 6 significant digits, `nan` for infeasible thresholds.
std::string results_csv(const ExperimentResult &result);

}  // namespace etfp

#endif  // ETFP_EXPERIMENT_HPP_
