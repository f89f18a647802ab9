#include "etfp/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <thread>

#include "etfp/channel.hpp"
#include "etfp/design_io.hpp"
#include "etfp/random.hpp"

namespace etfp {

// ---------------------------------------------------------------------------
// Design sources

DesignSource DesignSource::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("design source '" + std::string(text) + "' must look like <type>:<argument>");
  }
  const std::string type(text.substr(0, colon));
  const std::string arg(text.substr(colon + 1));
  DesignSource src;
  auto parse_size = [&] {
    char *end = nullptr;
    const long long n = std::strtoll(arg.c_str(), &end, 10);
    if (arg.empty() || end != arg.c_str() + arg.size() || n < 1) {
      throw ParseError("design source '" + std::string(text) + "': '" + arg +
                       "' is not a positive integer");
    }
    return Index(n);
  };
  if (type == "etf") {
    src.type = Type::etf_pairs;
    src.size = parse_size();
  } else if (type == "orthogonal") {
    src.type = Type::orthogonal;
    src.size = parse_size();
  } else if (type == "simplex") {
    src.type = Type::simplex;
    src.size = parse_size();
  } else if (type == "steiner") {
    src.type = Type::steiner_file;
    src.path = arg;
  } else if (type == "file") {
    src.type = Type::design_file;
    src.path = arg;
  } else {
    throw ParseError("unknown design source type '" + type + "'");
  }
  if ((src.type == Type::steiner_file || src.type == Type::design_file) && arg.empty()) {
    throw ParseError("design source '" + std::string(text) + "' needs a path");
  }
  return src;
}

std::string DesignSource::to_string() const {
  switch (type) {
    case Type::etf_pairs: return "etf:" + std::to_string(size);
    case Type::orthogonal: return "orthogonal:" + std::to_string(size);
    case Type::simplex: return "simplex:" + std::to_string(size);
    case Type::steiner_file: return "steiner:" + path.string();
    case Type::design_file: return "file:" + path.string();
  }
  return {};
}

namespace {

HadamardMatrix sylvester_of_order(Index order) {
  if (order < 1 || !std::has_single_bit(std::uint64_t(order))) {
    throw DomainError("Hadamard order " + std::to_string(order) +
                      " is not a power of two; only Sylvester orders are generated");
  }
  return sylvester_hadamard(std::countr_zero(std::uint64_t(order)));
}

}  // namespace

DesignMatrix<double> DesignSource::build() const {
  switch (type) {
    case Type::etf_pairs: {
      const auto A = steiner_pairs_incidence(size);
      return steiner_etf<double>(A, sylvester_of_order(A.replication() + 1));
    }
    case Type::steiner_file: {
      const auto A = load_steiner_incidence(path);
      return steiner_etf<double>(A, sylvester_of_order(A.replication() + 1));
    }
    case Type::orthogonal: return orthogonal_design<double>(size);
    case Type::simplex: return simplex_design<double>(size);
    case Type::design_file: return load_design(path);
  }
  throw DomainError("unknown design source");
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (designs.empty()) throw DomainError("experiment: no designs configured");
  if (k_values.empty()) throw DomainError("experiment: no K values configured");
  for (Index K : k_values) {
    if (K < 1) throw DomainError("experiment: K values must be positive");
  }
  if (trials < 1) throw DomainError("experiment: trials must be at least 1");
  if (!(per_dim_energy > 0)) throw DomainError("experiment: per_dim_energy must be positive");
  if (!(sigma2 >= 0)) throw DomainError("experiment: sigma2 must be nonnegative");
  if (!(p_fa_max > 0 && p_fa_max <= 1)) {
    throw DomainError("experiment: p_fa_max must lie in (0, 1]");
  }
  if (tau_grid_values.empty()) {
    if (tau_grid_count < 1) throw DomainError("experiment: tau_grid_count must be positive");
    if (tau_grid_max && tau_grid_count > 1 && !(*tau_grid_max > tau_grid_min)) {
      throw DomainError("experiment: tau grid must be strictly increasing");
    }
  } else {
    for (std::size_t i = 1; i < tau_grid_values.size(); ++i) {
      if (!(tau_grid_values[i] > tau_grid_values[i - 1])) {
        throw DomainError("experiment: tau grid must be strictly increasing");
      }
    }
  }
}

std::vector<double> ExperimentConfig::tau_grid(double mu) const {
  if (!tau_grid_values.empty()) return tau_grid_values;
  const double hi = tau_grid_max.value_or(1.0 + mu);
  std::vector<double> grid(static_cast<std::size_t>(tau_grid_count));
  if (tau_grid_count == 1) {
    grid[0] = tau_grid_min;
    return grid;
  }
  const double step = (hi - tau_grid_min) / double(tau_grid_count - 1);
  for (Index i = 0; i < tau_grid_count; ++i) {
    grid[static_cast<std::size_t>(i)] = tau_grid_min + step * double(i);
  }
  grid.back() = hi;
  return grid;
}

// ---------------------------------------------------------------------------
// Sweep

SweepRow &SweepRow::operator+=(const SweepRow &other) {
  trials += other.trials;
  for (std::size_t g = 0; g < detections.size(); ++g) {
    detections[g] += other.detections[g];
    false_alarms[g] += other.false_alarms[g];
  }
  return *this;
}

const SweepRow &SweepAggregate::at(Index K) const {
  for (const auto &row : rows) {
    if (row.K == K) return row;
  }
  throw DomainError("sweep aggregate has no row for K=" + std::to_string(K));
}

namespace {

// Per-thread state for one coalition size. Instead of recording the two
// events for each of the G thresholds, a trial stores how many grid points
// lie at or below its largest colluder (resp. innocent) statistic; the
// per-threshold counts are suffix sums of those histograms.
struct SweepWorker {
  const DesignMatrix<double> &F;
  const ExperimentConfig &cfg;
  const std::vector<double> &grid;
  EmbeddingParams params;
  std::vector<Index> perm;
  std::vector<std::uint64_t> detect_hist;
  std::vector<std::uint64_t> alarm_hist;
  std::uint64_t trials = 0;

  SweepWorker(const DesignMatrix<double> &F_, const ExperimentConfig &cfg_,
              const std::vector<double> &grid_)
      : F(F_), cfg(cfg_), grid(grid_), params(F_.dim(), cfg_.per_dim_energy),
        perm(static_cast<std::size_t>(F_.users())),
        detect_hist(grid_.size() + 1), alarm_hist(grid_.size() + 1) {
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = Index(i);
  }

  std::size_t bucket(double statistic) const {
    return std::size_t(std::upper_bound(grid.begin(), grid.end(), statistic) - grid.begin());
  }

  void run(std::size_t k_index, Index K, std::uint64_t first, std::uint64_t last) {
    const Index M = F.users();
    const std::vector<double> weights(static_cast<std::size_t>(K), 1.0 / double(K));
    std::vector<Index> swaps(static_cast<std::size_t>(K));
    const double gamma = params.gamma();
    Eigen::VectorXd stats(M);
    for (std::uint64_t t = first; t < last; ++t) {
      Generator gen(trial_seed(cfg.master_seed.value_or(0), k_index, t));
      // Partial Fisher-Yates: perm[0..K) becomes a uniform size-K subset.
      for (Index i = 0; i < K; ++i) {
        std::uniform_int_distribution<Index> pick(i, M - 1);
        swaps[std::size_t(i)] = pick(gen);
        std::swap(perm[std::size_t(i)], perm[std::size_t(swaps[std::size_t(i)])]);
      }
      const std::span<const Index> coalition(perm.data(), std::size_t(K));
      const Eigen::VectorXd z = forge_residual<double>(F, params, coalition, weights, cfg.sigma2, gen);
      stats.noalias() = F.matrix().transpose() * z;

      double colluder_max = -std::numeric_limits<double>::infinity();
      for (Index k : coalition) {
        colluder_max = std::max(colluder_max, stats(k));
        stats(k) = -std::numeric_limits<double>::infinity();
      }
      const double innocent_max = stats.maxCoeff();
      detect_hist[bucket(colluder_max / gamma)] += 1;
      alarm_hist[bucket(innocent_max / gamma)] += 1;
      ++trials;

      // Undo the swaps so every trial starts from the identity regardless of
      // which thread ran the previous one.
      for (Index i = K; i-- > 0;) {
        std::swap(perm[std::size_t(i)], perm[std::size_t(swaps[std::size_t(i)])]);
      }
    }
  }
};

}  // namespace

SweepAggregate run_sweep(const ExperimentConfig &cfg, const DesignMatrix<double> &F) {
  cfg.validate();
  const std::vector<double> grid = cfg.tau_grid(F.coherence());
  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : cfg.threads;
  threads = unsigned(std::min<std::uint64_t>(threads, cfg.trials));

  SweepAggregate agg;
  for (std::size_t k_index = 0; k_index < cfg.k_values.size(); ++k_index) {
    const Index K = cfg.k_values[k_index];
    if (K > F.users()) {
      throw DomainError("experiment: K=" + std::to_string(K) + " exceeds M=" +
                        std::to_string(F.users()));
    }
    std::vector<SweepWorker> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) workers.emplace_back(F, cfg, grid);
    auto range = [&](unsigned w) {
      return std::pair{cfg.trials * w / threads, cfg.trials * (w + 1) / threads};
    };
    if (threads == 1) {
      workers[0].run(k_index, K, 0, cfg.trials);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          const auto [first, last] = range(w);
          workers[w].run(k_index, K, first, last);
        });
      }
    }

    SweepRow row;
    row.K = K;
    row.tau = grid;
    row.detections.assign(grid.size(), 0);
    row.false_alarms.assign(grid.size(), 0);
    std::vector<std::uint64_t> detect_hist(grid.size() + 1, 0);
    std::vector<std::uint64_t> alarm_hist(grid.size() + 1, 0);
    for (const auto &w : workers) {
      row.trials += w.trials;
      for (std::size_t b = 0; b <= grid.size(); ++b) {
        detect_hist[b] += w.detect_hist[b];
        alarm_hist[b] += w.alarm_hist[b];
      }
    }
    // Event at grid point g <=> bucket > g.
    std::uint64_t detect_tail = 0;
    std::uint64_t alarm_tail = 0;
    for (std::size_t g = grid.size(); g-- > 0;) {
      detect_tail += detect_hist[g + 1];
      alarm_tail += alarm_hist[g + 1];
      row.detections[g] = detect_tail;
      row.false_alarms[g] = alarm_tail;
    }
    agg.rows.push_back(std::move(row));
  }
  return agg;
}

CurvePoint select_threshold(const SweepAggregate &agg, Index K, double p_fa_max) {
  const SweepRow &row = agg.at(K);
  CurvePoint pt;
  pt.K = K;
  pt.trials = row.trials;
  const double n = double(row.trials);
  for (std::size_t g = 0; g < row.tau.size(); ++g) {
    const double p_fa = double(row.false_alarms[g]) / n;
    if (p_fa <= p_fa_max) {
      pt.feasible = true;
      pt.tau = row.tau[g];
      pt.p_fa = p_fa;
      pt.p_d = double(row.detections[g]) / n;
      return pt;
    }
  }
  pt.tau = std::numeric_limits<double>::quiet_NaN();
  pt.p_fa = std::numeric_limits<double>::quiet_NaN();
  pt.p_d = std::numeric_limits<double>::quiet_NaN();
  return pt;
}

ExperimentResult run_experiment(const ExperimentConfig &cfg,
                                const std::vector<DesignMatrix<double>> &designs) {
  cfg.validate();
  ExperimentResult result;
  result.master_seed = cfg.master_seed.value_or(0);
  for (const auto &F : designs) {
    DesignCurve curve;
    curve.design = std::string(to_string(F.kind()));
    curve.N = F.dim();
    curve.M = F.users();
    curve.mu = F.coherence();
    const SweepAggregate agg = run_sweep(cfg, F);
    for (Index K : cfg.k_values) {
      curve.points.push_back(select_threshold(agg, K, cfg.p_fa_max));
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig &cfg) {
  cfg.validate();
  std::vector<DesignMatrix<double>> designs;
  for (const auto &src : cfg.designs) designs.push_back(src.build());
  return run_experiment(cfg, designs);
}

std::string results_csv(const ExperimentResult &result) {
  auto fmt6 = [](double x) {
    if (std::isnan(x)) return std::string("nan");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf);
  };
  std::string out = "design,N,M,K,trials,tau,p_fa,p_d,seed\n";
  for (const auto &curve : result.curves) {
    std::vector<CurvePoint> points = curve.points;
    std::stable_sort(points.begin(), points.end(),
                     [](const CurvePoint &a, const CurvePoint &b) { return a.K < b.K; });
    for (const auto &pt : points) {
      out += curve.design + ',' + std::to_string(curve.N) + ',' + std::to_string(curve.M) + ',' +
             std::to_string(pt.K) + ',' + std::to_string(pt.trials) + ',' + fmt6(pt.tau) + ',' +
             fmt6(pt.p_fa) + ',' + fmt6(pt.p_d) + ',' + std::to_string(result.master_seed) + '\n';
    }
  }
  return out;
}

}  // namespace etfp
