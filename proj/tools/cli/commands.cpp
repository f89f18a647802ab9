#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "cli/manifest.hpp"
#include "cli/plot.hpp"
#include "etfp/analysis.hpp"
#include "etfp/channel.hpp"
#include "etfp/design_io.hpp"
#include "etfp/designs.hpp"
#include "etfp/detection.hpp"
#include "etfp/errors.hpp"
#include "etfp/experiment.hpp"

namespace etfp::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string fmt(double x, int digits = 12) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (std::uint64_t(rd()) << 32) ^ std::uint64_t(rd());
}

std::string serialize_design(const DesignMatrix<double> &F) {
  std::ostringstream os;
  write_design(os, F);
  return os.str();
}

std::string serialize_vector(const Eigen::VectorXd &x) {
  std::ostringstream os;
  write_vector(os, x);
  return os.str();
}

// 1-based comma/space separated list.
std::vector<Index> parse_user_list(const std::string &text, const std::string &what) {
  std::vector<Index> users;
  std::string item;
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  while (in >> item) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != item.size()) throw ParseError(what + ": '" + item + "' is not an integer");
    if (v < 1) throw DomainError(what + ": user indices start at 1");
    users.push_back(Index(v - 1));
  }
  return users;
}

std::vector<double> parse_double_list(const std::string &text, const std::string &what) {
  std::vector<double> values;
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  std::string item;
  while (in >> item) {
    char *end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size()) throw ParseError(what + ": '" + item + "' is not a number");
    values.push_back(v);
  }
  return values;
}

// Attack spec file: `key = value` lines with keys coalition (1-based users),
// weights (list or `uniform`, the default), noise_sigma2 and seed.
struct AttackFile {
  std::vector<Index> coalition;
  std::optional<std::vector<double>> weights;
  double noise_sigma2 = 0;
  std::optional<std::uint64_t> seed;
};

AttackFile load_attack_file(const fs::path &path) {
  std::istringstream in(read_file(path));
  AttackFile a;
  std::string line;
  bool have_coalition = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) {
      throw ParseError("attack spec line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "coalition") {
      a.coalition = parse_user_list(value, "coalition");
      have_coalition = true;
    } else if (key == "weights") {
      if (value != "uniform") a.weights = parse_double_list(value, "weights");
    } else if (key == "noise_sigma2") {
      const auto v = parse_double_list(value, "noise_sigma2");
      if (v.size() != 1) throw ParseError("noise_sigma2 takes one number");
      a.noise_sigma2 = v[0];
    } else if (key == "seed") {
      try {
        std::size_t used = 0;
        a.seed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("seed");
      } catch (const std::exception &) {
        throw ParseError("seed: '" + value + "' is not an unsigned integer");
      }
    } else {
      throw ParseError("attack spec line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!have_coalition) throw ParseError("attack spec: missing 'coalition'");
  return a;
}

HostSignal<double> load_host(const std::string &path, Index N) {
  if (path.empty()) return HostSignal<double>::zero(N);
  Eigen::VectorXd s = load_vector(path);
  if (s.size() != N) {
    throw DimensionError("host has " + std::to_string(s.size()) + " samples, design has N=" +
                         std::to_string(N));
  }
  return HostSignal<double>(std::move(s));
}

fs::path resolve_against(const fs::path &base_dir, const fs::path &p) {
  return p.is_relative() ? base_dir / p : p;
}

// ---------------------------------------------------------------------------

struct DesignArgs {
  std::string kind;
  Index steiner_pairs = 0;
  std::string incidence;
  Index n = 0;
  std::string out;
};

int cmd_design(const DesignArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  const DesignKind kind = parse_design_kind(a.kind);
  DesignSource src;
  RunManifest m = make_manifest("design");
  m.arguments = argv;
  switch (kind) {
    case DesignKind::etf:
      if ((a.steiner_pairs > 0) == !a.incidence.empty()) {
        throw DomainError("design: etf needs exactly one of --steiner-pairs or --incidence");
      }
      if (a.steiner_pairs > 0) {
        src.type = DesignSource::Type::etf_pairs;
        src.size = a.steiner_pairs;
      } else {
        src.type = DesignSource::Type::steiner_file;
        src.path = a.incidence;
        m.add_input(a.incidence);
      }
      break;
    case DesignKind::simplex:
    case DesignKind::orthogonal:
      if (a.n < 1) throw DomainError("design: --n must be at least 1");
      src.type = kind == DesignKind::simplex ? DesignSource::Type::simplex
                                             : DesignSource::Type::orthogonal;
      src.size = a.n;
      break;
    case DesignKind::imported:
      throw DomainError("design: imported designs are read with --design, not constructed");
  }
  const auto F = src.build();
  write_file_atomic(a.out, serialize_design(F));
  m.config = {{"source", src.to_string()}, {"out", a.out}};
  write_manifest(a.out, m);

  out << "N = " << F.dim() << '\n' << "M = " << F.users() << '\n';
  out << "mu = " << fmt(F.coherence()) << '\n';
  if (F.users() > F.dim()) {
    out << "welch_bound = " << fmt(welch_bound(F.dim(), F.users())) << '\n';
  } else {
    out << "welch_bound = undefined (M<=N)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string design;
  Index K = 0;
  double df = 1;
  double sigma2 = 1;
  Index user = 1;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  const auto F = load_design(a.design);
  const Index N = F.dim();
  const Index M = F.users();
  const Index K = a.K;
  if (K < 1) throw DomainError("analyze: --k must be at least 1");
  if (a.user < 1 || a.user > M) throw DomainError("analyze: --user out of range 1.." + std::to_string(M));
  const double mu = F.coherence();

  std::vector<std::pair<std::string, std::string>> report;
  auto put = [&](std::string key, std::string value) {
    report.emplace_back(std::move(key), std::move(value));
  };
  auto put_bound = [&](const std::string &key, const DistanceBound &b) {
    put(key, fmt(b.value));
    put(key + "_vacuous", b.vacuous ? "true" : "false");
  };
  const std::string skipped = "skipped (capacity)";
  const std::string k_undefined = "undefined (K<2)";

  put("design_kind", std::string(to_string(F.kind())));
  put("N", std::to_string(N));
  put("M", std::to_string(M));
  put("K", std::to_string(K));
  put("user", std::to_string(a.user));
  put("per_dim_energy", fmt(a.df));
  put("sigma2", fmt(a.sigma2));
  put("coherence", fmt(mu));
  put("welch_bound", M > N ? fmt(welch_bound(N, M)) : "undefined (M<=N)");
  put("gershgorin_delta_2K", fmt(gershgorin_delta_bound(mu, K)));

  auto bruteforce_delta = [&](Index cols) -> std::optional<double> {
    try {
      return rip_delta_bruteforce(F, cols);
    } catch (const CapacityError &) {
      return std::nullopt;
    }
  };
  if (M >= 2) {
    const auto d2 = bruteforce_delta(2);
    put("delta_bruteforce_2", d2 ? fmt(*d2) : skipped);
  }
  std::optional<double> d2k;
  if (2 * K <= M) {
    d2k = bruteforce_delta(2 * K);
    put("delta_bruteforce_2K", d2k ? fmt(*d2k) : skipped);
  } else {
    put("delta_bruteforce_2K", "undefined (2K>M)");
  }

  if (K < 2) {
    put("dist_bound_rip", k_undefined);
    put("dist_bound_coherence", k_undefined);
    put("dist_bruteforce", k_undefined);
  } else {
    if (d2k) {
      put_bound("dist_bound_rip", distance_lower_bound_rip(*d2k, K));
    } else {
      put("dist_bound_rip", 2 * K <= M ? skipped : "undefined (2K>M)");
    }
    put_bound("dist_bound_coherence", distance_lower_bound_coherence(mu, K));
    if (K <= M) {
      try {
        put("dist_bruteforce", fmt(distance_exact_bruteforce(GuiltySetSpec<double>{F, a.user - 1, K})));
      } catch (const CapacityError &) {
        put("dist_bruteforce", skipped);
      }
    } else {
      put("dist_bruteforce", "undefined (K>M)");
    }
    if (F.kind() == DesignKind::simplex && M >= 3 && K <= M - 1) {
      put("simplex_distance_exact", fmt(simplex_distance_exact(M, K)));
    }
  }

  const BoundInputs b{N, M, K, a.df, a.sigma2, mu};
  b.validate();
  const double tau_star = optimal_threshold(mu, K);
  put("tau_star", fmt(tau_star));
  put("type1_bound_tau_star", fmt(type1_bound(b, tau_star)));
  put("type2_bound_tau_star", fmt(type2_bound(b, tau_star, 1.0 / double(K))));
  const MinmaxBounds mm = minmax_bounds(b);
  put("minmax_lower", mm.lower ? fmt(*mm.lower) : k_undefined);
  put("minmax_upper", fmt(mm.upper));
  put("d_low", mm.d_low ? fmt(*mm.d_low) : k_undefined);
  put("d_up", fmt(mm.d_up));
  put("d_orthogonal", fmt(mm.d_orthogonal));
  put("d_simplex", fmt(mm.d_simplex));
  put("error_exponent", fmt(error_exponent(K)));
  put("ergun_scale", N >= 2 ? fmt(ergun_scale(double(N))) : "undefined (N<2)");
  put("wnr_db", fmt(wnr(a.df, a.sigma2)));

  std::string text;
  for (const auto &[k, v] : report) text += k + " = " + v + '\n';
  out << text;
  if (!a.out.empty()) {
    write_file_atomic(a.out, text);
    RunManifest m = make_manifest("analyze");
    m.arguments = argv;
    m.add_input(a.design);
    m.config = {{"design", a.design}, {"k", K},           {"per_dim_energy", a.df},
                {"sigma2", a.sigma2}, {"user", a.user}, {"out", a.out}};
    write_manifest(a.out, m);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct AttackArgs {
  std::string design;
  std::string spec;
  std::string host;
  double df = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_attack(const AttackArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  const auto F = load_design(a.design);
  const AttackFile file = load_attack_file(a.spec);
  const std::uint64_t seed = a.seed ? *a.seed : file.seed ? *file.seed : entropy_seed();

  AttackSpec spec;
  if (file.weights) {
    if (file.weights->size() != file.coalition.size()) {
      throw DomainError("attack: " + std::to_string(file.weights->size()) + " weights for " +
                        std::to_string(file.coalition.size()) + " colluders");
    }
    std::vector<std::size_t> order(file.coalition.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return file.coalition[x] < file.coalition[y]; });
    for (std::size_t i : order) {
      spec.coalition.push_back(file.coalition[i]);
      spec.weights.push_back((*file.weights)[i]);
    }
    spec.noise_sigma2 = file.noise_sigma2;
    spec.seed = seed;
  } else {
    spec = AttackSpec::uniform(file.coalition, file.noise_sigma2, seed);
  }

  const auto s = load_host(a.host, F.dim());
  const EmbeddingParams p(F.dim(), a.df);
  const Forgery<double> y = forge(s, F, p, spec);
  write_file_atomic(a.out, serialize_vector(y.y));

  RunManifest m = make_manifest("attack");
  m.arguments = argv;
  m.master_seed = seed;
  m.add_input(a.design);
  m.add_input(a.spec);
  if (!a.host.empty()) m.add_input(a.host);
  json coalition = json::array();
  for (Index k : spec.coalition) coalition.push_back(k + 1);
  m.config = {{"design", a.design},
              {"spec", a.spec},
              {"host", a.host.empty() ? json() : json(a.host)},
              {"per_dim_energy", a.df},
              {"coalition", coalition},
              {"weights", spec.weights},
              {"noise_sigma2", spec.noise_sigma2},
              {"seed", seed},
              {"out", a.out}};
  write_manifest(a.out, m);

  out << "N = " << F.dim() << '\n'
      << "K = " << spec.coalition.size() << '\n'
      << "seed = " << seed << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
  std::string design;
  std::string forgery;
  std::string host;
  double tau = 0;
  double df = 1;
  std::string truth;
  std::string out;
};

int cmd_detect(const DetectArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  const auto F = load_design(a.design);
  Forgery<double> y;
  y.y = load_vector(a.forgery);
  const auto s = load_host(a.host, F.dim());
  const EmbeddingParams p(F.dim(), a.df);
  const auto z = extract(y, s);
  const auto T = test_statistics(z, F, p);
  const auto outcome = focused_detect(T, a.tau);

  out << "tau = " << fmt(a.tau) << '\n' << "accused_count = " << outcome.accused.size() << '\n';
  out << "accused =";
  for (Index m : outcome.accused) out << ' ' << m + 1;
  out << '\n';
  if (!a.truth.empty()) {
    auto truth = parse_user_list(a.truth, "truth");
    std::sort(truth.begin(), truth.end());
    const auto ev = trial_events(outcome, truth);
    out << "detected = " << (ev.detected ? "true" : "false") << '\n'
        << "false_alarm = " << (ev.false_alarm ? "true" : "false") << '\n';
  }

  if (!a.out.empty()) {
    std::string csv = "user,statistic,accused\n";
    for (Index m = 0; m < T.values.size(); ++m) {
      csv += std::to_string(m + 1) + ',' + fmt(T.values(m), 17) + ',' +
             (double(T.values(m)) >= a.tau ? "1" : "0") + '\n';
    }
    write_file_atomic(a.out, csv);
    RunManifest m = make_manifest("detect");
    m.arguments = argv;
    m.add_input(a.design);
    m.add_input(a.forgery);
    if (!a.host.empty()) m.add_input(a.host);
    m.config = {{"design", a.design},
                {"forgery", a.forgery},
                {"host", a.host.empty() ? json() : json(a.host)},
                {"tau", a.tau},
                {"per_dim_energy", a.df},
                {"out", a.out}};
    write_manifest(a.out, m);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::string svg;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> trials;
};

int cmd_experiment(const ExperimentArgs &a, const std::vector<std::string> &argv,
                   std::ostream &out) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  const fs::path base = fs::path(a.config).parent_path();
  RunManifest m = make_manifest("experiment");
  m.arguments = argv;
  m.add_input(a.config);
  for (auto &d : cfg.designs) {
    if (d.type == DesignSource::Type::steiner_file || d.type == DesignSource::Type::design_file) {
      d.path = resolve_against(base, d.path);
      m.add_input(d.path);
    }
  }
  if (a.seed) cfg.master_seed = a.seed;
  if (!cfg.master_seed) cfg.master_seed = entropy_seed();
  if (a.threads) cfg.threads = *a.threads;
  if (a.trials) cfg.trials = *a.trials;

  const ExperimentResult result = run_experiment(cfg);
  const std::string csv = results_csv(result);
  write_file_atomic(a.out, csv);
  m.master_seed = cfg.master_seed;
  m.config = {{"config_text", to_config_text(cfg)},
              {"out", a.out},
              {"svg", a.svg.empty() ? json() : json(a.svg)}};
  write_manifest(a.out, m);
  if (!a.svg.empty()) {
    write_file_atomic(a.svg, render_pd_plot(parse_results_csv(csv)));
    write_manifest(a.svg, m);
  }

  std::size_t rows = 0;
  for (const auto &c : result.curves) rows += c.points.size();
  out << "rows = " << rows << '\n' << "master_seed = " << *cfg.master_seed << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct PlotArgs {
  std::string csv;
  std::string out;
  std::string title;
};

int cmd_plot(const PlotArgs &a, const std::vector<std::string> &argv, std::ostream &out) {
  const auto rows = parse_results_csv(read_file(a.csv));
  write_file_atomic(a.out, render_pd_plot(rows, a.title));
  RunManifest m = make_manifest("plot");
  m.arguments = argv;
  m.add_input(a.csv);
  m.config = {{"csv", a.csv}, {"out", a.out}, {"title", a.title}};
  write_manifest(a.out, m);
  out << "rows = " << rows.size() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Fingerprint design, collusion analysis and detection experiments", "etfp"};
  app.set_version_flag("--version", std::string(ETFP_VERSION));
  app.require_subcommand(1);

  DesignArgs design;
  auto *c_design = app.add_subcommand("design", "Construct a design matrix file");
  c_design->add_option("--kind", design.kind, "etf, simplex or orthogonal")->required();
  c_design->add_option("--steiner-pairs", design.steiner_pairs,
                       "etf from the (2,2,v) Steiner system on v points (v a power of 2)");
  c_design->add_option("--incidence", design.incidence, "etf from a Steiner incidence file");
  c_design->add_option("--n", design.n, "dimension N for simplex or orthogonal");
  c_design->add_option("--out", design.out, "output design file")->required();

  AnalyzeArgs analyze;
  auto *c_analyze = app.add_subcommand("analyze", "Report bounds for a design and coalition size");
  c_analyze->add_option("--design", analyze.design, "design file")->required();
  c_analyze->add_option("--k", analyze.K, "coalition size K")->required();
  c_analyze->add_option("--df", analyze.df, "per-dimension fingerprint energy D_f")
      ->capture_default_str();
  c_analyze->add_option("--sigma2", analyze.sigma2, "per-dimension noise power")
      ->capture_default_str();
  c_analyze->add_option("--user", analyze.user, "user (1-based) for the brute-force distance")
      ->capture_default_str();
  c_analyze->add_option("--out", analyze.out, "also write the report here");

  AttackArgs attack;
  auto *c_attack = app.add_subcommand("attack", "Forge one copy from an attack spec file");
  c_attack->add_option("--design", attack.design, "design file")->required();
  c_attack->add_option("--spec", attack.spec,
                       "attack spec: coalition, weights, noise_sigma2, seed")
      ->required();
  c_attack->add_option("--host", attack.host, "host vector file (default zero)");
  c_attack->add_option("--df", attack.df, "per-dimension fingerprint energy D_f")
      ->capture_default_str();
  c_attack->add_option("--seed", attack.seed, "noise seed (overrides the spec file)");
  c_attack->add_option("--out", attack.out, "output forgery vector file")->required();

  DetectArgs detect;
  auto *c_detect = app.add_subcommand("detect", "Test statistics and accusations for a forgery");
  c_detect->add_option("--design", detect.design, "design file")->required();
  c_detect->add_option("--forgery", detect.forgery, "forgery vector file")->required();
  c_detect->add_option("--host", detect.host, "host vector file (default zero)");
  c_detect->add_option("--tau", detect.tau, "threshold")->required();
  c_detect->add_option("--df", detect.df, "per-dimension fingerprint energy D_f")
      ->capture_default_str();
  c_detect->add_option("--truth", detect.truth, "true coalition (1-based) to score the outcome");
  c_detect->add_option("--out", detect.out, "per-user statistics CSV");

  ExperimentArgs experiment;
  auto *c_experiment = app.add_subcommand("experiment", "Monte Carlo P_d versus K");
  c_experiment->add_option("--config", experiment.config, "experiment config file")->required();
  c_experiment->add_option("--out", experiment.out, "results CSV")->required();
  c_experiment->add_option("--svg", experiment.svg, "also render the curves to SVG");
  c_experiment->add_option("--seed", experiment.seed, "master seed (overrides the config)");
  c_experiment->add_option("--threads", experiment.threads, "worker threads, 0 = all cores");
  c_experiment->add_option("--trials", experiment.trials, "trials per K (overrides the config)");

  PlotArgs plot;
  auto *c_plot = app.add_subcommand("plot", "Render a results CSV as SVG");
  c_plot->add_option("--csv", plot.csv, "results CSV")->required();
  c_plot->add_option("--out", plot.out, "output SVG")->required();
  c_plot->add_option("--title", plot.title, "plot title");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    err << "etfp: error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (c_design->parsed()) return cmd_design(design, args, out);
    if (c_analyze->parsed()) return cmd_analyze(analyze, args, out);
    if (c_attack->parsed()) return cmd_attack(attack, args, out);
    if (c_detect->parsed()) return cmd_detect(detect, args, out);
    if (c_experiment->parsed()) return cmd_experiment(experiment, args, out);
    if (c_plot->parsed()) return cmd_plot(plot, args, out);
  } catch (const std::exception &e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "etfp: error: " << msg << '\n';
    return 1;
  }
  return 2;
}

}  // namespace etfp::cli
