#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "etfp/experiment.hpp"

namespace etfp {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string &value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <typename T>
T parse_integer(const std::string &key, const std::string &text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("config key '" + key + "': '" + text + "' is not an integer");
  }
  return value;
}

double parse_double(const std::string &key, const std::string &text) {
  char *end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ParseError("config key '" + key + "': '" + text + "' is not a number");
  }
  return value;
}

std::vector<Index> parse_k_values(const std::string &text) {
  std::vector<Index> ks;
  for (const auto &item : split_list(text)) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      ks.push_back(parse_integer<Index>("k_values", item));
      continue;
    }
    const Index lo = parse_integer<Index>("k_values", trim(item.substr(0, dash)));
    const Index hi = parse_integer<Index>("k_values", trim(item.substr(dash + 1)));
    if (hi < lo) throw ParseError("config key 'k_values': empty range '" + item + "'");
    for (Index k = lo; k <= hi; ++k) ks.push_back(k);
  }
  return ks;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream &in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ParseError("config key '" + key + "' given twice");
    }
    if (key == "designs") {
      for (const auto &item : split_list(value)) cfg.designs.push_back(DesignSource::parse(item));
    } else if (key == "k_values") {
      cfg.k_values = parse_k_values(value);
    } else if (key == "trials") {
      cfg.trials = parse_integer<std::uint64_t>(key, value);
    } else if (key == "per_dim_energy") {
      cfg.per_dim_energy = parse_double(key, value);
    } else if (key == "sigma2") {
      cfg.sigma2 = parse_double(key, value);
    } else if (key == "p_fa_max") {
      cfg.p_fa_max = parse_double(key, value);
    } else if (key == "tau_grid_count") {
      cfg.tau_grid_count = parse_integer<Index>(key, value);
    } else if (key == "tau_grid_min") {
      cfg.tau_grid_min = parse_double(key, value);
    } else if (key == "tau_grid_max") {
      if (value != "auto") cfg.tau_grid_max = parse_double(key, value);
    } else if (key == "tau_grid_values") {
      for (const auto &item : split_list(value)) {
        cfg.tau_grid_values.push_back(parse_double(key, item));
      }
    } else if (key == "master_seed") {
      cfg.master_seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "threads") {
      cfg.threads = parse_integer<unsigned>(key, value);
    } else {
      throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'");
  return parse_experiment_config(in);
}

std::string to_config_text(const ExperimentConfig &cfg) {
  std::string out;
  auto join = [](const auto &items, auto &&fmt) {
    std::string s;
    for (const auto &item : items) {
      if (!s.empty()) s += ',';
      s += fmt(item);
    }
    return s;
  };
  out += "designs = " + join(cfg.designs, [](const DesignSource &d) { return d.to_string(); }) + '\n';
  out += "k_values = " + join(cfg.k_values, [](Index k) { return std::to_string(k); }) + '\n';
  out += "trials = " + std::to_string(cfg.trials) + '\n';
  out += "per_dim_energy = " + format_double(cfg.per_dim_energy) + '\n';
  out += "sigma2 = " + format_double(cfg.sigma2) + '\n';
  out += "p_fa_max = " + format_double(cfg.p_fa_max) + '\n';
  if (cfg.tau_grid_values.empty()) {
    out += "tau_grid_count = " + std::to_string(cfg.tau_grid_count) + '\n';
    out += "tau_grid_min = " + format_double(cfg.tau_grid_min) + '\n';
    out += "tau_grid_max = " + (cfg.tau_grid_max ? format_double(*cfg.tau_grid_max) : "auto") + '\n';
  } else {
    out += "tau_grid_values = " + join(cfg.tau_grid_values, format_double) + '\n';
  }
  if (cfg.master_seed) out += "master_seed = " + std::to_string(*cfg.master_seed) + '\n';
  out += "threads = " + std::to_string(cfg.threads) + '\n';
  return out;
}

}  // namespace etfp
