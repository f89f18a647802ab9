#ifndef ETFP_CLI_PLOT_HPP_
#define ETFP_CLI_PLOT_HPP_

#include <string>
#include <vector>

namespace etfp::cli {

struct CsvRow {
  std::string design;
  long long N = 0;
  long long M = 0;
  long long K = 0;
  unsigned long long trials = 0;
  double tau = 0;
  double p_fa = 0;
  double p_d = 0;  // NaN when the threshold was infeasible
  unsigned long long seed = 0;
};

// Parses the experiment results CSV; throws etfp::ParseError.
std::vector<CsvRow> parse_results_csv(const std::string &text);

// Static SVG of P_d against K with one series per (design, N, M), in order of
// first appearance. Infeasible points break the line.
std::string render_pd_plot(const std::vector<CsvRow> &rows, const std::string &title = "");

}  // namespace etfp::cli

#endif  // ETFP_CLI_PLOT_HPP_
