#include "cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "etfp/errors.hpp"

namespace etfp::cli {
namespace {

constexpr const char *kHeader = "design,N,M,K,trials,tau,p_fa,p_d,seed";
constexpr const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

std::vector<CsvRow> parse_results_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw ParseError(std::string("results CSV must start with '") + kHeader + "'");
  }
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 9) {
      throw ParseError("results CSV line " + std::to_string(lineno) + ": expected 9 fields");
    }
    try {
      CsvRow r;
      r.design = f[0];
      r.N = std::stoll(f[1]);
      r.M = std::stoll(f[2]);
      r.K = std::stoll(f[3]);
      r.trials = std::stoull(f[4]);
      r.tau = std::strtod(f[5].c_str(), nullptr);
      r.p_fa = std::strtod(f[6].c_str(), nullptr);
      r.p_d = std::strtod(f[7].c_str(), nullptr);
      r.seed = std::stoull(f[8]);
      rows.push_back(std::move(r));
    } catch (const std::exception &) {
      throw ParseError("results CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

std::string render_pd_plot(const std::vector<CsvRow> &rows, const std::string &title) {
  struct Series {
    std::string label;
    std::vector<std::pair<long long, double>> points;
  };
  std::vector<Series> series;
  std::map<std::string, std::size_t> index;
  long long k_min = 1;
  long long k_max = 1;
  bool any = false;
  for (const auto &r : rows) {
    const std::string key =
        r.design + " (N=" + std::to_string(r.N) + ", M=" + std::to_string(r.M) + ")";
    auto [it, inserted] = index.emplace(key, series.size());
    if (inserted) series.push_back({key, {}});
    series[it->second].points.emplace_back(r.K, r.p_d);
    k_min = any ? std::min(k_min, r.K) : r.K;
    k_max = any ? std::max(k_max, r.K) : r.K;
    any = true;
  }
  if (k_max == k_min) ++k_max;

  const double width = 640, height = 420;
  const double left = 70, right = 200, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double k) { return left + pw * (k - double(k_min)) / double(k_max - k_min); };
  auto sy = [&](double p) { return top + ph * (1.0 - p); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  }
  // Axes, ticks and labels.
  svg << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
      << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw)
      << "\" y2=\"" << num(top + ph) << "\"/>\n"
      << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
      << "\" y2=\"" << num(top + ph) << "\"/>\n"
      << "</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const long long span = k_max - k_min;
  const long long step = std::max(1LL, (span + 9) / 10);
  for (long long k = k_min; k <= k_max; k += step) {
    svg << "<line x1=\"" << num(sx(double(k))) << "\" y1=\"" << num(top + ph) << "\" x2=\""
        << num(sx(double(k))) << "\" y2=\"" << num(top + ph + 5) << "\" stroke=\"black\"/>"
        << "<text x=\"" << num(sx(double(k))) << "\" y=\"" << num(top + ph + 18)
        << "\" text-anchor=\"middle\">" << k << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double p = i / 5.0;
    svg << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(sy(p)) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(sy(p)) << "\" stroke=\"black\"/>"
        << "<text x=\"" << num(left - 8) << "\" y=\"" << num(sy(p) + 4)
        << "\" text-anchor=\"end\">" << num(p) << "</text>\n";
  }
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 15)
      << "\" text-anchor=\"middle\" font-size=\"13\">number of colluders K</text>\n"
      << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << num(top + ph / 2) << ")\">P_d</text>\n"
      << "</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char *color = kPalette[s % std::size(kPalette)];
    auto pts = series[s].points;
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto &a, const auto &b) { return a.first < b.first; });
    svg << "<g class=\"series\" stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    std::string run;
    auto flush = [&] {
      if (!run.empty()) {
        svg << "<polyline fill=\"none\" stroke-width=\"2\" points=\"" << run << "\"/>\n";
        run.clear();
      }
    };
    for (const auto &[k, p] : pts) {
      if (std::isnan(p)) {
        flush();
        continue;
      }
      if (!run.empty()) run += ' ';
      run += num(sx(double(k))) + ',' + num(sy(p));
    }
    flush();
    for (const auto &[k, p] : pts) {
      if (std::isnan(p)) continue;
      svg << "<circle cx=\"" << num(sx(double(k))) << "\" cy=\"" << num(sy(p)) << "\" r=\"3\"/>\n";
    }
    svg << "</g>\n";
    const double ly = top + 10 + 20 * double(s);
    svg << "<line x1=\"" << num(left + pw + 15) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(left + pw + 40) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << num(left + pw + 45) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(series[s].label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace etfp::cli
