#include "etfp/design_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace etfp {
namespace {

std::vector<std::string> split_ws(const std::string &line) {
  std::istringstream ss(line);
  std::vector<std::string> tokens;
  std::string token;
  while (ss >> token) tokens.push_back(token);
  return tokens;
}

bool next_content_line(std::istream &in, std::string &line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return true;
  }
  return false;
}

// Parses "<tag> key=value key=value ..." into a map.
std::map<std::string, std::string> parse_header(std::istream &in, const std::string &tag) {
  std::string line;
  if (!next_content_line(in, line)) {
    throw ParseError("empty input: expected '" + tag + "' header");
  }
  const auto tokens = split_ws(line);
  if (tokens.empty() || tokens.front() != tag) {
    throw ParseError("expected '" + tag + "' header, got '" + line + "'");
  }
  std::map<std::string, std::string> fields;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("malformed header field '" + tokens[i] + "'");
    }
    fields[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
  }
  return fields;
}

Index header_index(const std::map<std::string, std::string> &fields, const std::string &key) {
  const auto it = fields.find(key);
  if (it == fields.end()) {
    throw ParseError("header is missing '" + key + "='");
  }
  Index value = 0;
  const auto &text = it->second;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw ParseError("header field " + key + "='" + text + "' is not a nonnegative integer");
  }
  return value;
}

double parse_real(const std::string &token) {
  char *end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || token.empty()) {
    throw ParseError("'" + token + "' is not a real number");
  }
  return value;
}

std::vector<std::string> read_row(std::istream &in, Index expected, const std::string &what) {
  std::string line;
  if (!next_content_line(in, line)) {
    throw ParseError("unexpected end of input while reading " + what);
  }
  auto tokens = split_ws(line);
  if (static_cast<Index>(tokens.size()) != expected) {
    throw ParseError(what + ": expected " + std::to_string(expected) + " values, got " +
                     std::to_string(tokens.size()));
  }
  return tokens;
}

void expect_end(std::istream &in, const std::string &what) {
  std::string line;
  if (next_content_line(in, line)) {
    throw ParseError(what + ": trailing content '" + line + "'");
  }
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'");
  }
  return in;
}

}  // namespace

SteinerIncidence read_steiner_incidence(std::istream &in) {
  const auto fields = parse_header(in, "steiner");
  const Index v = header_index(fields, "v");
  const Index k = header_index(fields, "k");
  const Index b = header_index(fields, "b");
  if (v < 2 || b < 1) {
    throw ParseError("steiner header: need v >= 2 and b >= 1");
  }
  SteinerIncidence::Entries entries(b, v);
  for (Index i = 0; i < b; ++i) {
    const auto tokens = read_row(in, v, "incidence row " + std::to_string(i + 1));
    for (Index j = 0; j < v; ++j) {
      const auto &t = tokens[static_cast<std::size_t>(j)];
      if (t != "0" && t != "1") {
        throw ParseError("incidence row " + std::to_string(i + 1) + ": '" + t +
                         "' is not a 0/1 digit");
      }
      entries(i, j) = t == "1" ? 1 : 0;
    }
  }
  expect_end(in, "incidence");
  SteinerIncidence A(std::move(entries));
  if (A.block_size() != k) {
    throw ValidationError("steiner header says k=" + std::to_string(k) + " but blocks have " +
                          std::to_string(A.block_size()) + " points");
  }
  return A;
}

SteinerIncidence load_steiner_incidence(const std::filesystem::path &path) {
  auto in = open_input(path);
  return read_steiner_incidence(in);
}

void write_steiner_incidence(std::ostream &out, const SteinerIncidence &A) {
  out << "steiner v=" << A.points() << " k=" << A.block_size() << " b=" << A.blocks() << '\n';
  for (Index i = 0; i < A.blocks(); ++i) {
    for (Index j = 0; j < A.points(); ++j) {
      out << (j ? " " : "") << A(i, j);
    }
    out << '\n';
  }
}

DesignMatrix<double> read_design(std::istream &in) {
  const auto fields = parse_header(in, "design");
  const auto kind_it = fields.find("kind");
  if (kind_it == fields.end()) {
    throw ParseError("design header is missing 'kind='");
  }
  const DesignKind kind = parse_design_kind(kind_it->second);
  const Index n = header_index(fields, "N");
  const Index m = header_index(fields, "M");
  if (n < 1 || m < 1) {
    throw ParseError("design header: N and M must be positive");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < n; ++i) {
    const auto tokens = read_row(in, m, "design row " + std::to_string(i + 1));
    for (Index j = 0; j < m; ++j) {
      const double x = parse_real(tokens[static_cast<std::size_t>(j)]);
      if (x != 0.0) triplets.emplace_back(i, j, x);
    }
  }
  expect_end(in, "design");
  DesignMatrix<double>::Sparse F(n, m);
  F.setFromTriplets(triplets.begin(), triplets.end());
  return DesignMatrix<double>(kind, std::move(F));
}

DesignMatrix<double> load_design(const std::filesystem::path &path) {
  auto in = open_input(path);
  return read_design(in);
}

void write_design(std::ostream &out, const DesignMatrix<double> &F) {
  out << "design kind=" << to_string(F.kind()) << " N=" << F.dim() << " M=" << F.users() << '\n';
  // Densify 64 rows at a time.
  const Index band = 64;
  for (Index i0 = 0; i0 < F.dim(); i0 += band) {
    const Index h = std::min(band, F.dim() - i0);
    const Eigen::MatrixXd rows = Eigen::MatrixXd(F.matrix().middleRows(i0, h));
    for (Index i = 0; i < h; ++i) {
      std::string line;
      for (Index j = 0; j < F.users(); ++j) {
        if (j) line += ' ';
        line += format_real(rows(i, j));
      }
      out << line << '\n';
    }
  }
}

Eigen::VectorXd read_vector(std::istream &in) {
  const auto fields = parse_header(in, "vector");
  const Index n = header_index(fields, "N");
  if (n < 1) {
    throw ParseError("vector header: N must be positive");
  }
  const auto tokens = read_row(in, n, "vector values");
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) x(i) = parse_real(tokens[static_cast<std::size_t>(i)]);
  expect_end(in, "vector");
  return x;
}

Eigen::VectorXd load_vector(const std::filesystem::path &path) {
  auto in = open_input(path);
  return read_vector(in);
}

void write_vector(std::ostream &out, const Eigen::VectorXd &x) {
  out << "vector N=" << x.size() << '\n';
  std::string line;
  for (Index i = 0; i < x.size(); ++i) {
    if (i) line += ' ';
    line += format_real(x(i));
  }
  out << line << '\n';
}

void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write '" + tmp.string() + "'");
    }
    out << content;
    out.flush();
    if (!out) {
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace etfp
