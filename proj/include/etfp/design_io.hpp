#ifndef ETFP_DESIGN_IO_HPP_
#define ETFP_DESIGN_IO_HPP_

// Text formats:
//
//   incidence:  "steiner v=<v> k=<k> b=<b>" then b lines of v 0/1 digits
//   design:     "design kind=<kind> N=<N> M=<M>" then N lines of M values
//   vector:     "vector N=<N>" then one line of N values
//
// Values are space separated; reals are written with 17 significant digits
// so that a write/read cycle reproduces every double exactly.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "etfp/designs.hpp"

namespace etfp {

SteinerIncidence read_steiner_incidence(std::istream &in);
SteinerIncidence load_steiner_incidence(const std::filesystem::path &path);
void write_steiner_incidence(std::ostream &out, const SteinerIncidence &A);

DesignMatrix<double> read_design(std::istream &in);
DesignMatrix<double> load_design(const std::filesystem::path &path);
void write_design(std::ostream &out, const DesignMatrix<double> &F);

Eigen::VectorXd read_vector(std::istream &in);
Eigen::VectorXd load_vector(const std::filesystem::path &path);
void write_vector(std::ostream &out, const Eigen::VectorXd &x);

// Writes `content` to a sibling temporary file and renames it over `path`,
// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path &path, const std::string &content);

std::string read_file(const std::filesystem::path &path);

}  // namespace etfp

#endif  // ETFP_DESIGN_IO_HPP_
