#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>

#include "srcfuse/dictionary.hpp"

namespace srcfuse {

enum class ProjectionMethod { gaussian, svd_random_columns, svd_top_singular };

const char* to_string(ProjectionMethod m);

struct ProjectionMatrix {
  Eigen::MatrixXd r;  // d x n
  ProjectionMethod method = ProjectionMethod::gaussian;
  int d = 0;
  int n = 0;
  std::uint64_t seed = 0;  // unused for svd_top_singular
};

// i.i.d. standard normal entries from a seeded generator, each row then
// scaled to unit l2 norm.
ProjectionMatrix gaussian_projection(int d, int n, std::uint64_t seed);

struct SvdSelection {
  enum class Kind { random_columns, top_singular };
  Kind kind = Kind::top_singular;
  std::uint64_t seed = 0;  // used by random_columns only

  static SvdSelection random(std::uint64_t seed) {
    return {Kind::random_columns, seed};
  }
  static SvdSelection top() { return {Kind::top_singular, 0}; }
};

// Rows of R are d transposed columns of U from the SVD of the raw (pre-
// normalization) dictionary matrix: either d columns chosen at random, or the
// d columns paired with the largest singular values (ties broken by first
// index, which is how the sorted SVD already orders them).
ProjectionMatrix svd_projection(const Dictionary& dict, int d,
                                const SvdSelection& selection);

// Mean projected signal power trace(R A A^T R^T) under unit-covariance
// coefficients, computed on the raw dictionary matrix.
double signal_power(const ProjectionMatrix& r, const Dictionary& dict);

void save_projection_csv(const ProjectionMatrix& r,
                         const std::filesystem::path& path);
ProjectionMatrix load_projection_csv(const std::filesystem::path& path);

}  // namespace srcfuse
