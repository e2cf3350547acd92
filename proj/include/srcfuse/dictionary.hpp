#pragma once

#include <Eigen/Dense>
#include <vector>

#include "srcfuse/dataset.hpp"

namespace srcfuse {

// Column-stacked training samples grouped by class. Columns are unit-norm;
// the original scales are kept in column_norms so the raw matrix is
// recoverable for the projection constructions.
struct Dictionary {
  Eigen::MatrixXd matrix;            // n x N, unit columns
  std::vector<int> class_of_column;  // size N
  int class_count = 0;
  Eigen::VectorXd column_norms;      // pre-normalization l2 norms

  int dim() const { return static_cast<int>(matrix.rows()); }
  int atom_count() const { return static_cast<int>(matrix.cols()); }

  // Original (de-normalized) training matrix.
  Eigen::MatrixXd raw_matrix() const {
    return matrix * column_norms.asDiagonal();
  }
};

// One unit-norm column per training sample, columns grouped by class in
// ascending class order (stable within a class). A zero-norm sample is a
// data error naming the offending sample index.
Dictionary build_dictionary(const Dataset& train);

}  // namespace srcfuse
