#pragma once

#include <Eigen/Dense>
#include <vector>

#include "srcfuse/dataset.hpp"
#include "srcfuse/dictionary.hpp"
#include "srcfuse/projection.hpp"
#include "srcfuse/sparse_solver.hpp"

namespace srcfuse {

struct SrcDecision {
  int predicted_class = 0;  // argmin of the residuals, ties to lowest index
  Eigen::VectorXd per_class_residuals;
  SparseSolution coefficients;
};

struct ClassifyOptions {
  double tol = 1e-4;
  int max_iter = 10000;
  // Columns and the test vector are projected first and normalized after;
  // the alternative order (normalize the ambient dictionary, then project)
  // is kept for comparison.
  bool normalize_after_projection = true;
};

// Precomputed projected dictionary for classifying many samples against one
// (Dictionary, ProjectionMatrix) pair. Immutable after construction; classify
// is safe to call concurrently.
class SrcEngine {
public:
  SrcEngine(const Dictionary& dict, const ProjectionMatrix& projection,
            ClassifyOptions options = {});

  SrcDecision classify(const Eigen::VectorXd& ambient_sample) const;

  int class_count() const { return class_count_; }

private:
  Eigen::MatrixXd projected_;  // d x N, column-normalized
  Eigen::MatrixXd projection_rows_;
  std::vector<int> class_of_column_;
  int class_count_ = 0;
  ClassifyOptions options_;
};

// One-shot convenience wrapper around SrcEngine.
SrcDecision classify(const Dictionary& dict, const ProjectionMatrix& projection,
                     const Eigen::VectorXd& sample, double tol = 1e-4);

// Majority label among the k nearest neighbors (Euclidean). Distance ties
// prefer the smaller sample index; vote ties the smallest class index.
int knn_classify(const Dataset& train, const Eigen::VectorXd& sample, int k);

// One-vs-rest soft-margin RBF SVM baseline.
struct BinarySvm {
  Eigen::MatrixXd support_vectors;  // rows
  Eigen::VectorXd coeffs;           // alpha_i * y_i, nonzero entries only
  double bias = 0.0;
};

struct SvmModel {
  std::vector<BinarySvm> machines;  // one per class
  double c = 1.0;
  double gamma = 1.0;
  int class_count = 0;
  int dim = 0;
};

SvmModel svm_train(const Dataset& train, double c, double gamma);
int svm_classify(const SvmModel& model, const Eigen::VectorXd& sample);

}  // namespace srcfuse
