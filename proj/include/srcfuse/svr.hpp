#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace srcfuse {

// epsilon-insensitive support vector regression with an RBF kernel
// K(x, y) = exp(-gamma ||x - y||^2).
struct SvrModel {
  Eigen::MatrixXd support_vectors;  // rows; exactly the nonzero-coefficient samples
  Eigen::VectorXd dual_coeffs;      // alpha - alpha*; left-to-right sum is exactly 0.0
  double bias = 0.0;
  double gamma = 1.0;
  double c = 1.0;
  double epsilon = 0.1;
  int dim = 0;
};

// Solves the epsilon-SVR dual by sequential pairwise optimization to KKT
// tolerance 1e-3 (internally tighter). xs rows are samples.
SvrModel svr_train(const Eigen::MatrixXd& xs, const Eigen::VectorXd& ys,
                   double c, double gamma, double epsilon);

double svr_predict(const SvrModel& model, const Eigen::VectorXd& x);

// 1 if the regression output is >= threshold (default 0.5 for 0/1 targets).
int svr_predict_class(const SvrModel& model, const Eigen::VectorXd& x,
                      double threshold = 0.5);

void save_svr(const SvrModel& model, const std::filesystem::path& path);
SvrModel load_svr(const std::filesystem::path& path);

struct SvrGrid {
  std::vector<double> cs{0.1, 1.0, 10.0, 100.0};
  std::vector<double> gammas{0.01, 0.1, 1.0, 10.0};
};

struct SvrGridChoice {
  double c = 1.0;
  double gamma = 1.0;
  double cv_error_rate = 0.0;  // thresholded misclassification on the folds
  double cv_mse = 0.0;
};

// k-fold grid search for (C, gamma). Selection: lowest thresholded error
// rate, ties by lower MSE, then smaller C, then smaller gamma.
SvrGridChoice svr_grid_search(const Eigen::MatrixXd& xs,
                              const Eigen::VectorXd& ys, const SvrGrid& grid,
                              int folds, std::uint64_t seed, double epsilon);

}  // namespace srcfuse
