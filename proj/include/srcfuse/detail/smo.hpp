#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace srcfuse::detail {

// Shared RBF kernel row provider with lazy caching. Rows are K(x_i, x_*) for
// the whole training set; one-vs-rest machines and the two halves of the SVR
// expansion reuse the same rows.
class RbfKernelCache {
public:
  RbfKernelCache(Eigen::MatrixXd samples, double gamma,
                 std::size_t budget_bytes = std::size_t(256) << 20);

  const Eigen::VectorXd& row(int i) const;
  int count() const { return static_cast<int>(x_.rows()); }
  const Eigen::MatrixXd& samples() const { return x_; }
  double gamma() const { return gamma_; }

private:
  Eigen::MatrixXd x_;  // rows = samples
  Eigen::VectorXd sq_norms_;
  double gamma_;
  std::size_t max_rows_;
  mutable std::vector<Eigen::VectorXd> rows_;
  mutable std::vector<int> resident_;  // eviction order (FIFO)
  mutable std::size_t next_evict_ = 0;
};

// minimize 1/2 a^T Q a + p^T a  subject to  y^T a = 0,  0 <= a_i <= c_i
// with y_i in {-1, +1}. Q is given row-wise through `q_row`, which must fill
// `out` with row i of Q.
struct SmoProblem {
  std::function<void(int, Eigen::VectorXd&)> q_row;
  Eigen::VectorXd p;
  std::vector<int> y;
  Eigen::VectorXd c;
};

struct SmoResult {
  Eigen::VectorXd alpha;
  double bias = 0.0;     // b with f(x) = sum_i coef_i K(x_i, x) + b
  long iterations = 0;
  bool converged = false;
  double gap = 0.0;      // final KKT violation m - M
};

// Maximal-violating-pair SMO. Stops when the KKT gap drops to eps.
SmoResult solve_smo(const SmoProblem& problem, double eps, long max_iter);

}  // namespace srcfuse::detail
