#include "srcfuse/detail/smo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "srcfuse/errors.hpp"

namespace srcfuse::detail {

RbfKernelCache::RbfKernelCache(Eigen::MatrixXd samples, double gamma,
                               std::size_t budget_bytes)
    : x_(std::move(samples)), gamma_(gamma) {
  sq_norms_ = x_.rowwise().squaredNorm();
  rows_.resize(static_cast<std::size_t>(x_.rows()));
  const std::size_t row_bytes = static_cast<std::size_t>(x_.rows()) * sizeof(double);
  max_rows_ = std::max<std::size_t>(16, budget_bytes / std::max<std::size_t>(1, row_bytes));
}

const Eigen::VectorXd& RbfKernelCache::row(int i) const {
  auto& r = rows_[static_cast<std::size_t>(i)];
  if (r.size() == 0) {
    if (resident_.size() >= max_rows_) {
      // FIFO eviction keeps the cache bounded on large problems.
      const int victim = resident_[next_evict_];
      rows_[static_cast<std::size_t>(victim)].resize(0);
      resident_[next_evict_] = i;
      next_evict_ = (next_evict_ + 1) % resident_.size();
    } else {
      resident_.push_back(i);
    }
    Eigen::VectorXd d2 = sq_norms_.array() + sq_norms_(i) -
                         2.0 * (x_ * x_.row(i).transpose()).array();
    r = (-gamma_ * d2.cwiseMax(0.0)).array().exp();
  }
  return r;
}

SmoResult solve_smo(const SmoProblem& problem, double eps, long max_iter) {
  const int n = static_cast<int>(problem.p.size());
  if (n == 0) throw ParameterError("solve_smo: empty problem");
  if (static_cast<int>(problem.y.size()) != n || problem.c.size() != n) {
    throw ParameterError("solve_smo: inconsistent problem sizes");
  }

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = problem.p;  // gradient of the objective at alpha
  Eigen::VectorXd qi(n), qj(n);

  const auto in_up = [&](int t) {
    return problem.y[static_cast<std::size_t>(t)] > 0 ? alpha(t) < problem.c(t)
                                                      : alpha(t) > 0.0;
  };
  const auto in_low = [&](int t) {
    return problem.y[static_cast<std::size_t>(t)] > 0 ? alpha(t) > 0.0
                                                      : alpha(t) < problem.c(t);
  };

  SmoResult result;
  long iter = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (; iter < max_iter; ++iter) {
    int i = -1, j = -1;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double v = -problem.y[static_cast<std::size_t>(t)] * g(t);
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    gap = m_up - m_low;
    if (i < 0 || j < 0 || gap <= eps) break;

    problem.q_row(i, qi);
    problem.q_row(j, qj);
    const int yi = problem.y[static_cast<std::size_t>(i)];
    const int yj = problem.y[static_cast<std::size_t>(j)];

    double quad = qi(i) + qj(j) - 2.0 * yi * yj * qi(j);
    if (quad <= 0.0) quad = 1e-12;
    double t_step = gap / quad;

    // Box bounds along the feasible direction a_i += yi*t, a_j -= yj*t.
    const double ti_max = yi > 0 ? problem.c(i) - alpha(i) : alpha(i);
    const double tj_max = yj > 0 ? alpha(j) : problem.c(j) - alpha(j);
    bool bind_i = false;
    double t_max = tj_max;
    if (ti_max < tj_max) {
      t_max = ti_max;
      bind_i = true;
    }
    if (t_step >= t_max) {
      t_step = t_max;
      if (t_step <= 0.0) break;  // numerically stuck at a vertex
      // Snap the binding variable exactly onto its bound.
      if (bind_i) {
        const double target = yi > 0 ? problem.c(i) : 0.0;
        t_step = yi > 0 ? target - alpha(i) : alpha(i) - target;
        alpha(i) = target;
        alpha(j) -= yj * t_step;
      } else {
        const double target = yj > 0 ? 0.0 : problem.c(j);
        t_step = yj > 0 ? alpha(j) - target : target - alpha(j);
        alpha(j) = target;
        alpha(i) += yi * t_step;
      }
    } else {
      alpha(i) += yi * t_step;
      alpha(j) -= yj * t_step;
    }
    alpha(i) = std::clamp(alpha(i), 0.0, problem.c(i));
    alpha(j) = std::clamp(alpha(j), 0.0, problem.c(j));

    g += t_step * (yi * qi - yj * qj);
  }

  result.iterations = iter;
  result.gap = gap;
  result.converged = gap <= eps;

  // Bias from the free variables when any exist, else the KKT midpoint.
  double sum = 0.0;
  int free_count = 0;
  for (int t = 0; t < n; ++t) {
    const double margin = 1e-8 * problem.c(t);
    if (alpha(t) > margin && alpha(t) < problem.c(t) - margin) {
      sum += -problem.y[static_cast<std::size_t>(t)] * g(t);
      ++free_count;
    }
  }
  if (free_count > 0) {
    result.bias = sum / free_count;
  } else {
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double v = -problem.y[static_cast<std::size_t>(t)] * g(t);
      if (in_up(t)) m_up = std::max(m_up, v);
      if (in_low(t)) m_low = std::min(m_low, v);
    }
    if (std::isfinite(m_up) && std::isfinite(m_low)) {
      result.bias = (m_up + m_low) / 2.0;
    } else if (std::isfinite(m_up)) {
      result.bias = m_up;
    } else if (std::isfinite(m_low)) {
      result.bias = m_low;
    }
  }
  result.alpha = std::move(alpha);
  return result;
}

}  // namespace srcfuse::detail
