#include "srcfuse/sparse_solver.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "srcfuse/errors.hpp"

namespace srcfuse {

namespace {

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw ParameterError(std::string(what) + " contains non-finite entries");
  }
}

void check_system(const LinearSystem& sys) {
  if (sys.matrix.size() == 0) throw ParameterError("system matrix is empty");
  if (sys.rhs.size() != sys.matrix.rows()) {
    throw ParameterError("rhs length does not match matrix row count");
  }
  check_finite(sys.matrix, "system matrix");
  check_finite(sys.rhs, "system rhs");
}

}  // namespace

SvdFactors svd(const Eigen::MatrixXd& m) {
  if (m.size() == 0) throw ParameterError("svd of an empty matrix");
  check_finite(m, "svd input");
  Eigen::BDCSVD<Eigen::MatrixXd> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f;
  f.u = dec.matrixU();
  f.s = dec.singularValues();
  f.vt = dec.matrixV().transpose();
  return f;
}

int numeric_rank(const SvdFactors& f, int rows, int cols) {
  if (f.s.size() == 0) return 0;
  const double cutoff = std::max(rows, cols) *
                        std::numeric_limits<double>::epsilon() * f.s(0);
  int r = 0;
  while (r < f.s.size() && f.s(r) > cutoff) ++r;
  return r;
}

SparseSolution min_l2_solution(const LinearSystem& sys) {
  check_system(sys);
  const SvdFactors f = svd(sys.matrix);
  const int rank = numeric_rank(f, static_cast<int>(sys.matrix.rows()),
                                static_cast<int>(sys.matrix.cols()));

  // x = V S^+ U^T y restricted to the numeric rank.
  Eigen::VectorXd uty = f.u.leftCols(rank).transpose() * sys.rhs;
  for (int i = 0; i < rank; ++i) uty(i) /= f.s(i);
  SparseSolution sol;
  sol.coeffs = f.vt.topRows(rank).transpose() * uty;
  sol.residual_norm = (sys.matrix * sol.coeffs - sys.rhs).norm();
  sol.iterations = 0;
  sol.converged = sol.residual_norm <= 1e-8 * std::max(1.0, sys.rhs.norm());
  return sol;
}

SparseSolution basis_pursuit(const LinearSystem& sys, double tol, int max_iter) {
  check_system(sys);
  if (tol <= 0.0) throw ParameterError("basis_pursuit: tol must be positive");
  if (max_iter < 1) throw ParameterError("basis_pursuit: max_iter must be >= 1");

  const Eigen::MatrixXd& a = sys.matrix;
  const Eigen::VectorXd& y = sys.rhs;
  const int n = static_cast<int>(a.cols());

  SparseSolution sol;
  sol.coeffs = Eigen::VectorXd::Zero(n);
  sol.residual_norm = y.norm();
  if (sol.residual_norm <= tol) {
    sol.converged = true;
    return sol;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = y;                       // residual y - A x
  Eigen::VectorXd c = a.transpose() * r;       // correlations
  double lambda = c.cwiseAbs().maxCoeff();
  if (lambda <= 0.0) {
    sol.converged = false;  // zero matrix, nonzero rhs
    return sol;
  }

  std::vector<int> active;
  std::vector<char> is_active(static_cast<std::size_t>(n), 0);
  const int max_active = static_cast<int>(std::min<Eigen::Index>(a.rows(), n));

  // Atoms whose correlation magnitude sits at the boundary join together.
  // Exact ties are routine (e.g. a test vector built from +-1 combinations of
  // unit atoms), so a single-argmax start would derail the path.
  constexpr double kTieRel = 1e-9;
  const auto sweep_boundary = [&](int excluded) {
    const double cut = lambda * (1.0 - kTieRel);
    for (int j = 0; j < n; ++j) {
      if (static_cast<int>(active.size()) >= max_active) break;
      if (is_active[static_cast<std::size_t>(j)] || j == excluded) continue;
      if (std::abs(c(j)) >= cut) {
        active.push_back(j);
        is_active[static_cast<std::size_t>(j)] = 1;
      }
    }
  };
  sweep_boundary(-1);

  double best_residual = sol.residual_norm;
  Eigen::VectorXd best_x = x;
  int steps = 0;
  bool converged = false;

  enum class Event { none, join, cross, tol_hit, path_end };

  while (steps < max_iter) {
    ++steps;
    const int k = static_cast<int>(active.size());

    // Equiangular direction on the active set: (A_G^T A_G) d = sign(c_G).
    Eigen::MatrixXd ag(a.rows(), k);
    Eigen::VectorXd sign_g(k);
    for (int i = 0; i < k; ++i) {
      ag.col(i) = a.col(active[static_cast<std::size_t>(i)]);
      sign_g(i) = c(active[static_cast<std::size_t>(i)]) >= 0.0 ? 1.0 : -1.0;
    }
    const Eigen::MatrixXd gram = ag.transpose() * ag;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    Eigen::VectorXd dir = ldlt.solve(sign_g);
    if (!dir.allFinite() ||
        (gram * dir - sign_g).norm() > 1e-6 * std::sqrt(double(k))) {
      break;  // degenerate active set; keep best iterate
    }

    const Eigen::VectorXd v = ag * dir;          // residual direction
    const Eigen::VectorXd w = a.transpose() * v; // correlation drift

    const double gamma_eps = 1e-12 * std::max(1.0, lambda);
    double gamma = lambda;  // full step drives lambda to zero
    Event event = Event::path_end;
    int event_index = -1;

    // A new atom's correlation magnitude catches up with lambda.
    if (k < max_active) {
      for (int j = 0; j < n; ++j) {
        if (is_active[static_cast<std::size_t>(j)]) continue;
        const double d1 = 1.0 - w(j);
        if (std::abs(d1) > 1e-14) {
          const double g = (lambda - c(j)) / d1;
          if (g > gamma_eps && g < gamma) {
            gamma = g;
            event = Event::join;
            event_index = j;
          }
        }
        const double d2 = 1.0 + w(j);
        if (std::abs(d2) > 1e-14) {
          const double g = (lambda + c(j)) / d2;
          if (g > gamma_eps && g < gamma) {
            gamma = g;
            event = Event::join;
            event_index = j;
          }
        }
      }
    }

    // An active coefficient crosses zero.
    for (int i = 0; i < k; ++i) {
      const double di = dir(i);
      if (di == 0.0) continue;
      const double g = -x(active[static_cast<std::size_t>(i)]) / di;
      if (g > gamma_eps && g < gamma) {
        gamma = g;
        event = Event::cross;
        event_index = i;
      }
    }

    // The residual norm reaches the target inside this segment.
    {
      const double qa = v.squaredNorm();
      const double qb = -2.0 * r.dot(v);
      const double qc = r.squaredNorm() - tol * tol;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (qa > 0.0 && disc >= 0.0) {
        const double root = (-qb - std::sqrt(disc)) / (2.0 * qa);
        if (root > 0.0 && root <= gamma) {
          gamma = root;
          event = Event::tol_hit;
        }
      }
    }

    for (int i = 0; i < k; ++i) {
      x(active[static_cast<std::size_t>(i)]) += gamma * dir(i);
    }
    r = y - a * x;
    c = a.transpose() * r;
    const double res = r.norm();
    if (res < best_residual) {
      best_residual = res;
      best_x = x;
    }

    if (event == Event::tol_hit || res <= tol) {
      converged = true;
      break;
    }
    if (event == Event::path_end) {
      converged = res <= tol;
      break;
    }
    int removed = -1;
    if (event == Event::join) {
      if (!is_active[static_cast<std::size_t>(event_index)]) {
        active.push_back(event_index);
        is_active[static_cast<std::size_t>(event_index)] = 1;
      }
    } else {  // cross
      const int col = active[static_cast<std::size_t>(event_index)];
      x(col) = 0.0;
      is_active[static_cast<std::size_t>(col)] = 0;
      active.erase(active.begin() + event_index);
      removed = col;
    }
    lambda = c.cwiseAbs().maxCoeff();
    if (lambda <= gamma_eps) {
      converged = r.norm() <= tol;
      break;
    }
    // Pick up atoms that reached the boundary alongside the event atom. The
    // atom removed this step stays out for one segment so it does not
    // oscillate straight back in.
    sweep_boundary(removed);
    if (active.empty()) break;
  }

  if (converged) {
    sol.coeffs = x;
    sol.residual_norm = (a * x - y).norm();
  } else {
    sol.coeffs = best_x;
    sol.residual_norm = (a * best_x - y).norm();
    converged = sol.residual_norm <= tol;
  }
  sol.iterations = steps;
  sol.converged = converged;
  return sol;
}

}  // namespace srcfuse
