#include "srcfuse/svr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "srcfuse/dataset.hpp"
#include "srcfuse/detail/smo.hpp"
#include "srcfuse/errors.hpp"
#include "srcfuse/rng.hpp"

namespace srcfuse {

SvrModel svr_train(const Eigen::MatrixXd& xs, const Eigen::VectorXd& ys,
                   double c, double gamma, double epsilon) {
  const int count = static_cast<int>(xs.rows());
  if (count < 2) throw ParameterError("svr_train: need at least 2 samples");
  if (ys.size() != count) throw ParameterError("svr_train: xs/ys size mismatch");
  if (c <= 0.0) throw ParameterError("svr_train: C must be positive");
  if (gamma <= 0.0) throw ParameterError("svr_train: gamma must be positive");
  if (epsilon < 0.0) throw ParameterError("svr_train: epsilon must be >= 0");
  if (!xs.allFinite()) throw DataError("svr_train: non-finite feature");
  if (!ys.allFinite()) throw DataError("svr_train: non-finite target");

  // Standard 2l expansion: variables [alpha; alpha*], kernel signs from the
  // +-1 labels, common box [0, C].
  detail::RbfKernelCache kernel(xs, gamma);
  detail::SmoProblem problem;
  problem.p.resize(2 * count);
  problem.c = Eigen::VectorXd::Constant(2 * count, c);
  problem.y.resize(static_cast<std::size_t>(2 * count));
  for (int t = 0; t < count; ++t) {
    problem.p(t) = epsilon - ys(t);
    problem.p(count + t) = epsilon + ys(t);
    problem.y[static_cast<std::size_t>(t)] = +1;
    problem.y[static_cast<std::size_t>(count + t)] = -1;
  }
  problem.q_row = [&kernel, count](int t, Eigen::VectorXd& out) {
    const Eigen::VectorXd& krow = kernel.row(t % count);
    const double sign_t = t < count ? 1.0 : -1.0;
    out.segment(0, count) = sign_t * krow;
    out.segment(count, count) = -sign_t * krow;
  };

  detail::SmoResult res = solve_smo(problem, 1e-4, 2000000);

  SvrModel model;
  model.gamma = gamma;
  model.c = c;
  model.epsilon = epsilon;
  model.dim = static_cast<int>(xs.cols());
  model.bias = res.bias;

  // beta = alpha - alpha*; shrink matched pairs so one side is exactly zero,
  // which keeps |beta| <= C without touching the fit.
  Eigen::VectorXd beta(count);
  for (int t = 0; t < count; ++t) {
    double a = res.alpha(t);
    double a_star = res.alpha(count + t);
    const double shrink = std::min(a, a_star);
    a -= shrink;
    a_star -= shrink;
    beta(t) = std::clamp(a - a_star, -c, c);
  }

  // Dual feasibility is promised exactly: the left-to-right sum of the stored
  // coefficients is 0.0 in double arithmetic. A free coefficient is moved to
  // the last slot and assigned the exact negation of the fold of the others;
  // support-vector order carries no meaning, so the swap is free. Assigning
  // can zero the pivot outright, in which case the entry is dropped and the
  // fix repeated on the shorter list.
  std::vector<int> kept;
  for (int t = 0; t < count; ++t) {
    if (beta(t) != 0.0) kept.push_back(t);
  }
  bool fixed = false;
  for (int i = static_cast<int>(kept.size()) - 1; i >= 0 && !fixed; --i) {
    if (std::abs(beta(kept[static_cast<std::size_t>(i)])) >= c) continue;
    std::swap(kept[static_cast<std::size_t>(i)], kept.back());
    double fold = 0.0;
    for (std::size_t k = 0; k + 1 < kept.size(); ++k) fold += beta(kept[k]);
    if (std::abs(fold) > c) {
      std::swap(kept[static_cast<std::size_t>(i)], kept.back());
      continue;  // this pivot cannot absorb the fold inside the box
    }
    if (fold == 0.0) {
      kept.pop_back();  // the others already cancel; the pivot would be zero
    } else {
      beta(kept.back()) = -fold;
    }
    fixed = true;
  }
  if (!fixed && !kept.empty()) {
    // All-at-bound fallback: interleave +C/-C so consecutive pairs cancel.
    std::vector<int> pos, neg;
    for (int t : kept) (beta(t) > 0.0 ? pos : neg).push_back(t);
    if (pos.size() == neg.size()) {
      kept.clear();
      for (std::size_t i = 0; i < pos.size(); ++i) {
        kept.push_back(pos[i]);
        kept.push_back(neg[i]);
      }
    }
  }

  const int sv_count = static_cast<int>(kept.size());
  model.support_vectors.resize(sv_count, xs.cols());
  model.dual_coeffs.resize(sv_count);
  for (int k = 0; k < sv_count; ++k) {
    model.support_vectors.row(k) = xs.row(kept[static_cast<std::size_t>(k)]);
    model.dual_coeffs(k) = beta(kept[static_cast<std::size_t>(k)]);
  }
  return model;
}

double svr_predict(const SvrModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dim) {
    throw ParameterError("svr_predict: expected dimension " +
                         std::to_string(model.dim) + ", got " +
                         std::to_string(x.size()));
  }
  double acc = model.bias;
  for (int i = 0; i < model.dual_coeffs.size(); ++i) {
    const double d2 = (model.support_vectors.row(i).transpose() - x).squaredNorm();
    acc += model.dual_coeffs(i) * std::exp(-model.gamma * d2);
  }
  return acc;
}

int svr_predict_class(const SvrModel& model, const Eigen::VectorXd& x,
                      double threshold) {
  return svr_predict(model, x) >= threshold ? 1 : 0;
}

void save_svr(const SvrModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write svr model: " + path.string());
  out.precision(17);
  out << "srcfuse-svr v1\n";
  out << "gamma " << model.gamma << "\n";
  out << "c " << model.c << "\n";
  out << "epsilon " << model.epsilon << "\n";
  out << "bias " << model.bias << "\n";
  out << "dim " << model.dim << "\n";
  out << "sv_count " << model.dual_coeffs.size() << "\n";
  for (int i = 0; i < model.dual_coeffs.size(); ++i) {
    out << model.dual_coeffs(i);
    for (int j = 0; j < model.dim; ++j) out << ' ' << model.support_vectors(i, j);
    out << '\n';
  }
  if (!out) throw IoError("failed writing svr model: " + path.string());
}

SvrModel load_svr(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open svr model: " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != "srcfuse-svr v1") {
    throw FormatError("not an svr model file: " + path.string());
  }
  SvrModel model;
  int sv_count = -1;
  for (int field = 0; field < 6; ++field) {
    std::string key;
    if (!(in >> key)) throw FormatError("truncated svr model: " + path.string());
    if (key == "gamma") in >> model.gamma;
    else if (key == "c") in >> model.c;
    else if (key == "epsilon") in >> model.epsilon;
    else if (key == "bias") in >> model.bias;
    else if (key == "dim") in >> model.dim;
    else if (key == "sv_count") in >> sv_count;
    else throw FormatError("unknown field '" + key + "' in " + path.string());
    if (!in) throw FormatError("bad value for " + key + " in " + path.string());
  }
  if (model.dim <= 0 || sv_count < 0) {
    throw FormatError("bad svr model header: " + path.string());
  }
  model.support_vectors.resize(sv_count, model.dim);
  model.dual_coeffs.resize(sv_count);
  for (int i = 0; i < sv_count; ++i) {
    in >> model.dual_coeffs(i);
    for (int j = 0; j < model.dim; ++j) in >> model.support_vectors(i, j);
    if (!in) throw FormatError("truncated support vectors in " + path.string());
  }
  return model;
}

SvrGridChoice svr_grid_search(const Eigen::MatrixXd& xs,
                              const Eigen::VectorXd& ys, const SvrGrid& grid,
                              int folds, std::uint64_t seed, double epsilon) {
  const int count = static_cast<int>(xs.rows());
  if (count < 2 * folds) {
    throw ParameterError("svr_grid_search: too few samples for " +
                         std::to_string(folds) + " folds");
  }

  // Plain (unstratified) shuffled folds over sample indices; targets may be
  // arbitrary reals.
  std::vector<int> order(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  SvrGridChoice best;
  bool have_best = false;
  for (double c : grid.cs) {
    for (double gamma : grid.gammas) {
      double errors = 0.0;
      double sq = 0.0;
      int total = 0;
      for (int f = 0; f < folds; ++f) {
        std::vector<int> val, train;
        for (int i = 0; i < count; ++i) {
          (static_cast<int>(i % folds) == f ? val : train)
              .push_back(order[static_cast<std::size_t>(i)]);
        }
        Eigen::MatrixXd xt(train.size(), xs.cols());
        Eigen::VectorXd yt(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) {
          xt.row(static_cast<long>(i)) = xs.row(train[i]);
          yt(static_cast<long>(i)) = ys(train[i]);
        }
        SvrModel m = svr_train(xt, yt, c, gamma, epsilon);
        for (int i : val) {
          const double pred = svr_predict(m, xs.row(i).transpose());
          const int cls = pred >= 0.5 ? 1 : 0;
          const int want = ys(i) >= 0.5 ? 1 : 0;
          if (cls != want) errors += 1.0;
          sq += (pred - ys(i)) * (pred - ys(i));
          ++total;
        }
      }
      const double err_rate = errors / total;
      const double mse = sq / total;
      const bool better =
          !have_best || err_rate < best.cv_error_rate ||
          (err_rate == best.cv_error_rate &&
           (mse < best.cv_mse ||
            (mse == best.cv_mse &&
             (c < best.c || (c == best.c && gamma < best.gamma)))));
      if (better) {
        best = {c, gamma, err_rate, mse};
        have_best = true;
      }
    }
  }
  return best;
}

}  // namespace srcfuse
