#include "srcfuse/src_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "srcfuse/detail/smo.hpp"
#include "srcfuse/errors.hpp"

namespace srcfuse {

SrcEngine::SrcEngine(const Dictionary& dict, const ProjectionMatrix& projection,
                     ClassifyOptions options)
    : options_(options) {
  if (projection.n != dict.dim()) {
    throw ParameterError("SrcEngine: projection expects n=" +
                         std::to_string(projection.n) +
                         " but dictionary dim is " +
                         std::to_string(dict.dim()));
  }
  projection_rows_ = projection.r;
  class_of_column_ = dict.class_of_column;
  class_count_ = dict.class_count;
  if (options_.normalize_after_projection) {
    projected_ = projection.r * dict.raw_matrix();
    for (int j = 0; j < projected_.cols(); ++j) {
      const double norm = projected_.col(j).norm();
      if (norm > 0.0) projected_.col(j) /= norm;
    }
  } else {
    projected_ = projection.r * dict.matrix;  // already unit columns in ambient space
  }
}

SrcDecision SrcEngine::classify(const Eigen::VectorXd& ambient_sample) const {
  if (ambient_sample.size() != projection_rows_.cols()) {
    throw ParameterError("classify: sample dimension " +
                         std::to_string(ambient_sample.size()) +
                         " does not match projection n=" +
                         std::to_string(projection_rows_.cols()));
  }
  if (!ambient_sample.allFinite()) {
    throw ParameterError("classify: sample has non-finite entries");
  }

  Eigen::VectorXd z;
  if (options_.normalize_after_projection) {
    z = projection_rows_ * ambient_sample;
    const double norm = z.norm();
    if (norm > 0.0) z /= norm;
  } else {
    const double norm = ambient_sample.norm();
    z = projection_rows_ * (norm > 0.0 ? (ambient_sample / norm).eval()
                                       : ambient_sample);
  }

  SrcDecision decision;
  decision.coefficients =
      basis_pursuit({projected_, z}, options_.tol, options_.max_iter);

  decision.per_class_residuals.setZero(class_count_);
  Eigen::MatrixXd per_class_recon =
      Eigen::MatrixXd::Zero(projected_.rows(), class_count_);
  const Eigen::VectorXd& x = decision.coefficients.coeffs;
  for (int j = 0; j < projected_.cols(); ++j) {
    if (x(j) != 0.0) {
      per_class_recon.col(class_of_column_[static_cast<std::size_t>(j)]) +=
          x(j) * projected_.col(j);
    }
  }
  int best = 0;
  for (int c = 0; c < class_count_; ++c) {
    decision.per_class_residuals(c) = (z - per_class_recon.col(c)).norm();
    if (decision.per_class_residuals(c) < decision.per_class_residuals(best)) {
      best = c;
    }
  }
  decision.predicted_class = best;
  return decision;
}

SrcDecision classify(const Dictionary& dict, const ProjectionMatrix& projection,
                     const Eigen::VectorXd& sample, double tol) {
  ClassifyOptions options;
  options.tol = tol;
  return SrcEngine(dict, projection, options).classify(sample);
}

int knn_classify(const Dataset& train, const Eigen::VectorXd& sample, int k) {
  const int count = static_cast<int>(train.samples.size());
  if (count == 0) throw ParameterError("knn_classify: empty training set");
  if (k < 1 || k > count) {
    throw ParameterError("knn_classify: k=" + std::to_string(k) +
                         " outside [1, " + std::to_string(count) + "]");
  }
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    dist[static_cast<std::size_t>(i)] = {
        (train.samples[static_cast<std::size_t>(i)].features - sample).squaredNorm(), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  std::vector<int> votes(static_cast<std::size_t>(train.class_count), 0);
  for (int i = 0; i < k; ++i) {
    ++votes[static_cast<std::size_t>(
        train.samples[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)].label)];
  }
  int best = 0;
  for (int c = 1; c < train.class_count; ++c) {
    if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

SvmModel svm_train(const Dataset& train, double c, double gamma) {
  if (c <= 0.0) throw ParameterError("svm_train: C must be positive");
  if (gamma <= 0.0) throw ParameterError("svm_train: gamma must be positive");
  bool multi = false;
  for (const auto& s : train.samples) {
    if (s.label != train.samples.front().label) {
      multi = true;
      break;
    }
  }
  if (!multi) throw ParameterError("svm_train: training set has a single class");
  validate_dataset(train);
  const int count = static_cast<int>(train.samples.size());

  Eigen::MatrixXd x(count, train.dim);
  for (int i = 0; i < count; ++i) {
    x.row(i) = train.samples[static_cast<std::size_t>(i)].features.transpose();
  }
  detail::RbfKernelCache kernel(x, gamma);

  SvmModel model;
  model.c = c;
  model.gamma = gamma;
  model.class_count = train.class_count;
  model.dim = train.dim;
  model.machines.resize(static_cast<std::size_t>(train.class_count));

  for (int cls = 0; cls < train.class_count; ++cls) {
    detail::SmoProblem problem;
    problem.p = Eigen::VectorXd::Constant(count, -1.0);
    problem.c = Eigen::VectorXd::Constant(count, c);
    problem.y.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      problem.y[static_cast<std::size_t>(i)] =
          train.samples[static_cast<std::size_t>(i)].label == cls ? +1 : -1;
    }
    problem.q_row = [&kernel, &problem](int i, Eigen::VectorXd& out) {
      const Eigen::VectorXd& krow = kernel.row(i);
      const double yi = problem.y[static_cast<std::size_t>(i)];
      for (int s = 0; s < krow.size(); ++s) {
        out(s) = yi * problem.y[static_cast<std::size_t>(s)] * krow(s);
      }
    };
    detail::SmoResult res = solve_smo(problem, 1e-3, 2000000);

    BinarySvm machine;
    machine.bias = res.bias;
    int sv = 0;
    for (int i = 0; i < count; ++i) {
      if (res.alpha(i) != 0.0) ++sv;
    }
    machine.support_vectors.resize(sv, train.dim);
    machine.coeffs.resize(sv);
    for (int i = 0, k = 0; i < count; ++i) {
      if (res.alpha(i) != 0.0) {
        machine.support_vectors.row(k) = x.row(i);
        machine.coeffs(k) =
            res.alpha(i) * problem.y[static_cast<std::size_t>(i)];
        ++k;
      }
    }
    model.machines[static_cast<std::size_t>(cls)] = std::move(machine);
  }
  return model;
}

int svm_classify(const SvmModel& model, const Eigen::VectorXd& sample) {
  if (sample.size() != model.dim) {
    throw ParameterError("svm_classify: expected dimension " +
                         std::to_string(model.dim));
  }
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int cls = 0; cls < model.class_count; ++cls) {
    const auto& machine = model.machines[static_cast<std::size_t>(cls)];
    double value = machine.bias;
    for (int i = 0; i < machine.coeffs.size(); ++i) {
      const double d2 =
          (machine.support_vectors.row(i).transpose() - sample).squaredNorm();
      value += machine.coeffs(i) * std::exp(-model.gamma * d2);
    }
    if (value > best_value) {
      best_value = value;
      best = cls;
    }
  }
  return best;
}

}  // namespace srcfuse
