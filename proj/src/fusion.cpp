#include "srcfuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "srcfuse/errors.hpp"
#include "srcfuse/features.hpp"
#include "srcfuse/rng.hpp"

namespace srcfuse {

Expert make_svr_expert(std::string modality, SvrModel model, double threshold) {
  return Expert{std::move(modality),
                [model = std::move(model), threshold](const Eigen::VectorXd& x) {
                  return svr_predict_class(model, x, threshold);
                }};
}

ExpertEnsemble make_ensemble(std::vector<Expert> experts, double beta,
                             int class_count) {
  if (experts.empty()) throw ParameterError("make_ensemble: no experts");
  if (beta < 0.0 || beta >= 1.0) {
    throw ParameterError("make_ensemble: beta must be in [0, 1)");
  }
  if (class_count < 2) throw ParameterError("make_ensemble: class_count < 2");
  ExpertEnsemble e;
  e.weights = Eigen::VectorXd::Ones(static_cast<long>(experts.size()));
  e.experts = std::move(experts);
  e.beta = beta;
  e.class_count = class_count;
  return e;
}

LearnResult learn_weights(const ExpertEnsemble& ensemble,
                          const std::vector<FusionSample>& stream) {
  LearnResult result;
  result.ensemble = ensemble;
  auto& weights = result.ensemble.weights;
  const auto expert_count = ensemble.experts.size();

  for (std::size_t s = 0; s < stream.size(); ++s) {
    const FusionSample& sample = stream[s];
    if (sample.per_modality_features.size() != expert_count) {
      throw DataError("learn_weights: sample " + std::to_string(s) + " has " +
                      std::to_string(sample.per_modality_features.size()) +
                      " modality vectors, expected " +
                      std::to_string(expert_count));
    }
    if (sample.label < 0 || sample.label >= ensemble.class_count) {
      throw DataError("learn_weights: label outside [0, class_count)");
    }
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(ensemble.class_count);
    for (std::size_t j = 0; j < expert_count; ++j) {
      const int local =
          ensemble.experts[j].predict(sample.per_modality_features[j]);
      if (local < 0 || local >= ensemble.class_count) {
        throw DataError("learn_weights: expert '" + ensemble.experts[j].modality +
                        "' predicted class " + std::to_string(local) +
                        " outside [0, class_count)");
      }
      if (local != sample.label) {
        weights(static_cast<long>(j)) *= result.ensemble.beta;
      }
      // the post-update weight votes, matching the update-then-accumulate order
      sigma(local) += weights(static_cast<long>(j));
    }
    int global = 0;
    for (int c = 1; c < ensemble.class_count; ++c) {
      if (sigma(c) > sigma(global)) global = c;
    }
    result.online_predictions.push_back(global);
    result.weight_trajectory.push_back(weights);
  }
  return result;
}

FusionPrediction fuse_predict(
    const ExpertEnsemble& ensemble,
    const std::vector<Eigen::VectorXd>& per_modality_features) {
  if (ensemble.experts.empty()) {
    throw ParameterError("fuse_predict: empty ensemble");
  }
  if (per_modality_features.size() != ensemble.experts.size()) {
    throw DataError("fuse_predict: expected " +
                    std::to_string(ensemble.experts.size()) +
                    " modality vectors, got " +
                    std::to_string(per_modality_features.size()));
  }
  FusionPrediction out;
  out.per_class_weight_sums = Eigen::VectorXd::Zero(ensemble.class_count);
  for (std::size_t j = 0; j < ensemble.experts.size(); ++j) {
    const int local = ensemble.experts[j].predict(per_modality_features[j]);
    if (local < 0 || local >= ensemble.class_count) {
      throw DataError("fuse_predict: expert '" + ensemble.experts[j].modality +
                      "' predicted class outside [0, class_count)");
    }
    out.per_expert_predictions.emplace_back(ensemble.experts[j].modality, local);
    out.per_class_weight_sums(local) += ensemble.weights(static_cast<long>(j));
  }
  int best = 0;
  for (int c = 1; c < ensemble.class_count; ++c) {
    if (out.per_class_weight_sums(c) > out.per_class_weight_sums(best)) best = c;
  }
  out.global_prediction = best;
  return out;
}

namespace {

struct WindowedTrace {
  Eigen::MatrixXd accel_features;  // windows x 1, accel-Z max magnitude
  Eigen::MatrixXd audio_features;  // windows x 1, zero-crossing count
  std::vector<int> labels;         // majority per window
};

WindowedTrace window_trace(const OccupancyTrace& trace, double window_s) {
  validate_trace(trace);
  FeatureSeries accel =
      accel_max_magnitude(trace.accel_z, trace.accel_rate, window_s, Modality::accel_z);
  FeatureSeries audio =
      audio_zero_crossings(trace.audio, trace.audio_rate, window_s);
  const long windows = std::min(accel.values.size(), audio.values.size());

  WindowedTrace out;
  out.accel_features.resize(windows, 1);
  out.audio_features.resize(windows, 1);
  out.accel_features.col(0) = accel.values.head(windows);
  // crossing fraction rather than raw count: keeps the feature O(1)
  out.audio_features.col(0) =
      audio.values.head(windows) / (trace.audio_rate * window_s);
  for (long w = 0; w < windows; ++w) {
    const auto begin = static_cast<std::size_t>(std::floor(w * window_s));
    const auto end = std::min(trace.labels.size(),
                              static_cast<std::size_t>(std::floor((w + 1) * window_s)));
    double occupied = 0.0;
    for (std::size_t s = begin; s < end; ++s) occupied += trace.labels[s];
    out.labels.push_back(occupied * 2.0 >= static_cast<double>(end - begin) ? 1 : 0);
  }
  return out;
}

SegmentAccuracy score(const std::vector<int>& predicted,
                      const std::vector<int>& truth) {
  SegmentAccuracy acc;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) {
      ++acc.occupied_count;
      if (predicted[i] == 1) ++acc.occupied_correct;
    } else {
      ++acc.unoccupied_count;
      if (predicted[i] == 0) ++acc.unoccupied_correct;
    }
  }
  acc.occupied = acc.occupied_count
                     ? static_cast<double>(acc.occupied_correct) / acc.occupied_count
                     : 0.0;
  acc.unoccupied = acc.unoccupied_count
                       ? static_cast<double>(acc.unoccupied_correct) / acc.unoccupied_count
                       : 0.0;
  const int total = acc.occupied_count + acc.unoccupied_count;
  acc.overall = total ? static_cast<double>(acc.occupied_correct +
                                            acc.unoccupied_correct) / total
                      : 0.0;
  return acc;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<long>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<long>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

FusionReport run_fusion_experiment(const OccupancyTrace& trace,
                                   const FusionConfig& config) {
  if (config.window_s <= 0.0) {
    throw ParameterError("run_fusion_experiment: window must be positive");
  }
  if (config.folds < 2) {
    throw ParameterError("run_fusion_experiment: need at least 2 folds");
  }
  const WindowedTrace windowed = window_trace(trace, config.window_s);
  const int windows = static_cast<int>(windowed.labels.size());

  // Stratified learn/test split over windows.
  std::vector<int> occupied_idx, unoccupied_idx;
  for (int w = 0; w < windows; ++w) {
    (windowed.labels[static_cast<std::size_t>(w)] == 1 ? occupied_idx
                                                       : unoccupied_idx)
        .push_back(w);
  }
  Rng rng(config.seed);
  rng.shuffle(occupied_idx);
  rng.shuffle(unoccupied_idx);
  std::vector<int> learn_idx, test_idx;
  for (const auto* group : {&occupied_idx, &unoccupied_idx}) {
    const auto take = static_cast<std::size_t>(
        std::ceil(config.train_fraction * static_cast<double>(group->size())));
    for (std::size_t i = 0; i < group->size(); ++i) {
      (i < take ? learn_idx : test_idx).push_back((*group)[i]);
    }
  }
  std::sort(learn_idx.begin(), learn_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  // Per-class minimums for the stratified weight-learning folds.
  int learn_occ = 0;
  for (int w : learn_idx) learn_occ += windowed.labels[static_cast<std::size_t>(w)];
  if (learn_occ < config.folds ||
      static_cast<int>(learn_idx.size()) - learn_occ < config.folds ||
      test_idx.empty()) {
    throw ParameterError("run_fusion_experiment: trace too short for " +
                         std::to_string(config.folds) + " folds");
  }

  const Eigen::MatrixXd accel_learn = take_rows(windowed.accel_features, learn_idx);
  const Eigen::MatrixXd audio_learn = take_rows(windowed.audio_features, learn_idx);
  Eigen::VectorXd y_learn(static_cast<long>(learn_idx.size()));
  Dataset learn_ds;  // label container reused for the stratified fold helper
  learn_ds.dim = 1;
  learn_ds.class_count = 2;
  learn_ds.class_names = {"unoccupied", "occupied"};
  for (std::size_t i = 0; i < learn_idx.size(); ++i) {
    const int label = windowed.labels[static_cast<std::size_t>(learn_idx[i])];
    y_learn(static_cast<long>(i)) = label;
    LabeledSample s;
    s.features = Eigen::VectorXd::Constant(1, 0.0);
    s.label = label;
    learn_ds.samples.push_back(std::move(s));
  }

  // Hyperparameters per modality, then fold-wise weight learning: the SVRs
  // that vote on fold f never saw fold f.
  const SvrGridChoice accel_choice = svr_grid_search(
      accel_learn, y_learn, config.grid, config.folds, config.seed + 1,
      config.svr_epsilon);
  const SvrGridChoice audio_choice = svr_grid_search(
      audio_learn, y_learn, config.grid, config.folds, config.seed + 2,
      config.svr_epsilon);

  const auto folds = stratified_folds(learn_ds, config.folds, config.seed + 3);
  ExpertEnsemble ensemble;
  {
    // placeholder experts; fold passes rebuild them per fold
    std::vector<Expert> experts;
    experts.push_back({"accel_z", nullptr});
    experts.push_back({"audio_zcr", nullptr});
    ensemble = make_ensemble(std::move(experts), config.beta, 2);
  }
  for (const auto& fold : folds) {
    SvrModel accel_model = svr_train(
        take_rows(accel_learn, fold.train_indices),
        take_rows(Eigen::MatrixXd(y_learn), fold.train_indices).col(0),
        accel_choice.c, accel_choice.gamma, config.svr_epsilon);
    SvrModel audio_model = svr_train(
        take_rows(audio_learn, fold.train_indices),
        take_rows(Eigen::MatrixXd(y_learn), fold.train_indices).col(0),
        audio_choice.c, audio_choice.gamma, config.svr_epsilon);
    ensemble.experts[0] = make_svr_expert("accel_z", std::move(accel_model));
    ensemble.experts[1] = make_svr_expert("audio_zcr", std::move(audio_model));

    std::vector<FusionSample> stream;
    for (int i : fold.validation_indices) {
      FusionSample s;
      s.per_modality_features = {accel_learn.row(i).transpose(),
                                 audio_learn.row(i).transpose()};
      s.label = static_cast<int>(y_learn(i));
      stream.push_back(std::move(s));
    }
    LearnResult lr = learn_weights(ensemble, stream);
    ensemble.weights = lr.ensemble.weights;
  }

  // Final per-modality models on the full learn split.
  SvrModel accel_final = svr_train(accel_learn, y_learn, accel_choice.c,
                                   accel_choice.gamma, config.svr_epsilon);
  SvrModel audio_final = svr_train(audio_learn, y_learn, audio_choice.c,
                                   audio_choice.gamma, config.svr_epsilon);
  ensemble.experts[0] = make_svr_expert("accel_z", accel_final);
  ensemble.experts[1] = make_svr_expert("audio_zcr", audio_final);

  std::vector<int> truth, accel_pred, audio_pred, fused_pred;
  for (int w : test_idx) {
    truth.push_back(windowed.labels[static_cast<std::size_t>(w)]);
    const Eigen::VectorXd xa = windowed.accel_features.row(w).transpose();
    const Eigen::VectorXd xu = windowed.audio_features.row(w).transpose();
    accel_pred.push_back(svr_predict_class(accel_final, xa));
    audio_pred.push_back(svr_predict_class(audio_final, xu));
    if (config.online_eval) {
      // keep updating a copy of the ensemble along the test stream
      FusionSample s;
      s.per_modality_features = {xa, xu};
      s.label = truth.back();
      LearnResult lr = learn_weights(ensemble, {s});
      ensemble.weights = lr.ensemble.weights;
      fused_pred.push_back(lr.online_predictions.front());
    } else {
      fused_pred.push_back(fuse_predict(ensemble, {xa, xu}).global_prediction);
    }
  }

  FusionReport report;
  report.singles.push_back(
      {"accel_z", score(accel_pred, truth), accel_choice.c, accel_choice.gamma});
  report.singles.push_back(
      {"audio_zcr", score(audio_pred, truth), audio_choice.c, audio_choice.gamma});
  report.fused = score(fused_pred, truth);
  report.learned_weights = ensemble.weights;
  report.accel_model = accel_final;
  report.audio_model = audio_final;
  report.train_windows = static_cast<int>(learn_idx.size());
  report.test_windows = static_cast<int>(test_idx.size());
  return report;
}

}  // namespace srcfuse
