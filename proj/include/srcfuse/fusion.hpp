#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "srcfuse/dataset.hpp"
#include "srcfuse/svr.hpp"

namespace srcfuse {

// A sensing modality viewed as a voting expert: anything that maps the
// modality's feature vector to a class.
struct Expert {
  std::string modality;
  std::function<int(const Eigen::VectorXd&)> predict;
};

Expert make_svr_expert(std::string modality, SvrModel model,
                       double threshold = 0.5);

struct ExpertEnsemble {
  std::vector<Expert> experts;
  Eigen::VectorXd weights;  // strictly positive, start at 1
  double beta = 0.5;        // multiplicative penalty in [0, 1)
  int class_count = 2;
};

ExpertEnsemble make_ensemble(std::vector<Expert> experts, double beta = 0.5,
                             int class_count = 2);

struct FusionPrediction {
  int global_prediction = 0;
  Eigen::VectorXd per_class_weight_sums;
  std::vector<std::pair<std::string, int>> per_expert_predictions;
};

// One labeled step of the multi-modal stream: one feature vector per expert
// plus the true class.
struct FusionSample {
  std::vector<Eigen::VectorXd> per_modality_features;
  int label = 0;
};

struct LearnResult {
  ExpertEnsemble ensemble;              // final weights
  std::vector<int> online_predictions;  // the global prediction made at each step
  std::vector<Eigen::VectorXd> weight_trajectory;  // weights after each step
};

// Weight learning pass: per sample, each expert predicts; a wrong prediction
// multiplies that expert's weight by beta before the weight is added to the
// predicted class's bin. Returns the updated ensemble together with the
// online (during-learning) global predictions.
LearnResult learn_weights(const ExpertEnsemble& ensemble,
                          const std::vector<FusionSample>& stream);

// Frozen-weight voting: weights are not updated.
FusionPrediction fuse_predict(const ExpertEnsemble& ensemble,
                              const std::vector<Eigen::VectorXd>& per_modality_features);

// ---------------------------------------------------------------------------
// Occupancy fusion experiment on a trace.

struct FusionConfig {
  double window_s = 5.0;       // shared fusion step; also the ZCR window
  int folds = 5;
  double beta = 0.5;
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  double svr_epsilon = 0.1;
  SvrGrid grid;
  bool online_eval = false;    // evaluate the online learner instead of frozen weights
};

struct SegmentAccuracy {
  double occupied = 0.0;
  double unoccupied = 0.0;
  double overall = 0.0;
  int occupied_count = 0;
  int unoccupied_count = 0;
  int occupied_correct = 0;
  int unoccupied_correct = 0;
};

struct ModalityReport {
  std::string modality;
  SegmentAccuracy accuracy;
  double svr_c = 0.0;
  double svr_gamma = 0.0;
};

struct FusionReport {
  std::vector<ModalityReport> singles;  // accel_z, audio_zcr
  SegmentAccuracy fused;
  Eigen::VectorXd learned_weights;
  SvrModel accel_model;  // final per-modality models, for serialization
  SvrModel audio_model;
  int train_windows = 0;
  int test_windows = 0;
};

// Windows the trace at window_s, splits windows into a stratified learn/test
// partition, learns per-modality SVRs and ensemble weights on k-fold
// validation predictions, then scores singles and the fused vote on the test
// windows. Audio features are fed to the SVR as crossing fractions
// (count / samples-per-window) so the RBF grid sees O(1) inputs.
FusionReport run_fusion_experiment(const OccupancyTrace& trace,
                                   const FusionConfig& config);

}  // namespace srcfuse
