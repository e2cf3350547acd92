#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace srcfuse {

enum class ExperimentKind {
  har_engineered,
  har_raw_axis,
  occupancy_single_modality,
  occupancy_fusion,
  projection_power_study,
};

const char* to_string(ExperimentKind k);
std::optional<ExperimentKind> experiment_from_string(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::har_engineered;
  std::filesystem::path dataset_path;
  std::vector<double> retained_fractions{0.05, 0.10, 0.15, 0.20};
  std::vector<std::string> methods{"src_svd_top", "src_gaussian"};
  std::vector<std::uint64_t> seeds{1};
  int folds = 0;          // 0 = the dataset's predefined split
  std::string axis = "x"; // har_raw_axis only: x, y or z

  // classifier section
  double solver_tol = 1e-4;
  int solver_max_iter = 10000;
  bool normalize_after_projection = true;
  int subsample_per_class = 0;  // 0 = use every training sample
  int knn_k = 5;
  double svm_c = 1.0;
  double svm_gamma = 0.0;  // 0 = 1/n

  // occupancy section
  double audio_rate = 16000.0;
  double accel_rate = 50.0;
  std::vector<double> audio_windows{5.0, 10.0, 15.0};
  double fusion_window_s = 5.0;
  std::vector<double> block_seconds{80.0, 160.0, 80.0, 80.0};  // typing, idle, quiet, vibration
  double svr_epsilon = 0.1;
  double train_fraction = 0.5;
  bool fusion_online = false;
};

// Parses the declarative key-value config format (docs/config-format.md):
// `key = value` lines, `[section]` headers, '#' comments, lists separated by
// spaces or commas.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin);

// Throws ParameterError describing every invalid field.
void validate_config(const ExperimentConfig& cfg);

struct ResultRow {
  std::string experiment;
  std::string method;
  std::string axis_or_modality;
  double retained_fraction = 0.0;  // 0 when not applicable
  double window_s = 0.0;           // 0 when not applicable
  std::uint64_t seed = 0;
  int fold = -1;                   // -1 = predefined split / not applicable
  std::string metric_name = "accuracy";
  double metric_value = 0.0;
  double accuracy = 0.0;           // = metric_value for classification rows
  std::vector<double> per_class_accuracy;
  std::vector<std::vector<long>> confusion;  // row = truth, col = predicted
  double svr_c = 0.0;      // resolved grid-search choice, 0 when not applicable
  double svr_gamma = 0.0;
  double wall_time_ms = 0.0;

  std::string cell_key() const;  // identity of the sweep cell, for resume
};

struct RunOptions {
  std::filesystem::path out_dir;
  int jobs = 1;
  std::function<void(const ResultRow&)> on_row;  // called as each row lands
  // rows whose cell_key is listed here are skipped (resume support)
  std::vector<std::string> completed_cells;
};

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                      const RunOptions& options = {});

enum class ResultFormat { csv, json };

// Writes results.csv / results.json plus metadata.json and summary.csv
// (mean and standard error of the mean across seeds per cell group).
// Deterministic: identical rows produce byte-identical files.
void emit_results(const std::vector<ResultRow>& rows,
                  const ExperimentConfig& cfg, ResultFormat format,
                  const std::filesystem::path& out_dir);

// Reads the cell keys already present in the incremental partial file.
std::vector<std::string> load_completed_cells(const std::filesystem::path& partial_csv);

std::string result_csv_header();
std::string result_csv_line(const ResultRow& row);
ResultRow parse_result_csv_line(const std::string& line);

}  // namespace srcfuse
