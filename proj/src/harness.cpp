#include "srcfuse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "srcfuse/dataset.hpp"
#include "srcfuse/dictionary.hpp"
#include "srcfuse/errors.hpp"
#include "srcfuse/features.hpp"
#include "srcfuse/fusion.hpp"
#include "srcfuse/projection.hpp"
#include "srcfuse/rng.hpp"
#include "srcfuse/src_classifier.hpp"
#include "srcfuse/svr.hpp"

namespace srcfuse {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::har_engineered: return "har_engineered";
    case ExperimentKind::har_raw_axis: return "har_raw_axis";
    case ExperimentKind::occupancy_single_modality: return "occupancy_single_modality";
    case ExperimentKind::occupancy_fusion: return "occupancy_fusion";
    case ExperimentKind::projection_power_study: return "projection_power_study";
  }
  return "unknown";
}

std::optional<ExperimentKind> experiment_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::har_engineered, ExperimentKind::har_raw_axis,
                 ExperimentKind::occupancy_single_modality,
                 ExperimentKind::occupancy_fusion,
                 ExperimentKind::projection_power_study}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string token;
  for (char ch : value) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

double parse_double(const std::string& v, const std::string& key,
                    const std::string& origin) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw FormatError(origin + ": bad numeric value '" + v + "' for " + key);
  }
}

long parse_long(const std::string& v, const std::string& key,
                const std::string& origin) {
  try {
    std::size_t used = 0;
    const long d = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw FormatError(origin + ": bad integer value '" + v + "' for " + key);
  }
}

bool parse_bool(const std::string& v, const std::string& key,
                const std::string& origin) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw FormatError(origin + ": bad boolean value '" + v + "' for " + key);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  bool have_experiment = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw FormatError(origin + ":" + std::to_string(line_no) +
                          ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "classifier" && section != "occupancy") {
        throw FormatError(origin + ":" + std::to_string(line_no) +
                          ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(origin + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = origin + ":" + std::to_string(line_no);

    if (section.empty()) {
      if (key == "experiment") {
        const auto kind = experiment_from_string(value);
        if (!kind) throw FormatError(where + ": unknown experiment '" + value + "'");
        cfg.experiment = *kind;
        have_experiment = true;
      } else if (key == "dataset_path") {
        cfg.dataset_path = value;
      } else if (key == "retained_fractions") {
        cfg.retained_fractions.clear();
        for (const auto& v : split_list(value)) {
          cfg.retained_fractions.push_back(parse_double(v, key, where));
        }
      } else if (key == "methods") {
        cfg.methods = split_list(value);
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& v : split_list(value)) {
          cfg.seeds.push_back(static_cast<std::uint64_t>(parse_long(v, key, where)));
        }
      } else if (key == "folds") {
        cfg.folds = static_cast<int>(parse_long(value, key, where));
      } else if (key == "axis") {
        cfg.axis = value;
      } else {
        throw FormatError(where + ": unknown key '" + key + "'");
      }
    } else if (section == "classifier") {
      if (key == "solver_tol") cfg.solver_tol = parse_double(value, key, where);
      else if (key == "solver_max_iter") cfg.solver_max_iter = static_cast<int>(parse_long(value, key, where));
      else if (key == "normalize_after_projection") cfg.normalize_after_projection = parse_bool(value, key, where);
      else if (key == "subsample_per_class") cfg.subsample_per_class = static_cast<int>(parse_long(value, key, where));
      else if (key == "knn_k") cfg.knn_k = static_cast<int>(parse_long(value, key, where));
      else if (key == "svm_c") cfg.svm_c = parse_double(value, key, where);
      else if (key == "svm_gamma") cfg.svm_gamma = parse_double(value, key, where);
      else throw FormatError(where + ": unknown key '" + key + "' in [classifier]");
    } else {  // occupancy
      if (key == "audio_rate") cfg.audio_rate = parse_double(value, key, where);
      else if (key == "accel_rate") cfg.accel_rate = parse_double(value, key, where);
      else if (key == "audio_windows") {
        cfg.audio_windows.clear();
        for (const auto& v : split_list(value)) {
          cfg.audio_windows.push_back(parse_double(v, key, where));
        }
      } else if (key == "fusion_window_s") cfg.fusion_window_s = parse_double(value, key, where);
      else if (key == "block_seconds") {
        cfg.block_seconds.clear();
        for (const auto& v : split_list(value)) {
          cfg.block_seconds.push_back(parse_double(v, key, where));
        }
      } else if (key == "svr_epsilon") cfg.svr_epsilon = parse_double(value, key, where);
      else if (key == "train_fraction") cfg.train_fraction = parse_double(value, key, where);
      else if (key == "fusion_online") cfg.fusion_online = parse_bool(value, key, where);
      else throw FormatError(where + ": unknown key '" + key + "' in [occupancy]");
    }
  }
  if (!have_experiment) {
    throw FormatError(origin + ": missing required key 'experiment'");
  }
  return cfg;
}

ExperimentConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

void validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  const bool har = cfg.experiment == ExperimentKind::har_engineered ||
                   cfg.experiment == ExperimentKind::har_raw_axis ||
                   cfg.experiment == ExperimentKind::projection_power_study;
  if (har && cfg.dataset_path.empty()) {
    errors.push_back("dataset_path is required for this experiment");
  }
  if (cfg.seeds.empty()) errors.push_back("at least one seed is required");
  if (cfg.retained_fractions.empty() && har) {
    errors.push_back("retained_fractions must be non-empty");
  }
  for (double f : cfg.retained_fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      errors.push_back("retained fraction " + std::to_string(f) +
                       " outside (0, 1]");
    }
  }
  if (cfg.experiment == ExperimentKind::har_engineered ||
      cfg.experiment == ExperimentKind::har_raw_axis) {
    for (const auto& m : cfg.methods) {
      if (m != "src_svd_top" && m != "src_svd_random" && m != "src_gaussian" &&
          m != "svm" && m != "knn") {
        errors.push_back("unknown method '" + m + "'");
      }
    }
    if (cfg.methods.empty()) errors.push_back("methods must be non-empty");
  }
  if (cfg.experiment == ExperimentKind::har_raw_axis && cfg.axis != "x" &&
      cfg.axis != "y" && cfg.axis != "z") {
    errors.push_back("axis must be x, y or z");
  }
  if (cfg.folds < 0) errors.push_back("folds must be >= 0");
  if (cfg.folds == 1) errors.push_back("folds must be 0 (predefined split) or >= 2");
  if (cfg.solver_tol <= 0.0) errors.push_back("solver_tol must be positive");
  if (cfg.solver_max_iter < 1) errors.push_back("solver_max_iter must be >= 1");
  if (cfg.subsample_per_class < 0) errors.push_back("subsample_per_class must be >= 0");
  if (cfg.knn_k < 1) errors.push_back("knn_k must be >= 1");
  if (cfg.svm_c <= 0.0) errors.push_back("svm_c must be positive");
  if (cfg.svm_gamma < 0.0) errors.push_back("svm_gamma must be >= 0 (0 = 1/n)");
  if (cfg.experiment == ExperimentKind::occupancy_single_modality ||
      cfg.experiment == ExperimentKind::occupancy_fusion) {
    if (cfg.audio_rate <= 0.0) errors.push_back("audio_rate must be positive");
    if (cfg.accel_rate <= 0.0) errors.push_back("accel_rate must be positive");
    if (cfg.block_seconds.size() != 4) {
      errors.push_back("block_seconds needs 4 entries (typing, idle, quiet, vibration)");
    }
    for (double b : cfg.block_seconds) {
      if (b < 10.0) errors.push_back("each block must last at least 10 s");
    }
    if (cfg.audio_windows.empty() &&
        cfg.experiment == ExperimentKind::occupancy_single_modality) {
      errors.push_back("audio_windows must be non-empty");
    }
    for (double w : cfg.audio_windows) {
      if (w <= 0.0) errors.push_back("audio window must be positive");
    }
    if (cfg.fusion_window_s <= 0.0) errors.push_back("fusion_window_s must be positive");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
      errors.push_back("train_fraction must be inside (0, 1)");
    }
    if (cfg.svr_epsilon < 0.0) errors.push_back("svr_epsilon must be >= 0");
  }
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ParameterError(msg);
  }
}

std::string ResultRow::cell_key() const {
  std::ostringstream os;
  os << experiment << '|' << method << '|' << axis_or_modality << '|'
     << retained_fraction << '|' << window_s << '|' << seed << '|' << fold;
  return os.str();
}

namespace {

struct RowCollector {
  std::mutex mutex;
  std::vector<ResultRow> rows;
  const RunOptions* options;

  void push(ResultRow row) {
    std::lock_guard<std::mutex> lock(mutex);
    if (options && options->on_row) options->on_row(row);
    rows.push_back(std::move(row));
  }
};

bool cell_completed(const RunOptions& options, const std::string& key) {
  return std::find(options.completed_cells.begin(), options.completed_cells.end(),
                   key) != options.completed_cells.end();
}

void run_parallel(const std::vector<std::function<void()>>& tasks, int jobs) {
  if (jobs <= 1) {
    for (const auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        tasks[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Dataset subsample_per_class(const Dataset& ds, int per_class, std::uint64_t seed) {
  if (per_class <= 0) return ds;
  Dataset out = ds;
  out.samples.clear();
  Rng rng(seed ^ 0x5b5a17e57ull);
  for (int c = 0; c < ds.class_count; ++c) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      if (ds.samples[i].label == c) idx.push_back(static_cast<int>(i));
    }
    rng.shuffle(idx);
    const int take = std::min<int>(per_class, static_cast<int>(idx.size()));
    for (int i = 0; i < take; ++i) {
      out.samples.push_back(ds.samples[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);
    }
  }
  return out;
}

struct EvalOutcome {
  std::vector<std::vector<long>> confusion;
  double accuracy = 0.0;
  std::vector<double> per_class;
};

EvalOutcome tally(const std::vector<int>& truth, const std::vector<int>& predicted,
                  int classes) {
  EvalOutcome out;
  out.confusion.assign(static_cast<std::size_t>(classes),
                       std::vector<long>(static_cast<std::size_t>(classes), 0));
  long correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++out.confusion[static_cast<std::size_t>(truth[i])]
                   [static_cast<std::size_t>(predicted[i])];
    if (truth[i] == predicted[i]) ++correct;
  }
  out.accuracy = truth.empty() ? 0.0
                               : static_cast<double>(correct) /
                                     static_cast<double>(truth.size());
  for (int c = 0; c < classes; ++c) {
    long row_total = 0;
    for (long v : out.confusion[static_cast<std::size_t>(c)]) row_total += v;
    out.per_class.push_back(
        row_total ? static_cast<double>(out.confusion[static_cast<std::size_t>(c)]
                                                     [static_cast<std::size_t>(c)]) /
                        static_cast<double>(row_total)
                  : 0.0);
  }
  return out;
}

// One HAR sweep cell: build the projection, classify the evaluation set.
ResultRow run_har_cell(const ExperimentConfig& cfg, const Dataset& train_full,
                       const Dataset& eval, const std::string& method,
                       double fraction, std::uint64_t seed, int fold) {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset train = subsample_per_class(train_full, cfg.subsample_per_class, seed);
  const int n = train.dim;
  const int d = std::max(1, static_cast<int>(fraction * n));

  std::vector<int> truth;
  std::vector<int> predicted;
  truth.reserve(eval.samples.size());
  predicted.reserve(eval.samples.size());
  for (const auto& s : eval.samples) truth.push_back(s.label);

  if (method == "src_svd_top" || method == "src_svd_random" ||
      method == "src_gaussian") {
    const Dictionary dict = build_dictionary(train);
    ProjectionMatrix projection;
    if (method == "src_svd_top") {
      projection = svd_projection(dict, d, SvdSelection::top());
    } else if (method == "src_svd_random") {
      projection = svd_projection(dict, d, SvdSelection::random(seed));
    } else {
      projection = gaussian_projection(d, n, seed);
    }
    ClassifyOptions opts;
    opts.tol = cfg.solver_tol;
    opts.max_iter = cfg.solver_max_iter;
    opts.normalize_after_projection = cfg.normalize_after_projection;
    const SrcEngine engine(dict, projection, opts);
    for (const auto& s : eval.samples) {
      predicted.push_back(engine.classify(s.features).predicted_class);
    }
  } else {
    // Baselines see the strongest projection (top singular vectors) at the
    // same retained fraction.
    const Dictionary dict = build_dictionary(train);
    const ProjectionMatrix projection = svd_projection(dict, d, SvdSelection::top());
    Dataset projected_train = train;
    projected_train.dim = d;
    for (auto& s : projected_train.samples) {
      s.features = (projection.r * s.features).eval();
    }
    if (method == "knn") {
      for (const auto& s : eval.samples) {
        predicted.push_back(
            knn_classify(projected_train, projection.r * s.features, cfg.knn_k));
      }
    } else {  // svm
      double gamma = cfg.svm_gamma;
      if (gamma <= 0.0) {
        // scale-aware auto width: 1 / (d * mean per-coordinate variance);
        // a plain 1/d collapses the kernel on unit-scale projected features
        double mean = 0.0, sq = 0.0;
        long count = 0;
        for (const auto& s : projected_train.samples) {
          mean += s.features.sum();
          sq += s.features.squaredNorm();
          count += s.features.size();
        }
        mean /= static_cast<double>(count);
        const double variance =
            std::max(sq / static_cast<double>(count) - mean * mean, 1e-12);
        gamma = 1.0 / (d * variance);
      }
      const SvmModel model = svm_train(projected_train, cfg.svm_c, gamma);
      for (const auto& s : eval.samples) {
        predicted.push_back(svm_classify(model, projection.r * s.features));
      }
    }
  }

  const EvalOutcome outcome = tally(truth, predicted, train.class_count);
  ResultRow row;
  row.experiment = to_string(cfg.experiment);
  row.method = method;
  row.axis_or_modality =
      cfg.experiment == ExperimentKind::har_raw_axis ? cfg.axis : "engineered";
  row.retained_fraction = fraction;
  row.seed = seed;
  row.fold = fold;
  row.metric_name = "accuracy";
  row.metric_value = outcome.accuracy;
  row.accuracy = outcome.accuracy;
  row.per_class_accuracy = outcome.per_class;
  row.confusion = outcome.confusion;
  row.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  return row;
}

OccupancyTrace subject_trace(const ExperimentConfig& cfg, std::uint64_t seed) {
  SynthParams params;
  params.audio_rate = cfg.audio_rate;
  params.accel_rate = cfg.accel_rate;
  return synth_subject_trace(
      seed,
      {cfg.block_seconds[0], cfg.block_seconds[1], cfg.block_seconds[2],
       cfg.block_seconds[3]},
      params);
}

std::vector<ResultRow> run_occupancy_single(const ExperimentConfig& cfg,
                                            const RunOptions& options,
                                            RowCollector& collector) {
  std::vector<std::function<void()>> tasks;
  for (std::uint64_t seed : cfg.seeds) {
    struct ModalityPlan {
      std::string name;
      double window;
    };
    std::vector<ModalityPlan> plans;
    for (const char* axis : {"accel_x", "accel_y", "accel_z"}) {
      plans.push_back({axis, 1.0});
    }
    for (double w : cfg.audio_windows) plans.push_back({"audio_zcr", w});

    for (const auto& plan : plans) {
      ResultRow probe;
      probe.experiment = to_string(cfg.experiment);
      probe.method = "svr";
      probe.axis_or_modality = plan.name;
      probe.window_s = plan.window;
      probe.seed = seed;
      probe.fold = -1;
      if (cell_completed(options, probe.cell_key())) continue;
      tasks.push_back([&cfg, &collector, seed, plan] {
        const auto t0 = std::chrono::steady_clock::now();
        const OccupancyTrace trace = subject_trace(cfg, seed);

        Eigen::VectorXd values;
        if (plan.name == "audio_zcr") {
          values = audio_zero_crossings(trace.audio, trace.audio_rate, plan.window)
                       .values /
                   (trace.audio_rate * plan.window);
        } else {
          const Eigen::VectorXd& channel = plan.name == "accel_x" ? trace.accel_x
                                           : plan.name == "accel_y"
                                               ? trace.accel_y
                                               : trace.accel_z;
          const Modality modality = plan.name == "accel_x"   ? Modality::accel_x
                                    : plan.name == "accel_y" ? Modality::accel_y
                                                             : Modality::accel_z;
          values = accel_max_magnitude(channel, trace.accel_rate, plan.window,
                                       modality)
                       .values;
        }
        const long windows = values.size();
        Eigen::MatrixXd xs(windows, 1);
        xs.col(0) = values;
        Eigen::VectorXd ys(windows);
        std::vector<int> labels(static_cast<std::size_t>(windows));
        for (long w = 0; w < windows; ++w) {
          const auto begin = static_cast<std::size_t>(std::floor(w * plan.window));
          const auto end = std::min(
              trace.labels.size(),
              static_cast<std::size_t>(std::floor((w + 1) * plan.window)));
          double occ = 0.0;
          for (std::size_t s = begin; s < end; ++s) occ += trace.labels[s];
          const int label = occ * 2.0 >= static_cast<double>(end - begin) ? 1 : 0;
          ys(w) = label;
          labels[static_cast<std::size_t>(w)] = label;
        }

        const SvrGridChoice choice =
            svr_grid_search(xs, ys, SvrGrid{}, 5, seed + 17, cfg.svr_epsilon);

        // 5-fold cross-validated prediction with the chosen parameters
        Dataset fold_ds;
        fold_ds.dim = 1;
        fold_ds.class_count = 2;
        fold_ds.class_names = {"unoccupied", "occupied"};
        for (long w = 0; w < windows; ++w) {
          LabeledSample s;
          s.features = Eigen::VectorXd::Constant(1, 0.0);
          s.label = labels[static_cast<std::size_t>(w)];
          fold_ds.samples.push_back(std::move(s));
        }
        const auto folds = stratified_folds(fold_ds, 5, seed + 23);
        std::vector<int> truth, predicted;
        for (const auto& fold : folds) {
          Eigen::MatrixXd xt(fold.train_indices.size(), 1);
          Eigen::VectorXd yt(fold.train_indices.size());
          for (std::size_t i = 0; i < fold.train_indices.size(); ++i) {
            xt(static_cast<long>(i), 0) = xs(fold.train_indices[i], 0);
            yt(static_cast<long>(i)) = ys(fold.train_indices[i]);
          }
          const SvrModel model =
              svr_train(xt, yt, choice.c, choice.gamma, cfg.svr_epsilon);
          for (int i : fold.validation_indices) {
            truth.push_back(labels[static_cast<std::size_t>(i)]);
            predicted.push_back(
                svr_predict_class(model, xs.row(i).transpose()));
          }
        }
        const EvalOutcome outcome = tally(truth, predicted, 2);
        ResultRow row;
        row.experiment = to_string(cfg.experiment);
        row.method = "svr";
        row.axis_or_modality = plan.name;
        row.window_s = plan.window;
        row.seed = seed;
        row.fold = -1;
        row.metric_name = "accuracy";
        row.metric_value = outcome.accuracy;
        row.accuracy = outcome.accuracy;
        row.per_class_accuracy = outcome.per_class;
        row.confusion = outcome.confusion;
        row.svr_c = choice.c;
        row.svr_gamma = choice.gamma;
        row.wall_time_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        collector.push(std::move(row));
      });
    }
  }
  run_parallel(tasks, options.jobs);
  return {};
}

std::vector<ResultRow> run_occupancy_fusion(const ExperimentConfig& cfg,
                                            const RunOptions& options,
                                            RowCollector& collector) {
  std::vector<std::function<void()>> tasks;
  for (std::uint64_t seed : cfg.seeds) {
    ResultRow probe;
    probe.experiment = to_string(cfg.experiment);
    probe.method = cfg.fusion_online ? "fusion_online" : "fusion";
    probe.axis_or_modality = "fused";
    probe.window_s = cfg.fusion_window_s;
    probe.seed = seed;
    probe.fold = -1;
    if (cell_completed(options, probe.cell_key())) continue;
    tasks.push_back([&cfg, &options, &collector, seed] {
      const auto t0 = std::chrono::steady_clock::now();
      const OccupancyTrace trace = subject_trace(cfg, seed);
      FusionConfig fusion_cfg;
      fusion_cfg.window_s = cfg.fusion_window_s;
      fusion_cfg.beta = 0.5;
      fusion_cfg.seed = seed;
      fusion_cfg.svr_epsilon = cfg.svr_epsilon;
      fusion_cfg.train_fraction = cfg.train_fraction;
      fusion_cfg.online_eval = cfg.fusion_online;
      const FusionReport report = run_fusion_experiment(trace, fusion_cfg);
      const double wall = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();

      const auto push_row = [&](const std::string& modality,
                                const SegmentAccuracy& acc, double svr_c,
                                double svr_gamma) {
        ResultRow row;
        row.experiment = to_string(cfg.experiment);
        row.method = cfg.fusion_online ? "fusion_online" : "fusion";
        row.axis_or_modality = modality;
        row.window_s = cfg.fusion_window_s;
        row.seed = seed;
        row.fold = -1;
        row.metric_name = "accuracy";
        row.metric_value = acc.overall;
        row.accuracy = acc.overall;
        row.per_class_accuracy = {acc.unoccupied, acc.occupied};
        row.confusion = {
            {acc.unoccupied_correct,
             acc.unoccupied_count - acc.unoccupied_correct},
            {acc.occupied_count - acc.occupied_correct, acc.occupied_correct}};
        row.svr_c = svr_c;
        row.svr_gamma = svr_gamma;
        row.wall_time_ms = wall;
        collector.push(std::move(row));
      };
      for (const auto& single : report.singles) {
        push_row(single.modality, single.accuracy, single.svr_c, single.svr_gamma);
      }
      push_row("fused", report.fused, 0.0, 0.0);

      // learned weights and the per-modality models, for reproducible reruns
      if (!options.out_dir.empty()) {
        const fs::path subject_dir =
            options.out_dir / ("fusion_subject_" + std::to_string(seed));
        std::error_code ec;
        fs::create_directories(subject_dir, ec);
        save_svr(report.accel_model, subject_dir / "accel_z_svr.txt");
        save_svr(report.audio_model, subject_dir / "audio_zcr_svr.txt");
        json weights;
        weights["beta"] = 0.5;
        weights["modalities"] = {"accel_z", "audio_zcr"};
        weights["weights"] = {report.learned_weights(0), report.learned_weights(1)};
        weights["svr"] = {
            {"accel_z", {{"c", report.singles[0].svr_c}, {"gamma", report.singles[0].svr_gamma}}},
            {"audio_zcr", {{"c", report.singles[1].svr_c}, {"gamma", report.singles[1].svr_gamma}}}};
        weights["train_windows"] = report.train_windows;
        weights["test_windows"] = report.test_windows;
        std::ofstream out(subject_dir / "weights.json");
        if (!out) throw IoError("cannot write " + (subject_dir / "weights.json").string());
        out << weights.dump(2) << '\n';
      }
    });
  }
  run_parallel(tasks, options.jobs);
  return {};
}

std::vector<ResultRow> run_power_study(const ExperimentConfig& cfg,
                                       const RunOptions& options,
                                       RowCollector& collector) {
  auto [train, test] = load_uci_har(cfg.dataset_path, HarVariant::engineered561);
  (void)test;
  const Dataset train_small =
      subsample_per_class(train, cfg.subsample_per_class, cfg.seeds.front());
  const Dictionary dict = build_dictionary(train_small);

  std::vector<std::function<void()>> tasks;
  for (double fraction : cfg.retained_fractions) {
    const int d = std::max(1, static_cast<int>(fraction * dict.dim()));
    for (std::uint64_t seed : cfg.seeds) {
      for (const std::string method :
           {"svd_top_singular", "svd_random_columns", "gaussian"}) {
        ResultRow probe;
        probe.experiment = to_string(cfg.experiment);
        probe.method = method;
        probe.axis_or_modality = "engineered";
        probe.retained_fraction = fraction;
        probe.seed = seed;
        probe.fold = -1;
        if (cell_completed(options, probe.cell_key())) continue;
        tasks.push_back([&cfg, &collector, &dict, method, fraction, d, seed] {
          const auto t0 = std::chrono::steady_clock::now();
          ProjectionMatrix projection;
          if (method == "svd_top_singular") {
            projection = svd_projection(dict, d, SvdSelection::top());
          } else if (method == "svd_random_columns") {
            projection = svd_projection(dict, d, SvdSelection::random(seed));
          } else {
            projection = gaussian_projection(d, dict.dim(), seed);
          }
          ResultRow row;
          row.experiment = to_string(cfg.experiment);
          row.method = method;
          row.axis_or_modality = "engineered";
          row.retained_fraction = fraction;
          row.seed = seed;
          row.fold = -1;
          row.metric_name = "signal_power";
          row.metric_value = signal_power(projection, dict);
          row.accuracy = 0.0;
          row.wall_time_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
          collector.push(std::move(row));
        });
      }
    }
  }
  run_parallel(tasks, options.jobs);
  return {};
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                      const RunOptions& options) {
  validate_config(cfg);
  RowCollector collector;
  collector.options = &options;

  if (cfg.experiment == ExperimentKind::har_engineered ||
      cfg.experiment == ExperimentKind::har_raw_axis) {
    const HarVariant variant =
        cfg.experiment == ExperimentKind::har_engineered
            ? HarVariant::engineered561
            : (cfg.axis == "x" ? HarVariant::raw_x
                               : cfg.axis == "y" ? HarVariant::raw_y
                                                 : HarVariant::raw_z);
    auto [train, test] = load_uci_har(cfg.dataset_path, variant);

    std::vector<std::function<void()>> tasks;
    Dataset pooled;              // CV mode only; must outlive the tasks
    std::vector<Fold> shared_folds;
    if (cfg.folds == 0) {
      for (const auto& method : cfg.methods) {
        for (double fraction : cfg.retained_fractions) {
          for (std::uint64_t seed : cfg.seeds) {
            ResultRow probe;
            probe.experiment = to_string(cfg.experiment);
            probe.method = method;
            probe.axis_or_modality =
                cfg.experiment == ExperimentKind::har_raw_axis ? cfg.axis
                                                               : "engineered";
            probe.retained_fraction = fraction;
            probe.seed = seed;
            probe.fold = -1;
            if (cell_completed(options, probe.cell_key())) continue;
            tasks.push_back([&cfg, &collector, &train, &test, method, fraction,
                             seed] {
              collector.push(
                  run_har_cell(cfg, train, test, method, fraction, seed, -1));
            });
          }
        }
      }
    } else {
      // pooled cross-validation over both published splits
      pooled = train;
      pooled.samples.insert(pooled.samples.end(), test.samples.begin(),
                            test.samples.end());
      shared_folds = stratified_folds(pooled, cfg.folds, cfg.seeds.front());
      for (const auto& method : cfg.methods) {
        for (double fraction : cfg.retained_fractions) {
          for (std::uint64_t seed : cfg.seeds) {
            for (int f = 0; f < cfg.folds; ++f) {
              ResultRow probe;
              probe.experiment = to_string(cfg.experiment);
              probe.method = method;
              probe.axis_or_modality =
                  cfg.experiment == ExperimentKind::har_raw_axis ? cfg.axis
                                                                 : "engineered";
              probe.retained_fraction = fraction;
              probe.seed = seed;
              probe.fold = f;
              if (cell_completed(options, probe.cell_key())) continue;
              tasks.push_back([&cfg, &collector, &pooled, &shared_folds, method,
                               fraction, seed, f] {
                const auto& fold = shared_folds[static_cast<std::size_t>(f)];
                Dataset fold_train = pooled;
                Dataset fold_test = pooled;
                fold_train.samples.clear();
                fold_test.samples.clear();
                for (int i : fold.train_indices) {
                  fold_train.samples.push_back(
                      pooled.samples[static_cast<std::size_t>(i)]);
                }
                for (int i : fold.validation_indices) {
                  fold_test.samples.push_back(
                      pooled.samples[static_cast<std::size_t>(i)]);
                }
                collector.push(run_har_cell(cfg, fold_train, fold_test, method,
                                            fraction, seed, f));
              });
            }
          }
        }
      }
    }
    run_parallel(tasks, options.jobs);
  } else if (cfg.experiment == ExperimentKind::occupancy_single_modality) {
    run_occupancy_single(cfg, options, collector);
  } else if (cfg.experiment == ExperimentKind::occupancy_fusion) {
    run_occupancy_fusion(cfg, options, collector);
  } else {
    run_power_study(cfg, options, collector);
  }

  // deterministic row order regardless of scheduling
  std::sort(collector.rows.begin(), collector.rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              return a.cell_key() < b.cell_key();
            });
  return std::move(collector.rows);
}

namespace {

std::string join_semicolon(const std::vector<double>& values) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ';';
    os << values[i];
  }
  return os.str();
}

std::string flatten_confusion(const std::vector<std::vector<long>>& confusion) {
  std::ostringstream os;
  for (std::size_t i = 0; i < confusion.size(); ++i) {
    for (std::size_t j = 0; j < confusion[i].size(); ++j) {
      if (i || j) os << ';';
      os << confusion[i][j];
    }
  }
  return os.str();
}

}  // namespace

std::string result_csv_header() {
  return "experiment,method,axis_or_modality,retained_fraction,window_s,seed,"
         "fold,metric_name,metric_value,accuracy,per_class_accuracy,confusion,"
         "svr_c,svr_gamma,wall_time_ms";
}

std::string result_csv_line(const ResultRow& row) {
  std::ostringstream os;
  os.precision(17);
  os << row.experiment << ',' << row.method << ',' << row.axis_or_modality
     << ',' << row.retained_fraction << ',' << row.window_s << ',' << row.seed
     << ',' << row.fold << ',' << row.metric_name << ',' << row.metric_value
     << ',' << row.accuracy << ',' << join_semicolon(row.per_class_accuracy)
     << ',' << flatten_confusion(row.confusion) << ',' << row.svr_c << ','
     << row.svr_gamma << ',' << row.wall_time_ms;
  return os.str();
}

ResultRow parse_result_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string token;
  std::stringstream ss(line);
  while (std::getline(ss, token, ',')) cells.push_back(token);
  if (cells.size() != 15) {
    throw FormatError("bad results row: expected 15 columns, got " +
                      std::to_string(cells.size()));
  }
  ResultRow row;
  row.experiment = cells[0];
  row.method = cells[1];
  row.axis_or_modality = cells[2];
  row.retained_fraction = std::stod(cells[3]);
  row.window_s = std::stod(cells[4]);
  row.seed = std::stoull(cells[5]);
  row.fold = std::stoi(cells[6]);
  row.metric_name = cells[7];
  row.metric_value = std::stod(cells[8]);
  row.accuracy = std::stod(cells[9]);
  if (!cells[10].empty()) {
    std::stringstream ps(cells[10]);
    while (std::getline(ps, token, ';')) row.per_class_accuracy.push_back(std::stod(token));
  }
  if (!cells[11].empty()) {
    std::vector<long> flat;
    std::stringstream cs(cells[11]);
    while (std::getline(cs, token, ';')) flat.push_back(std::stol(token));
    const auto k = static_cast<std::size_t>(std::llround(std::sqrt(
        static_cast<double>(flat.size()))));
    if (k * k != flat.size()) throw FormatError("confusion matrix is not square");
    row.confusion.assign(k, std::vector<long>(k, 0));
    for (std::size_t i = 0; i < flat.size(); ++i) row.confusion[i / k][i % k] = flat[i];
  }
  row.svr_c = std::stod(cells[12]);
  row.svr_gamma = std::stod(cells[13]);
  row.wall_time_ms = std::stod(cells[14]);
  return row;
}

std::vector<std::string> load_completed_cells(const fs::path& partial_csv) {
  std::vector<std::string> keys;
  std::ifstream in(partial_csv);
  if (!in) return keys;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      keys.push_back(parse_result_csv_line(line).cell_key());
    } catch (const Error&) {
      break;  // truncated tail from an interrupted run; recompute from here
    }
  }
  return keys;
}

void emit_results(const std::vector<ResultRow>& rows,
                  const ExperimentConfig& cfg, ResultFormat format,
                  const fs::path& out_dir) {
  if (rows.empty()) throw ParameterError("emit_results: no rows");
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  const auto open_out = [&](const std::string& name) {
    std::ofstream out(out_dir / name);
    if (!out) throw IoError("cannot write " + (out_dir / name).string());
    return out;
  };

  if (format == ResultFormat::csv) {
    auto out = open_out("results.csv");
    out << result_csv_header() << '\n';
    for (const auto& row : rows) out << result_csv_line(row) << '\n';
    if (!out) throw IoError("failed writing results.csv");
  } else {
    json arr = json::array();
    for (const auto& row : rows) {
      arr.push_back({{"experiment", row.experiment},
                     {"method", row.method},
                     {"axis_or_modality", row.axis_or_modality},
                     {"retained_fraction", row.retained_fraction},
                     {"window_s", row.window_s},
                     {"seed", row.seed},
                     {"fold", row.fold},
                     {"metric_name", row.metric_name},
                     {"metric_value", row.metric_value},
                     {"accuracy", row.accuracy},
                     {"per_class_accuracy", row.per_class_accuracy},
                     {"confusion", row.confusion},
                     {"svr_c", row.svr_c},
                     {"svr_gamma", row.svr_gamma},
                     {"wall_time_ms", row.wall_time_ms}});
    }
    auto out = open_out("results.json");
    out << arr.dump(2) << '\n';
    if (!out) throw IoError("failed writing results.json");
  }

  // metadata: config echo + resolved versions, no timestamps so emission is
  // deterministic
  {
    json meta;
    meta["experiment"] = to_string(cfg.experiment);
    meta["dataset_path"] = cfg.dataset_path.string();
    meta["retained_fractions"] = cfg.retained_fractions;
    meta["methods"] = cfg.methods;
    meta["seeds"] = cfg.seeds;
    meta["folds"] = cfg.folds;
    meta["axis"] = cfg.axis;
    meta["classifier"] = {{"solver_tol", cfg.solver_tol},
                          {"solver_max_iter", cfg.solver_max_iter},
                          {"normalize_after_projection", cfg.normalize_after_projection},
                          {"subsample_per_class", cfg.subsample_per_class},
                          {"knn_k", cfg.knn_k},
                          {"svm_c", cfg.svm_c},
                          {"svm_gamma", cfg.svm_gamma}};
    meta["occupancy"] = {{"audio_rate", cfg.audio_rate},
                         {"accel_rate", cfg.accel_rate},
                         {"audio_windows", cfg.audio_windows},
                         {"fusion_window_s", cfg.fusion_window_s},
                         {"block_seconds", cfg.block_seconds},
                         {"svr_epsilon", cfg.svr_epsilon},
                         {"train_fraction", cfg.train_fraction},
                         {"fusion_online", cfg.fusion_online}};
    meta["versions"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"row_schema", 1}};
    auto out = open_out("metadata.json");
    out << meta.dump(2) << '\n';
  }

  // summary: mean and standard error of the mean across seeds (and folds)
  {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& row : rows) {
      std::ostringstream key;
      key.precision(17);
      key << row.experiment << ',' << row.method << ',' << row.axis_or_modality
          << ',' << row.retained_fraction << ',' << row.window_s << ','
          << row.metric_name;
      groups[key.str()].push_back(row.metric_value);
    }
    auto out = open_out("summary.csv");
    out << "experiment,method,axis_or_modality,retained_fraction,window_s,"
           "metric_name,n,mean,sem\n";
    out.precision(17);
    for (const auto& [key, values] : groups) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      const double sem =
          values.size() > 1
              ? std::sqrt(var / static_cast<double>(values.size() - 1)) /
                    std::sqrt(static_cast<double>(values.size()))
              : 0.0;
      out << key << ',' << values.size() << ',' << mean << ',' << sem << '\n';
    }
  }
}

}  // namespace srcfuse
