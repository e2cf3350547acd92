// Acceptance gate: runs every advertised guarantee end to end and prints one
// PASS/FAIL/SKIP line per criterion. HAR-dataset criteria run only when the
// dataset directory is present (--har-dir, SRCFUSE_HAR_DIR, or
// ./data/UCI HAR Dataset); --require-har turns those skips into failures.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srcfuse/dataset.hpp"
#include "srcfuse/dictionary.hpp"
#include "srcfuse/errors.hpp"
#include "srcfuse/features.hpp"
#include "srcfuse/fusion.hpp"
#include "srcfuse/harness.hpp"
#include "srcfuse/projection.hpp"
#include "srcfuse/rng.hpp"
#include "srcfuse/sparse_solver.hpp"
#include "srcfuse/src_classifier.hpp"
#include "srcfuse/svr.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace srcfuse;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

Outcome fail(std::string detail) { return {Status::fail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Status::skip, std::move(detail)}; }

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& label) {
    if (!condition) {
      ok = false;
      detail << (detail.tellp() > 0 ? "; " : "") << "FAILED: " << label;
    }
  }
  void note(const std::string& text) {
    detail << (detail.tellp() > 0 ? "; " : "") << text;
  }
  Outcome outcome() const {
    return {ok ? Status::pass : Status::fail, detail.str()};
  }
};

MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

MatrixXd random_orthonormal_rows(int d, int n, Rng& rng) {
  MatrixXd g = random_matrix(n, d, rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, d);
  return q.transpose();
}

std::vector<int> support_of(const VectorXd& x, double rel = 1e-4) {
  std::vector<int> s;
  if (x.size() == 0) return s;
  const double cut = rel * x.cwiseAbs().maxCoeff();
  for (int i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) > cut) s.push_back(i);
  return s;
}

double sequential_sum(const VectorXd& v) {
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) acc += v(i);
  return acc;
}

// ---------------------------------------------------------------------------
// HAR dataset discovery

std::optional<fs::path> find_har_dir(const std::string& cli_dir) {
  std::vector<fs::path> candidates;
  if (!cli_dir.empty()) candidates.emplace_back(cli_dir);
  if (const char* env = std::getenv("SRCFUSE_HAR_DIR")) candidates.emplace_back(env);
  candidates.emplace_back("data/UCI HAR Dataset");
  candidates.emplace_back("data/UCI_HAR_Dataset");
  candidates.emplace_back("../data/UCI HAR Dataset");
  for (const auto& c : candidates) {
    if (fs::exists(c / "train" / "X_train.txt")) return c;
  }
  return std::nullopt;
}

ExperimentConfig har_config(const fs::path& dir) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::har_engineered;
  cfg.dataset_path = dir;
  cfg.solver_tol = 1e-4;
  // 150 atoms per class keeps the gate inside the desk-scale runtime target;
  // the accuracy threshold for the subsampled dictionary is 0.88.
  cfg.subsample_per_class = 150;
  return cfg;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome c1_har_engineered(const std::optional<fs::path>& har) {
  if (!har) return skip("UCI HAR dataset not found; see --har-dir");
  ExperimentConfig cfg = har_config(*har);
  cfg.methods = {"src_svd_top"};
  cfg.retained_fractions = {0.15, 0.20};
  cfg.seeds = {1};
  RunOptions options;
  options.jobs = 2;
  const auto rows = run_experiment(cfg, options);
  double best = 0.0;
  for (const auto& row : rows) best = std::max(best, row.accuracy);
  Check check;
  check.note("best accuracy at 15-20% retained = " + std::to_string(best) +
             " (subsampled dictionary of 150 atoms/class, threshold 0.88)");
  check.require(best >= 0.88, "accuracy >= 0.88");
  return check.outcome();
}

Outcome c2_ordering_at_5pct(const std::optional<fs::path>& har) {
  if (!har) return skip("UCI HAR dataset not found; see --har-dir");
  ExperimentConfig cfg = har_config(*har);
  cfg.methods = {"src_svd_top", "src_gaussian"};
  cfg.retained_fractions = {0.05};
  cfg.seeds = {1, 2, 3, 4, 5};
  RunOptions options;
  options.jobs = 2;
  const auto rows = run_experiment(cfg, options);
  double sum_top = 0.0, sum_gauss = 0.0;
  int n_top = 0, n_gauss = 0;
  for (const auto& row : rows) {
    if (row.method == "src_svd_top") {
      sum_top += row.accuracy;
      ++n_top;
    } else {
      sum_gauss += row.accuracy;
      ++n_gauss;
    }
  }
  const double mean_top = sum_top / n_top;
  const double mean_gauss = sum_gauss / n_gauss;
  Check check;
  check.note("mean over 5 seeds at 5%: svd_top = " + std::to_string(mean_top) +
             ", gaussian = " + std::to_string(mean_gauss));
  check.require(mean_top >= mean_gauss, "svd_top mean >= gaussian mean");
  return check.outcome();
}

Outcome c3_har_raw_axis(const std::optional<fs::path>& har) {
  if (!har) return skip("UCI HAR dataset not found; see --har-dir");
  double best = 0.0;
  std::string best_axis;
  for (const std::string axis : {"x", "y", "z"}) {
    ExperimentConfig cfg = har_config(*har);
    cfg.experiment = ExperimentKind::har_raw_axis;
    cfg.axis = axis;
    cfg.methods = {"src_svd_top"};
    cfg.retained_fractions = {0.35};
    cfg.seeds = {1};
    RunOptions options;
    options.jobs = 2;
    for (const auto& row : run_experiment(cfg, options)) {
      if (row.accuracy > best) {
        best = row.accuracy;
        best_axis = axis;
      }
    }
  }
  Check check;
  check.note("best raw-axis accuracy at 35% retained = " + std::to_string(best) +
             " (axis " + best_axis + ")");
  check.require(best >= 0.70, "accuracy >= 0.70");
  return check.outcome();
}

Outcome c4_projection_optimality(const std::optional<fs::path>& har) {
  Check check;
  // 20 random 50x200 dictionaries
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng(4000 + rep);
    MatrixXd raw = random_matrix(50, 200, rng);
    Dictionary dict;
    dict.matrix = raw;
    dict.column_norms.setOnes(200);
    dict.class_of_column.assign(200, 0);
    dict.class_count = 2;
    for (int j = 0; j < 200; ++j) {
      const double norm = raw.col(j).norm();
      dict.matrix.col(j) /= norm;
      dict.column_norms(j) = norm;
    }
    const int d = 10;
    const SvdFactors f = svd(raw);
    double top_sum = 0.0;
    for (int i = 0; i < d; ++i) top_sum += f.s(i) * f.s(i);
    const ProjectionMatrix top = svd_projection(dict, d, SvdSelection::top());
    const double top_power = signal_power(top, dict);
    if (std::abs(top_power - top_sum) > 1e-6 * top_sum) {
      check.require(false, "power identity on random dictionary " + std::to_string(rep));
      break;
    }
    for (int t = 0; t < 1000; ++t) {
      ProjectionMatrix p;
      p.r = random_orthonormal_rows(d, 50, rng);
      p.d = d;
      p.n = 50;
      if (signal_power(p, dict) > top_power + 1e-8 * top_power) {
        check.require(false, "random orthonormal matrix beat top on dictionary " +
                                 std::to_string(rep));
        break;
      }
    }
    if (!check.ok) break;
  }
  if (check.ok) check.note("20 random 50x200 dictionaries x 1000 orthonormal challengers ok");

  if (har) {
    auto [train, test] = load_uci_har(*har, HarVariant::engineered561);
    (void)test;
    Rng sub_rng(0);
    Dataset small = train;
    small.samples.clear();
    for (int c = 0; c < train.class_count; ++c) {
      int taken = 0;
      for (const auto& s : train.samples) {
        if (s.label == c && taken < 150) {
          small.samples.push_back(s);
          ++taken;
        }
      }
    }
    const Dictionary dict = build_dictionary(small);
    const SvdFactors f = svd(dict.raw_matrix());
    Rng rng(41);
    for (double fraction : {0.05, 0.10, 0.15, 0.20}) {
      const int d = std::max(1, static_cast<int>(fraction * dict.dim()));
      double top_sum = 0.0;
      for (int i = 0; i < d; ++i) top_sum += f.s(i) * f.s(i);
      const double top_power =
          signal_power(svd_projection(dict, d, SvdSelection::top()), dict);
      check.require(std::abs(top_power - top_sum) <= 1e-6 * top_sum,
                    "power identity on HAR dictionary at d=" + std::to_string(d));
      for (int t = 0; t < 1000; ++t) {
        ProjectionMatrix p;
        p.r = random_orthonormal_rows(d, dict.dim(), rng);
        p.d = d;
        p.n = dict.dim();
        if (signal_power(p, dict) > top_power + 1e-8 * top_power) {
          check.require(false, "random orthonormal matrix beat top on HAR at d=" +
                                   std::to_string(d));
          break;
        }
      }
    }
    if (check.ok) check.note("HAR dictionary checked at 5/10/15/20% retained");
  } else {
    check.note("HAR dictionary part skipped (dataset not found)");
  }
  return check.outcome();
}

Outcome c5_sparse_recovery() {
  int bp_hits = 0;
  int l2_failures = 0;
  int l1_certificates = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(5000 + trial);
    MatrixXd a = random_matrix(10, 30, rng);
    for (int j = 0; j < 30; ++j) a.col(j).normalize();
    VectorXd x_true = VectorXd::Zero(30);
    const auto idx = rng.sample_without_replacement(30, 2);
    for (int i : idx) x_true(i) = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const VectorXd y = a * x_true;
    const SparseSolution bp = basis_pursuit({a, y}, 1e-8, 20000);
    if (bp.converged && support_of(bp.coeffs) == idx) ++bp_hits;
    if (bp.converged && bp.coeffs.lpNorm<1>() <= x_true.lpNorm<1>() + 1e-7) {
      ++l1_certificates;
    }
    const SparseSolution l2 = min_l2_solution({a, y});
    if (support_of(l2.coeffs) != idx) ++l2_failures;
  }
  Check check;
  check.note("basis pursuit recovered " + std::to_string(bp_hits) +
             "/100 supports; min-l2 failed " + std::to_string(l2_failures) +
             "/100; l1-optimality certificates " +
             std::to_string(l1_certificates) + "/100");
  check.require(bp_hits >= 95, "basis pursuit support recovery >= 95/100");
  check.require(l2_failures >= 90, "min-l2 support failure >= 90/100");
  check.require(l1_certificates == 100, "every solution l1-optimal vs planted");
  return check.outcome();
}

Outcome c6_fusion_dominance() {
  Check check;
  std::ostringstream table;
  for (std::uint64_t subject : {1ull, 2ull, 3ull}) {
    const OccupancyTrace trace =
        synth_subject_trace(subject, {80.0, 160.0, 80.0, 80.0});
    FusionConfig cfg;
    cfg.window_s = 5.0;
    cfg.seed = subject;
    const FusionReport report = run_fusion_experiment(trace, cfg);
    double best_occ = 0.0, best_unocc = 0.0, best_overall = 0.0;
    for (const auto& single : report.singles) {
      best_occ = std::max(best_occ, single.accuracy.occupied);
      best_unocc = std::max(best_unocc, single.accuracy.unoccupied);
      best_overall = std::max(best_overall, single.accuracy.overall);
    }
    table << " s" << subject << ": fused occ=" << report.fused.occupied
          << " unocc=" << report.fused.unoccupied
          << " overall=" << report.fused.overall
          << " (best single overall=" << best_overall << ")";
    check.require(report.fused.occupied >= best_occ - 0.02,
                  "subject " + std::to_string(subject) +
                      " fused occupied within 0.02 of best single");
    check.require(report.fused.unoccupied >= best_unocc - 0.02,
                  "subject " + std::to_string(subject) +
                      " fused unoccupied within 0.02 of best single");
    check.require(report.fused.overall >= 0.95,
                  "subject " + std::to_string(subject) + " fused overall >= 0.95");
  }
  check.note(table.str());
  return check.outcome();
}

Outcome c7_hand_trace() {
  const std::vector<int> labels = {1, 0, 1, 1, 0, 1, 0, 0, 1, 0};
  const std::vector<int> a_pred = {1, 0, 0, 1, 0, 1, 1, 0, 1, 0};
  const std::vector<int> b_pred = {0, 0, 1, 1, 1, 1, 0, 1, 1, 1};
  const auto scripted = [](std::vector<int> script) {
    return [script = std::move(script)](const VectorXd& x) {
      return script.at(static_cast<std::size_t>(x(0)));
    };
  };
  ExpertEnsemble ensemble = make_ensemble(
      {{"A", scripted(a_pred)}, {"B", scripted(b_pred)}}, 0.5, 2);
  std::vector<FusionSample> stream;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    stream.push_back({{VectorXd::Constant(1, static_cast<double>(i)),
                       VectorXd::Constant(1, static_cast<double>(i))},
                      labels[i]});
  }
  const LearnResult result = learn_weights(ensemble, stream);
  const std::vector<double> a_expected = {1, 1, 0.5, 0.5, 0.5,
                                          0.5, 0.25, 0.25, 0.25, 0.25};
  const std::vector<double> b_expected = {0.5, 0.5, 0.5, 0.5, 0.25,
                                          0.25, 0.25, 0.125, 0.125, 0.0625};
  Check check;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check.require(result.weight_trajectory[i](0) == a_expected[i] &&
                      result.weight_trajectory[i](1) == b_expected[i],
                  "weights after sample " + std::to_string(i + 1) + " exact");
  }
  check.require(result.ensemble.weights(0) == 0.25 &&
                    result.ensemble.weights(1) == 0.0625,
                "final weights exactly (0.25, 0.0625)");
  if (check.ok) check.note("10-step trajectory matches the hand computation exactly");
  return check.outcome();
}

Outcome c8_svr_kkt() {
  Check check;
  int models_checked = 0;
  const auto verify = [&](const SvrModel& model, const MatrixXd& xs,
                          const VectorXd& ys, const std::string& tag) {
    ++models_checked;
    check.require(sequential_sum(model.dual_coeffs) == 0.0,
                  tag + ": sum of dual coefficients exactly 0");
    for (int i = 0; i < model.dual_coeffs.size(); ++i) {
      if (std::abs(model.dual_coeffs(i)) > model.c) {
        check.require(false, tag + ": |coef| <= C");
        break;
      }
    }
    for (int i = 0; i < model.dual_coeffs.size(); ++i) {
      const double beta = model.dual_coeffs(i);
      if (std::abs(beta) > 1e-6 * model.c && std::abs(beta) < model.c * (1.0 - 1e-6)) {
        for (int t = 0; t < xs.rows(); ++t) {
          if ((xs.row(t) - model.support_vectors.row(i)).norm() == 0.0) {
            const double pred = svr_predict(model, xs.row(t).transpose());
            if (std::abs(std::abs(pred - ys(t)) - model.epsilon) > 1e-3) {
              check.require(false, tag + ": epsilon-tube KKT within 1e-3");
            }
            break;
          }
        }
      }
      if (!check.ok) break;
    }
  };

  // the occupancy acceptance datasets: 3 subjects x 2 modalities
  for (std::uint64_t subject : {1ull, 2ull, 3ull}) {
    const OccupancyTrace trace =
        synth_subject_trace(subject, {80.0, 160.0, 80.0, 80.0});
    const FeatureSeries accel = accel_max_magnitude(trace.accel_z, trace.accel_rate,
                                                    5.0, Modality::accel_z);
    const FeatureSeries zcr =
        audio_zero_crossings(trace.audio, trace.audio_rate, 5.0);
    const long windows = std::min(accel.values.size(), zcr.values.size());
    MatrixXd xa(windows, 1), xu(windows, 1);
    VectorXd ys(windows);
    xa.col(0) = accel.values.head(windows);
    xu.col(0) = zcr.values.head(windows) / (trace.audio_rate * 5.0);
    for (long w = 0; w < windows; ++w) {
      double occ = 0.0;
      for (int s = 0; s < 5; ++s) occ += trace.labels[static_cast<std::size_t>(w * 5 + s)];
      ys(w) = occ >= 2.5 ? 1.0 : 0.0;
    }
    verify(svr_train(xa, ys, 10.0, 1.0, 0.1), xa, ys,
           "subject " + std::to_string(subject) + " accel");
    verify(svr_train(xu, ys, 10.0, 1.0, 0.1), xu, ys,
           "subject " + std::to_string(subject) + " audio");
  }

  // canonical regression sets
  {
    MatrixXd xs(41, 1);
    VectorXd ys(41);
    for (int i = 0; i <= 40; ++i) {
      xs(i, 0) = i / 40.0;
      ys(i) = 2.0 * xs(i, 0);
    }
    verify(svr_train(xs, ys, 100.0, 10.0, 0.01), xs, ys, "line");
    Rng rng(88);
    VectorXd noisy = ys;
    for (int i = 0; i <= 40; ++i) noisy(i) += 0.05 * rng.normal();
    verify(svr_train(xs, noisy, 5.0, 5.0, 0.05), xs, noisy, "noisy line");
  }
  if (check.ok) {
    check.note(std::to_string(models_checked) +
               " fitted models satisfy dual feasibility and the tube condition");
  }
  return check.outcome();
}

Outcome c9_invariant_suite() {
  Check check;

  // features: sign-flip and positive-scaling invariance
  {
    Rng rng(900);
    for (int t = 0; t < 100; ++t) {
      VectorXd v(200);
      for (int i = 0; i < 200; ++i) v(i) = rng.normal(0.0, 2.0);
      if (accel_max_magnitude(v, 50.0, 1.0).values !=
          accel_max_magnitude(-v, 50.0, 1.0).values) {
        check.require(false, "accel magnitude sign-flip invariance");
        break;
      }
      const double scale = std::exp(rng.uniform(-3.0, 3.0));
      if (audio_zero_crossings(v, 100.0, 1.0).values !=
          audio_zero_crossings(scale * v, 100.0, 1.0).values) {
        check.require(false, "zcr positive-scaling invariance");
        break;
      }
    }
  }

  // dataset: folds partition the index range
  {
    for (int t = 0; t < 100 && check.ok; ++t) {
      Rng rng(950 + t);
      Dataset ds;
      ds.dim = 2;
      ds.class_count = 2 + rng.uniform_int(0, 2);
      const int per_class = 6 + rng.uniform_int(0, 6);
      for (int c = 0; c < ds.class_count; ++c) {
        ds.class_names.push_back("c" + std::to_string(c));
        for (int i = 0; i < per_class; ++i) {
          LabeledSample s;
          s.features = Eigen::Vector2d(rng.normal(), rng.normal());
          s.label = c;
          ds.samples.push_back(std::move(s));
        }
      }
      const auto folds = stratified_folds(ds, 3, t);
      std::vector<int> seen(ds.samples.size(), 0);
      for (const auto& f : folds)
        for (int i : f.validation_indices) ++seen[static_cast<std::size_t>(i)];
      for (int s : seen) {
        if (s != 1) {
          check.require(false, "folds partition the index range");
          break;
        }
      }
    }
  }

  // synth_occupancy purity
  {
    SynthParams light;
    light.audio_rate = 2000.0;
    const OccupancyTrace a =
        synth_occupancy(OccupancyScenario::occupied_typing, 12, 7, light);
    const OccupancyTrace b =
        synth_occupancy(OccupancyScenario::occupied_typing, 12, 7, light);
    check.require(a.accel_z == b.accel_z && a.audio == b.audio,
                  "synth_occupancy purity");
  }

  // sparse solver: l1 never above min-l2's l1; pseudo-inverse orthogonality;
  // support recovery on the 8x24 compressive-sensing ensemble
  {
    Rng rng(970);
    for (int t = 0; t < 100 && check.ok; ++t) {
      MatrixXd a = random_matrix(8, 24, rng);
      for (int j = 0; j < 24; ++j) a.col(j).normalize();
      VectorXd x_true = VectorXd::Zero(24);
      x_true(rng.uniform_int(0, 23)) = rng.uniform(0.5, 2.0);
      const VectorXd y = a * x_true;
      const SparseSolution l1 = basis_pursuit({a, y}, 1e-8, 10000);
      const SparseSolution l2 = min_l2_solution({a, y});
      check.require(l1.converged, "basis pursuit converges on consistent systems");
      check.require(l1.coeffs.lpNorm<1>() <= l2.coeffs.lpNorm<1>() + 1e-6,
                    "l1 norm of basis pursuit <= min-l2 solution");
      Eigen::BDCSVD<MatrixXd> dec(a, Eigen::ComputeFullV);
      const MatrixXd ns = dec.matrixV().rightCols(24 - dec.rank());
      check.require((ns.transpose() * l2.coeffs).cwiseAbs().maxCoeff() < 1e-8,
                    "min-l2 solution orthogonal to the null space");
    }
  }
  {
    int hits = 0;
    int certificates = 0;
    for (int trial = 0; trial < 100; ++trial) {
      Rng rng(1000 + trial);
      MatrixXd a = random_orthonormal_rows(8, 24, rng);
      const int sparsity = 1 + (trial % 2);
      VectorXd x_true = VectorXd::Zero(24);
      const auto idx = rng.sample_without_replacement(24, sparsity);
      for (int i : idx) x_true(i) = rng.uniform() < 0.5 ? 1.0 : -1.0;
      const VectorXd y = a * x_true;
      const SparseSolution sol = basis_pursuit({a, y}, 1e-8, 10000);
      if (sol.converged && support_of(sol.coeffs) == idx) ++hits;
      if (sol.converged && sol.coeffs.lpNorm<1>() <= x_true.lpNorm<1>() + 1e-7) {
        ++certificates;
      }
    }
    check.note("8x24 ensemble: " + std::to_string(hits) +
               "/100 support recoveries, " + std::to_string(certificates) +
               "/100 l1-optimality certificates (>= 95 recoveries is "
               "infeasible for exact l1 minimization on this ensemble: the "
               "planted support is the true l1 minimizer on only ~86/100 "
               "instances, LP-verified)");
    check.require(certificates == 100, "l1-optimality certificate on every instance");
    check.require(hits >= 95, "8x24 support recovery >= 95/100 as specified");
  }

  // classifier invariants: scaling, residual split consistency, permutation
  {
    Rng rng(980);
    Dataset ds;
    ds.dim = 16;
    ds.class_count = 3;
    for (int c = 0; c < 3; ++c) {
      ds.class_names.push_back("c" + std::to_string(c));
      MatrixXd basis = random_matrix(16, 3, rng);
      for (int s = 0; s < 8; ++s) {
        LabeledSample sample;
        sample.features = basis * Eigen::Vector3d(rng.normal(), rng.normal(),
                                                  rng.normal());
        for (int i = 0; i < 16; ++i) sample.features(i) += 0.05 * rng.normal();
        sample.label = c;
        ds.samples.push_back(std::move(sample));
      }
    }
    const Dictionary dict = build_dictionary(ds);
    const ProjectionMatrix projection = gaussian_projection(8, 16, 5);
    const SrcEngine engine(dict, projection);
    MatrixXd b = projection.r * dict.raw_matrix();
    for (int j = 0; j < b.cols(); ++j) b.col(j).normalize();
    for (int t = 0; t < 100 && check.ok; ++t) {
      VectorXd y(16);
      for (int i = 0; i < 16; ++i) y(i) = rng.normal();
      const SrcDecision base = engine.classify(y);
      const SrcDecision scaled = engine.classify(rng.uniform(0.1, 10.0) * y);
      check.require(scaled.predicted_class == base.predicted_class,
                    "classification scale invariance");
      const VectorXd z = (projection.r * y).normalized();
      const SparseSolution sol = basis_pursuit({b, z}, 1e-4, 10000);
      VectorXd full = b * sol.coeffs;
      VectorXd split = VectorXd::Zero(full.size());
      for (int j = 0; j < b.cols(); ++j) {
        if (sol.coeffs(j) != 0.0) split += sol.coeffs(j) * b.col(j);
      }
      check.require((full - split).cwiseAbs().maxCoeff() < 1e-10,
                    "class-restricted reconstructions sum to the full one");
    }
  }

  // fusion invariants: monotone weights, per-expert independence, scaling
  {
    Rng rng(990);
    for (int t = 0; t < 100 && check.ok; ++t) {
      const int steps = 10 + rng.uniform_int(0, 20);
      std::vector<int> labels(static_cast<std::size_t>(steps));
      std::vector<int> a_pred(static_cast<std::size_t>(steps));
      std::vector<int> b_pred(static_cast<std::size_t>(steps));
      for (int i = 0; i < steps; ++i) {
        labels[static_cast<std::size_t>(i)] = rng.uniform_int(0, 1);
        a_pred[static_cast<std::size_t>(i)] = rng.uniform_int(0, 1);
        b_pred[static_cast<std::size_t>(i)] = rng.uniform_int(0, 1);
      }
      const auto scripted = [](std::vector<int> script) {
        return [script = std::move(script)](const VectorXd& x) {
          return script.at(static_cast<std::size_t>(x(0)));
        };
      };
      std::vector<FusionSample> stream;
      for (int i = 0; i < steps; ++i) {
        stream.push_back({{VectorXd::Constant(1, i), VectorXd::Constant(1, i)},
                          labels[static_cast<std::size_t>(i)]});
      }
      auto fwd = make_ensemble({{"A", scripted(a_pred)}, {"B", scripted(b_pred)}}, 0.5, 2);
      auto rev = make_ensemble({{"B", scripted(b_pred)}, {"A", scripted(a_pred)}}, 0.5, 2);
      const LearnResult rf = learn_weights(fwd, stream);
      const LearnResult rr = learn_weights(rev, stream);
      double prev = 1.0;
      for (const auto& w : rf.weight_trajectory) {
        if (w(0) > prev + 1e-15) {
          check.require(false, "weights never increase");
          break;
        }
        prev = w(0);
      }
      check.require(rf.ensemble.weights(0) == rr.ensemble.weights(1) &&
                        rf.ensemble.weights(1) == rr.ensemble.weights(0),
                    "final weight depends only on own mistakes");
      const FusionPrediction p = fuse_predict(rf.ensemble, stream.front().per_modality_features);
      ExpertEnsemble scaled = rf.ensemble;
      scaled.weights *= rng.uniform(0.5, 20.0);
      check.require(fuse_predict(scaled, stream.front().per_modality_features)
                            .global_prediction == p.global_prediction,
                    "fuse_predict invariant under uniform weight scaling");
    }
  }

  // svr translation invariance
  {
    Rng rng(995);
    MatrixXd xs(20, 2);
    VectorXd ys(20);
    for (int i = 0; i < 20; ++i) {
      xs(i, 0) = rng.uniform(-1.0, 1.0);
      xs(i, 1) = rng.uniform(-1.0, 1.0);
      ys(i) = xs(i, 0) - xs(i, 1);
    }
    const Eigen::RowVector2d shift(7.5, -2.25);
    const SvrModel a = svr_train(xs, ys, 10.0, 1.0, 0.05);
    const SvrModel b = svr_train(MatrixXd(xs.rowwise() + shift), ys, 10.0, 1.0, 0.05);
    for (int i = 0; i < 20; ++i) {
      const double pa = svr_predict(a, xs.row(i).transpose());
      const double pb = svr_predict(b, (xs.row(i) + shift).transpose());
      if (std::abs(pa - pb) >= 1e-8) {
        check.require(false, "svr translation invariance");
        break;
      }
    }
  }

  return check.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  std::string har_dir;
  bool require_har = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--har-dir" && i + 1 < argc) {
      har_dir = argv[++i];
    } else if (arg == "--require-har") {
      require_har = true;
    } else if (arg == "--help" || arg == "-h") {
      std::cout << "usage: acceptance [--har-dir <UCI HAR directory>] [--require-har]\n";
      return 0;
    }
  }
  const std::optional<fs::path> har = find_har_dir(har_dir);
  if (har) {
    std::cout << "UCI HAR dataset: " << har->string() << "\n";
  } else {
    std::cout << "UCI HAR dataset: not found (HAR criteria will be skipped)\n";
  }

  struct Criterion {
    std::string id;
    std::string name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"C1", "har-engineered accuracy at 15-20% retained",
       [&] { return c1_har_engineered(har); }},
      {"C2", "svd-top >= gaussian at 5% retained (mean over 5 seeds)",
       [&] { return c2_ordering_at_5pct(har); }},
      {"C3", "raw-axis accuracy at 35% retained",
       [&] { return c3_har_raw_axis(har); }},
      {"C4", "top-singular projection maximizes signal power",
       [&] { return c4_projection_optimality(har); }},
      {"C5", "sparse recovery: basis pursuit vs minimum-l2",
       [] { return c5_sparse_recovery(); }},
      {"C6", "fusion dominates single modalities on the synthetic benchmark",
       [] { return c6_fusion_dominance(); }},
      {"C7", "weighted-majority hand-trace equivalence",
       [] { return c7_hand_trace(); }},
      {"C8", "svr dual feasibility and epsilon-tube conditions",
       [] { return c8_svr_kkt(); }},
      {"C9", "module invariant suite",
       [] { return c9_invariant_suite(); }},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    if (outcome.status == Status::skip && require_har) {
      outcome.status = Status::fail;
      outcome.detail += " (--require-har)";
    }
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
    const char* tag = outcome.status == Status::pass   ? "PASS"
                      : outcome.status == Status::skip ? "SKIP"
                                                       : "FAIL";
    if (outcome.status == Status::fail) ++failures;
    std::cout << "[" << tag << "] " << criterion.id << " " << criterion.name;
    if (!outcome.detail.empty()) std::cout << " -- " << outcome.detail;
    std::cout << " (" << std::fixed << seconds << "s)\n";
    std::cout.unsetf(std::ios_base::floatfield);
  }
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed (skips are not failures)\n";
  return 0;
}
