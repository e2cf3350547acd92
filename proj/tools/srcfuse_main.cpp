#include <fstream>
#include <iostream>
#include <mutex>

#include "CLI11.hpp"
#include "srcfuse/errors.hpp"
#include "srcfuse/dataset.hpp"
#include "srcfuse/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::string& seeds_override, int jobs,
                const std::string& format_name, bool resume) {
  srcfuse::ExperimentConfig cfg = srcfuse::parse_config(config_path);
  if (!seeds_override.empty()) {
    cfg.seeds.clear();
    std::stringstream ss(seeds_override);
    std::string token;
    while (std::getline(ss, token, ',')) {
      cfg.seeds.push_back(std::stoull(token));
    }
  }
  srcfuse::validate_config(cfg);

  const srcfuse::ResultFormat format = format_name == "json"
                                           ? srcfuse::ResultFormat::json
                                           : srcfuse::ResultFormat::csv;
  std::filesystem::create_directories(out_dir);
  const auto partial_path = std::filesystem::path(out_dir) / "results_partial.csv";

  srcfuse::RunOptions options;
  options.out_dir = out_dir;
  options.jobs = jobs;
  if (resume) {
    options.completed_cells = srcfuse::load_completed_cells(partial_path);
    if (!options.completed_cells.empty()) {
      std::cout << "resuming: " << options.completed_cells.size()
                << " cells already complete\n";
    }
  }

  // every finished row is flushed immediately so long sweeps are resumable
  std::ofstream partial(partial_path, resume ? std::ios::app : std::ios::trunc);
  if (!partial) {
    throw srcfuse::IoError("cannot write " + partial_path.string());
  }
  if (!resume || options.completed_cells.empty()) {
    partial << srcfuse::result_csv_header() << '\n';
  }
  std::mutex io_mutex;
  options.on_row = [&](const srcfuse::ResultRow& row) {
    std::lock_guard<std::mutex> lock(io_mutex);
    partial << srcfuse::result_csv_line(row) << '\n';
    partial.flush();
    std::cout << row.cell_key() << " " << row.metric_name << "="
              << row.metric_value << "\n";
  };

  std::vector<srcfuse::ResultRow> rows = srcfuse::run_experiment(cfg, options);
  if (resume && !options.completed_cells.empty()) {
    // merge previously completed rows back in for the final artifacts
    std::ifstream in(partial_path);
    std::string line;
    std::getline(in, line);
    std::vector<srcfuse::ResultRow> merged;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        merged.push_back(srcfuse::parse_result_csv_line(line));
      } catch (const srcfuse::Error&) {
        break;
      }
    }
    std::sort(merged.begin(), merged.end(),
              [](const srcfuse::ResultRow& a, const srcfuse::ResultRow& b) {
                return a.cell_key() < b.cell_key();
              });
    merged.erase(std::unique(merged.begin(), merged.end(),
                             [](const srcfuse::ResultRow& a,
                                const srcfuse::ResultRow& b) {
                               return a.cell_key() == b.cell_key();
                             }),
                 merged.end());
    rows = std::move(merged);
  }
  srcfuse::emit_results(rows, cfg, format, out_dir);
  std::cout << "wrote " << rows.size() << " rows to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-representation activity classification and occupancy fusion experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "results", seeds, format = "csv";
  int jobs = 1;
  bool resume = false;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config_file", config_path, "experiment config file");
  run->add_option("--config", config_path, "experiment config file (alternative to the positional)");
  run->add_option("--out-dir", out_dir, "output directory");
  run->add_option("--seeds", seeds, "comma-separated seed override");
  run->add_option("--jobs", jobs, "number of concurrent sweep cells")
      ->check(CLI::PositiveNumber);
  run->add_option("--format", format, "results format")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--resume", resume, "skip cells already in results_partial.csv");

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("config", config_path, "experiment config file")->required();

  app.add_subcommand("list-experiments", "print the experiment kinds");

  std::string scenario = "occupied_typing", trace_prefix = "trace";
  double duration = 60.0, audio_rate = 16000.0, accel_rate = 50.0;
  std::uint64_t trace_seed = 0;
  auto* export_trace = app.add_subcommand(
      "export-trace", "generate a synthetic occupancy trace and write it as CSV");
  export_trace->add_option("--scenario", scenario, "scenario name")
      ->check(CLI::IsMember({"occupied_typing", "occupied_quiet",
                             "unoccupied_idle", "unoccupied_device_vibration"}));
  export_trace->add_option("--duration", duration, "seconds, >= 10");
  export_trace->add_option("--seed", trace_seed, "generator seed");
  export_trace->add_option("--audio-rate", audio_rate, "audio rate, Hz");
  export_trace->add_option("--accel-rate", accel_rate, "accelerometer rate, Hz");
  export_trace->add_option("--out-dir", out_dir, "output directory");
  export_trace->add_option("--prefix", trace_prefix, "output file prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-experiments")) {
      std::cout << "har_engineered             Fig. 4 analogue: 561-feature activity classification\n"
                << "har_raw_axis               Fig. 5 analogue: raw 128-sample single-axis windows\n"
                << "occupancy_single_modality  Fig. 6/7 analogue: per-modality SVR accuracy\n"
                << "occupancy_fusion           Fig. 8 analogue: weighted-majority sensor fusion\n"
                << "projection_power_study     signal-power comparison of projection constructions\n";
      return kExitOk;
    }
    if (app.got_subcommand("export-trace")) {
      srcfuse::SynthParams params;
      params.audio_rate = audio_rate;
      params.accel_rate = accel_rate;
      const auto kind =
          scenario == "occupied_typing" ? srcfuse::OccupancyScenario::occupied_typing
          : scenario == "occupied_quiet" ? srcfuse::OccupancyScenario::occupied_quiet
          : scenario == "unoccupied_idle" ? srcfuse::OccupancyScenario::unoccupied_idle
                                          : srcfuse::OccupancyScenario::unoccupied_device_vibration;
      const srcfuse::OccupancyTrace trace =
          srcfuse::synth_occupancy(kind, duration, trace_seed, params);
      srcfuse::export_trace_csv(trace, out_dir, trace_prefix);
      std::cout << "wrote " << trace_prefix << "_{accel,audio,labels}.csv to "
                << out_dir << "\n";
      return kExitOk;
    }
    if (app.got_subcommand("validate")) {
      srcfuse::ExperimentConfig cfg = srcfuse::parse_config(config_path);
      srcfuse::validate_config(cfg);
      std::cout << "ok: " << config_path << " ("
                << srcfuse::to_string(cfg.experiment) << ")\n";
      return kExitOk;
    }
    if (config_path.empty()) {
      std::cerr << "validation error: run needs a config file (positional or --config)\n";
      return kExitValidation;
    }
    return run_command(config_path, out_dir, seeds, jobs, format, resume);
  } catch (const srcfuse::ParameterError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const srcfuse::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitData;
  } catch (const srcfuse::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const srcfuse::IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return kExitData;
  } catch (const srcfuse::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
