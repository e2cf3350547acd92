#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace srcfuse {

struct LabeledSample {
  Eigen::VectorXd features;
  int label = 0;
  int subject = -1;  // -1 when unknown
};

struct Dataset {
  std::vector<LabeledSample> samples;
  int class_count = 0;
  int dim = 0;
  std::vector<std::string> class_names;
};

// Enforces the dataset invariants (fixed finite dimension, labels inside
// [0, class_count), class_count >= 2, no empty class). Throws DataError.
void validate_dataset(const Dataset& ds);

enum class HarVariant { engineered561, raw_x, raw_y, raw_z };

// Loads the published UCI HAR text layout: whitespace-separated decimals, one
// sample per row, labels 1..6 remapped to 0..5. `engineered561` reads
// {train,test}/X_*.txt; the raw variants read one
// "Inertial Signals/total_acc_{x,y,z}_*.txt" channel (128 samples per row).
std::pair<Dataset, Dataset> load_uci_har(const std::filesystem::path& dir,
                                         HarVariant variant);

// Writes one split ("train" or "test") of a dataset back in the same layout;
// used for round-trip checks and for exporting synthetic stand-ins.
void write_uci_har_split(const Dataset& ds, const std::filesystem::path& dir,
                         const std::string& split);

struct OccupancyTrace {
  Eigen::VectorXd accel_x, accel_y, accel_z;
  Eigen::VectorXd audio;
  std::vector<int> labels;  // one 0/1 entry per second
  double accel_rate = 50.0;
  double audio_rate = 16000.0;

  double seconds() const { return static_cast<double>(labels.size()); }
};

void validate_trace(const OccupancyTrace& trace);

enum class OccupancyScenario {
  occupied_typing,
  occupied_quiet,
  unoccupied_idle,
  unoccupied_device_vibration,
};

// Generator knobs. The defaults realize the signal regimes the estimator
// relies on: typing shows up as accelerometer transients, seated presence as
// tonal audio, an empty desk as a noise floor plus (optionally) a periodic
// device hum on the accelerometer.
struct SynthParams {
  double accel_rate = 50.0;
  double audio_rate = 16000.0;
  double accel_noise_sd = 0.01;
  double audio_noise_sd = 0.002;
  double keystrokes_per_s = 3.0;
  double keystroke_amp_lo = 0.4;
  double keystroke_amp_hi = 1.2;
  double device_hum_amp = 0.25;
  double device_hum_hz = 13.0;
  double voice_amp = 0.18;
  double voice_f0_lo = 150.0;
  double voice_f0_hi = 260.0;
};

// Deterministic in (scenario, duration, seed, params). duration_s must be at
// least 10 s; whole seconds only are generated.
OccupancyTrace synth_occupancy(OccupancyScenario scenario, double duration_s,
                               std::uint64_t seed,
                               const SynthParams& params = {});

// Concatenates traces with matching rates; labels are concatenated.
OccupancyTrace concat_traces(const std::vector<OccupancyTrace>& parts);

// Composite labeled benchmark trace for one synthetic subject: typing, idle,
// quiet-occupied and device-vibration blocks, in that order, so labels
// alternate 1/0/1/0. Block seeds derive from the subject seed.
OccupancyTrace synth_subject_trace(std::uint64_t subject_seed,
                                   const std::array<double, 4>& block_seconds,
                                   const SynthParams& params = {});

// Writes <prefix>_accel.csv (t_s,accel_x,accel_y,accel_z),
// <prefix>_audio.csv (t_s,audio) and <prefix>_labels.csv (t_s,label).
void export_trace_csv(const OccupancyTrace& trace,
                      const std::filesystem::path& dir,
                      const std::string& prefix);

struct Fold {
  std::vector<int> train_indices;
  std::vector<int> validation_indices;
};

// Stratified k-fold split: validation sets partition the index range and
// per-class proportions stay within one sample of the global proportion.
// Deterministic per seed.
std::vector<Fold> stratified_folds(const Dataset& ds, int k,
                                   std::uint64_t seed);

}  // namespace srcfuse
