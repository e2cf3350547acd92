#include "srcfuse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "srcfuse/errors.hpp"
#include "srcfuse/rng.hpp"

namespace srcfuse {

namespace fs = std::filesystem;

void validate_dataset(const Dataset& ds) {
  if (ds.class_count < 2) throw DataError("dataset needs at least 2 classes");
  if (ds.samples.empty()) throw DataError("dataset has no samples");
  std::vector<int> per_class(static_cast<std::size_t>(ds.class_count), 0);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    if (s.features.size() != ds.dim) {
      throw DataError("sample " + std::to_string(i) + " has dimension " +
                      std::to_string(s.features.size()) + ", expected " +
                      std::to_string(ds.dim));
    }
    if (!s.features.allFinite()) {
      throw DataError("sample " + std::to_string(i) + " has non-finite features");
    }
    if (s.label < 0 || s.label >= ds.class_count) {
      throw DataError("sample " + std::to_string(i) + " label " +
                      std::to_string(s.label) + " outside [0, " +
                      std::to_string(ds.class_count) + ")");
    }
    ++per_class[static_cast<std::size_t>(s.label)];
  }
  for (int c = 0; c < ds.class_count; ++c) {
    if (per_class[static_cast<std::size_t>(c)] == 0) {
      throw DataError("class " + std::to_string(c) + " has no samples");
    }
  }
}

namespace {

// Reads a whitespace-separated numeric table; every row must have the same
// number of tokens.
std::vector<std::vector<double>> read_numeric_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("missing file: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p >= end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() ||
          (next < end && *next != ' ' && *next != '\t' && *next != '\r')) {
        throw FormatError("non-numeric token at " + path.string() + ":" +
                          std::to_string(line_no));
      }
      row.push_back(v);
      p = next;
    }
    if (row.empty()) continue;  // tolerate blank lines
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("inconsistent column count at " + path.string() + ":" +
                        std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("empty table: " + path.string());
  return rows;
}

std::vector<std::string> read_activity_names(const fs::path& dir) {
  std::vector<std::string> names;
  std::ifstream in(dir / "activity_labels.txt");
  if (in) {
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      int id = 0;
      std::string name;
      if (ss >> id >> name) names.push_back(name);
    }
  }
  if (names.size() != 6) {
    names.clear();
    for (int i = 1; i <= 6; ++i) names.push_back("activity_" + std::to_string(i));
  }
  return names;
}

Dataset load_har_split(const fs::path& dir, const std::string& split,
                       HarVariant variant,
                       const std::vector<std::string>& names) {
  fs::path xfile;
  switch (variant) {
    case HarVariant::engineered561:
      xfile = dir / split / ("X_" + split + ".txt");
      break;
    case HarVariant::raw_x:
      xfile = dir / split / "Inertial Signals" / ("total_acc_x_" + split + ".txt");
      break;
    case HarVariant::raw_y:
      xfile = dir / split / "Inertial Signals" / ("total_acc_y_" + split + ".txt");
      break;
    case HarVariant::raw_z:
      xfile = dir / split / "Inertial Signals" / ("total_acc_z_" + split + ".txt");
      break;
  }
  const fs::path yfile = dir / split / ("y_" + split + ".txt");
  const fs::path sfile = dir / split / ("subject_" + split + ".txt");

  const auto xs = read_numeric_table(xfile);
  const auto ys = read_numeric_table(yfile);
  if (ys.size() != xs.size()) {
    throw FormatError("row count mismatch: " + xfile.string() + " has " +
                      std::to_string(xs.size()) + " rows, " + yfile.string() +
                      " has " + std::to_string(ys.size()));
  }

  // Subject column is part of the published layout but optional here.
  std::vector<int> subjects;
  if (fs::exists(sfile)) {
    const auto ss = read_numeric_table(sfile);
    if (ss.size() != xs.size()) {
      throw FormatError("row count mismatch between " + xfile.string() +
                        " and " + sfile.string());
    }
    for (const auto& row : ss) subjects.push_back(static_cast<int>(row.at(0)));
  }

  Dataset ds;
  ds.dim = static_cast<int>(xs.front().size());
  ds.class_count = 6;
  ds.class_names = names;
  ds.samples.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    LabeledSample s;
    s.features = Eigen::Map<const Eigen::VectorXd>(xs[i].data(),
                                                   static_cast<long>(xs[i].size()));
    const int raw_label = static_cast<int>(ys[i].at(0));
    if (raw_label < 1 || raw_label > 6) {
      throw FormatError("label " + std::to_string(raw_label) + " at " +
                        yfile.string() + ":" + std::to_string(i + 1) +
                        " outside 1..6");
    }
    s.label = raw_label - 1;
    s.subject = subjects.empty() ? -1 : subjects[i];
    ds.samples.push_back(std::move(s));
  }
  validate_dataset(ds);
  return ds;
}

}  // namespace

std::pair<Dataset, Dataset> load_uci_har(const fs::path& dir,
                                         HarVariant variant) {
  if (!fs::exists(dir)) {
    throw IngestionError("missing dataset directory: " + dir.string());
  }
  const auto names = read_activity_names(dir);
  Dataset train = load_har_split(dir, "train", variant, names);
  Dataset test = load_har_split(dir, "test", variant, names);
  if (train.dim != test.dim) {
    throw FormatError("train/test dimension mismatch: " +
                      std::to_string(train.dim) + " vs " +
                      std::to_string(test.dim));
  }
  return {std::move(train), std::move(test)};
}

void write_uci_har_split(const Dataset& ds, const fs::path& dir,
                         const std::string& split) {
  validate_dataset(ds);
  std::error_code ec;
  fs::create_directories(dir / split, ec);
  const fs::path xfile = dir / split / ("X_" + split + ".txt");
  const fs::path yfile = dir / split / ("y_" + split + ".txt");
  const fs::path sfile = dir / split / ("subject_" + split + ".txt");
  std::ofstream xout(xfile), yout(yfile), sout(sfile);
  if (!xout || !yout || !sout) {
    throw IoError("cannot write dataset split under " + dir.string());
  }
  char buf[32];
  for (const auto& s : ds.samples) {
    for (int j = 0; j < s.features.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%s% .7e", j ? " " : "", s.features(j));
      xout << buf;
    }
    xout << '\n';
    yout << (s.label + 1) << '\n';
    sout << (s.subject < 0 ? 1 : s.subject) << '\n';
  }
  if (!xout || !yout || !sout) {
    throw IoError("failed writing dataset split under " + dir.string());
  }
}

void validate_trace(const OccupancyTrace& trace) {
  if (trace.accel_rate <= 0 || trace.audio_rate <= 0) {
    throw DataError("trace rates must be positive");
  }
  for (int v : trace.labels) {
    if (v != 0 && v != 1) throw DataError("occupancy labels must be 0 or 1");
  }
  const auto seconds = static_cast<double>(trace.labels.size());
  const auto want_accel = static_cast<long>(std::llround(seconds * trace.accel_rate));
  const auto want_audio = static_cast<long>(std::llround(seconds * trace.audio_rate));
  if (trace.accel_x.size() != want_accel || trace.accel_y.size() != want_accel ||
      trace.accel_z.size() != want_accel) {
    throw DataError("accelerometer channel length inconsistent with rate and label duration");
  }
  if (trace.audio.size() != want_audio) {
    throw DataError("audio channel length inconsistent with rate and label duration");
  }
}

OccupancyTrace synth_occupancy(OccupancyScenario scenario, double duration_s,
                               std::uint64_t seed, const SynthParams& params) {
  if (duration_s < 10.0) {
    throw ParameterError("synth_occupancy: duration must be >= 10 s, got " +
                         std::to_string(duration_s));
  }
  const int seconds = static_cast<int>(duration_s);
  const long n_accel = static_cast<long>(std::llround(seconds * params.accel_rate));
  const long n_audio = static_cast<long>(std::llround(seconds * params.audio_rate));

  Rng rng(seed);
  OccupancyTrace t;
  t.accel_rate = params.accel_rate;
  t.audio_rate = params.audio_rate;
  t.accel_x.setZero(n_accel);
  t.accel_y.setZero(n_accel);
  t.accel_z.setZero(n_accel);
  t.audio.setZero(n_audio);

  for (long i = 0; i < n_accel; ++i) {
    t.accel_x(i) = rng.normal(0.0, params.accel_noise_sd);
    t.accel_y(i) = rng.normal(0.0, params.accel_noise_sd);
    t.accel_z(i) = rng.normal(0.0, params.accel_noise_sd);
  }
  for (long i = 0; i < n_audio; ++i) {
    t.audio(i) = rng.normal(0.0, params.audio_noise_sd);
  }

  const bool occupied = scenario == OccupancyScenario::occupied_typing ||
                        scenario == OccupancyScenario::occupied_quiet;
  t.labels.assign(static_cast<std::size_t>(seconds), occupied ? 1 : 0);

  // Decaying 12 Hz transient on Z (with light X/Y coupling) per keystroke,
  // plus a short audible click.
  if (scenario == OccupancyScenario::occupied_typing) {
    const double strike_f = 12.0;
    const long tail = static_cast<long>(std::llround(0.15 * params.accel_rate));
    const long click_len = static_cast<long>(std::llround(0.03 * params.audio_rate));
    for (int sec = 0; sec < seconds; ++sec) {
      int strikes = std::max(1, static_cast<int>(std::floor(
          params.keystrokes_per_s + 1.5 * (rng.uniform() - 0.5))));
      for (int s = 0; s < strikes; ++s) {
        const double at = sec + rng.uniform();
        const double amp = rng.uniform(params.keystroke_amp_lo, params.keystroke_amp_hi);
        const long i0 = static_cast<long>(at * params.accel_rate);
        for (long i = i0; i < std::min(i0 + tail, n_accel); ++i) {
          const double dt = static_cast<double>(i - i0) / params.accel_rate;
          const double osc = amp * std::exp(-dt / 0.04) *
                             std::sin(2.0 * std::numbers::pi * strike_f * dt +
                                      std::numbers::pi / 2.0);
          t.accel_z(i) += osc;
          t.accel_x(i) += 0.2 * osc;
          t.accel_y(i) += 0.2 * osc;
        }
        const long a0 = static_cast<long>(at * params.audio_rate);
        for (long i = a0; i < std::min(a0 + click_len, n_audio); ++i) {
          t.audio(i) += rng.normal(0.0, 0.08);
        }
      }
    }
  }

  // Seated presence is audible: a tonal voice/movement hum with slow
  // amplitude modulation, present in both occupied scenarios.
  if (occupied) {
    const double f0 = rng.uniform(params.voice_f0_lo, params.voice_f0_hi);
    const double ph1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double ph2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (long i = 0; i < n_audio; ++i) {
      const double tt = static_cast<double>(i) / params.audio_rate;
      const double am = 0.7 + 0.3 * std::sin(2.0 * std::numbers::pi * 0.5 * tt);
      t.audio(i) += params.voice_amp * am *
                    (std::sin(2.0 * std::numbers::pi * f0 * tt + ph1) +
                     0.5 * std::sin(2.0 * std::numbers::pi * 2.0 * f0 * tt + ph2));
    }
  }

  // Small chair-shuffle bumps; far below typing transients.
  if (scenario == OccupancyScenario::occupied_quiet) {
    for (int sec = 0; sec < seconds; ++sec) {
      if (rng.uniform() < 0.1) {
        const long i0 = static_cast<long>((sec + rng.uniform()) * params.accel_rate);
        const long len = static_cast<long>(std::llround(0.1 * params.accel_rate));
        const double amp = rng.uniform(0.02, 0.06);
        for (long i = i0; i < std::min(i0 + len, n_accel); ++i) {
          t.accel_z(i) += amp * std::exp(-static_cast<double>(i - i0) /
                                         (0.03 * params.accel_rate));
        }
      }
    }
  }

  // A running device shakes the desk periodically but makes no usable sound.
  if (scenario == OccupancyScenario::unoccupied_device_vibration) {
    const double ph = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (long i = 0; i < n_accel; ++i) {
      const double tt = static_cast<double>(i) / params.accel_rate;
      const double hum = params.device_hum_amp *
                         std::sin(2.0 * std::numbers::pi * params.device_hum_hz * tt + ph);
      t.accel_z(i) += hum;
      t.accel_x(i) += 0.2 * hum;
      t.accel_y(i) += 0.2 * hum;
    }
  }

  validate_trace(t);
  return t;
}

OccupancyTrace concat_traces(const std::vector<OccupancyTrace>& parts) {
  if (parts.empty()) throw ParameterError("concat_traces: no parts");
  OccupancyTrace out;
  out.accel_rate = parts.front().accel_rate;
  out.audio_rate = parts.front().audio_rate;
  long n_accel = 0, n_audio = 0;
  std::size_t n_labels = 0;
  for (const auto& p : parts) {
    if (p.accel_rate != out.accel_rate || p.audio_rate != out.audio_rate) {
      throw ParameterError("concat_traces: sampling rates differ between parts");
    }
    n_accel += p.accel_x.size();
    n_audio += p.audio.size();
    n_labels += p.labels.size();
  }
  out.accel_x.resize(n_accel);
  out.accel_y.resize(n_accel);
  out.accel_z.resize(n_accel);
  out.audio.resize(n_audio);
  out.labels.reserve(n_labels);
  long ai = 0, ui = 0;
  for (const auto& p : parts) {
    out.accel_x.segment(ai, p.accel_x.size()) = p.accel_x;
    out.accel_y.segment(ai, p.accel_y.size()) = p.accel_y;
    out.accel_z.segment(ai, p.accel_z.size()) = p.accel_z;
    ai += p.accel_x.size();
    out.audio.segment(ui, p.audio.size()) = p.audio;
    ui += p.audio.size();
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  validate_trace(out);
  return out;
}

OccupancyTrace synth_subject_trace(std::uint64_t subject_seed,
                                   const std::array<double, 4>& block_seconds,
                                   const SynthParams& params) {
  const std::uint64_t base = subject_seed * 1000;
  return concat_traces({
      synth_occupancy(OccupancyScenario::occupied_typing, block_seconds[0],
                      base + 1, params),
      synth_occupancy(OccupancyScenario::unoccupied_idle, block_seconds[1],
                      base + 2, params),
      synth_occupancy(OccupancyScenario::occupied_quiet, block_seconds[2],
                      base + 3, params),
      synth_occupancy(OccupancyScenario::unoccupied_device_vibration,
                      block_seconds[3], base + 4, params),
  });
}

void export_trace_csv(const OccupancyTrace& trace, const fs::path& dir,
                      const std::string& prefix) {
  validate_trace(trace);
  std::error_code ec;
  fs::create_directories(dir, ec);
  {
    std::ofstream out(dir / (prefix + "_accel.csv"));
    if (!out) throw IoError("cannot write accel csv under " + dir.string());
    out << "t_s,accel_x,accel_y,accel_z\n";
    out.precision(9);
    for (long i = 0; i < trace.accel_x.size(); ++i) {
      out << (static_cast<double>(i) / trace.accel_rate) << ','
          << trace.accel_x(i) << ',' << trace.accel_y(i) << ','
          << trace.accel_z(i) << '\n';
    }
  }
  {
    std::ofstream out(dir / (prefix + "_audio.csv"));
    if (!out) throw IoError("cannot write audio csv under " + dir.string());
    out << "t_s,audio\n";
    out.precision(9);
    for (long i = 0; i < trace.audio.size(); ++i) {
      out << (static_cast<double>(i) / trace.audio_rate) << ','
          << trace.audio(i) << '\n';
    }
  }
  {
    std::ofstream out(dir / (prefix + "_labels.csv"));
    if (!out) throw IoError("cannot write labels csv under " + dir.string());
    out << "t_s,label\n";
    for (std::size_t i = 0; i < trace.labels.size(); ++i) {
      out << i << ',' << trace.labels[i] << '\n';
    }
  }
}

std::vector<Fold> stratified_folds(const Dataset& ds, int k,
                                   std::uint64_t seed) {
  if (k < 2) throw ParameterError("stratified_folds: k must be >= 2");
  validate_dataset(ds);

  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    by_class[ds.samples[i].label].push_back(static_cast<int>(i));
  }
  for (const auto& [cls, idx] : by_class) {
    if (static_cast<int>(idx.size()) < k) {
      throw ParameterError("stratified_folds: class " + std::to_string(cls) +
                           " has " + std::to_string(idx.size()) +
                           " samples, fewer than k=" + std::to_string(k));
    }
  }

  Rng rng(seed);
  std::vector<std::vector<int>> validation(static_cast<std::size_t>(k));
  for (auto& [cls, idx] : by_class) {
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      validation[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    }
  }

  std::vector<Fold> folds(static_cast<std::size_t>(k));
  std::vector<char> in_val(ds.samples.size());
  for (int f = 0; f < k; ++f) {
    auto& val = validation[static_cast<std::size_t>(f)];
    std::sort(val.begin(), val.end());
    std::fill(in_val.begin(), in_val.end(), 0);
    for (int i : val) in_val[static_cast<std::size_t>(i)] = 1;
    Fold fold;
    fold.validation_indices = val;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      if (!in_val[i]) fold.train_indices.push_back(static_cast<int>(i));
    }
    folds[static_cast<std::size_t>(f)] = std::move(fold);
  }
  return folds;
}

}  // namespace srcfuse
