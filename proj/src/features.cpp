#include "srcfuse/features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "srcfuse/errors.hpp"

namespace srcfuse {

const char* to_string(Modality m) {
  switch (m) {
    case Modality::accel_x: return "accel_x";
    case Modality::accel_y: return "accel_y";
    case Modality::accel_z: return "accel_z";
    case Modality::audio_zcr: return "audio_zcr";
  }
  return "unknown";
}

namespace {

long segment_samples(const Eigen::VectorXd& signal, double rate,
                     double segment_len_s, const char* op) {
  if (rate <= 0.0) throw ParameterError(std::string(op) + ": rate must be positive");
  if (segment_len_s <= 0.0) {
    throw ParameterError(std::string(op) + ": segment length must be positive");
  }
  const long len = static_cast<long>(std::llround(segment_len_s * rate));
  if (len < 1) throw ParameterError(std::string(op) + ": segment shorter than one sample");
  if (signal.size() < len) {
    throw ParameterError(std::string(op) + ": signal shorter than one segment (" +
                         std::to_string(signal.size()) + " < " +
                         std::to_string(len) + " samples)");
  }
  return len;
}

double percentile_of_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

FeatureSeries accel_feature(const Eigen::VectorXd& channel, double rate,
                            double segment_len_s, Modality modality,
                            AccelFeatureKind kind) {
  const long len = segment_samples(channel, rate, segment_len_s, "accel_feature");
  const long segments = channel.size() / len;
  FeatureSeries out;
  out.values.resize(segments);
  out.segment_len_s = segment_len_s;
  out.modality = modality;
  std::vector<double> mags;
  for (long s = 0; s < segments; ++s) {
    const Eigen::VectorXd seg = channel.segment(s * len, len).cwiseAbs();
    switch (kind) {
      case AccelFeatureKind::max_magnitude:
        out.values(s) = seg.maxCoeff();
        break;
      case AccelFeatureKind::mean_magnitude:
        out.values(s) = seg.mean();
        break;
      case AccelFeatureKind::percentile25:
      case AccelFeatureKind::percentile75: {
        mags.assign(seg.data(), seg.data() + seg.size());
        std::sort(mags.begin(), mags.end());
        out.values(s) = percentile_of_sorted(
            mags, kind == AccelFeatureKind::percentile25 ? 0.25 : 0.75);
        break;
      }
    }
  }
  return out;
}

FeatureSeries accel_max_magnitude(const Eigen::VectorXd& channel, double rate,
                                  double segment_len_s, Modality modality) {
  return accel_feature(channel, rate, segment_len_s, modality,
                       AccelFeatureKind::max_magnitude);
}

FeatureSeries audio_zero_crossings(const Eigen::VectorXd& audio, double rate,
                                   double window_s) {
  const long len = segment_samples(audio, rate, window_s, "audio_zero_crossings");
  const long windows = audio.size() / len;
  FeatureSeries out;
  out.values.resize(windows);
  out.segment_len_s = window_s;
  out.modality = Modality::audio_zcr;
  for (long w = 0; w < windows; ++w) {
    long count = 0;
    const long base = w * len;
    for (long j = 0; j + 1 < len; ++j) {
      const bool neg_a = audio(base + j) < 0.0;   // sign(0) is positive
      const bool neg_b = audio(base + j + 1) < 0.0;
      if (neg_a != neg_b) ++count;
    }
    out.values(w) = static_cast<double>(count);
  }
  return out;
}

}  // namespace srcfuse
