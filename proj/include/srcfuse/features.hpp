#pragma once

#include <Eigen/Dense>

namespace srcfuse {

enum class Modality { accel_x, accel_y, accel_z, audio_zcr };

const char* to_string(Modality m);

struct FeatureSeries {
  Eigen::VectorXd values;
  double segment_len_s = 1.0;
  Modality modality = Modality::accel_z;
};

enum class AccelFeatureKind {
  max_magnitude,  // default; the one used for results
  mean_magnitude,
  percentile25,
  percentile75,
};

// Per-segment statistic of |sample|. Trailing partial segments are discarded.
FeatureSeries accel_feature(const Eigen::VectorXd& channel, double rate,
                            double segment_len_s, Modality modality,
                            AccelFeatureKind kind = AccelFeatureKind::max_magnitude);

FeatureSeries accel_max_magnitude(const Eigen::VectorXd& channel, double rate,
                                  double segment_len_s,
                                  Modality modality = Modality::accel_z);

// Per-window count of adjacent sign changes, with sign(0) treated as
// positive. Counts are whole numbers stored as reals. Trailing partial
// windows are discarded.
FeatureSeries audio_zero_crossings(const Eigen::VectorXd& audio, double rate,
                                   double window_s);

}  // namespace srcfuse
