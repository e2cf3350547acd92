#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "srcfuse/errors.hpp"
#include "srcfuse/features.hpp"
#include "srcfuse/rng.hpp"

using Eigen::VectorXd;
using namespace srcfuse;

TEST_SUITE_BEGIN("features");

TEST_CASE("accel_max_magnitude of a constant negative signal") {
  VectorXd c = VectorXd::Constant(500, -2.0);
  FeatureSeries f = accel_max_magnitude(c, 50.0, 1.0);
  REQUIRE(f.values.size() == 10);
  for (int i = 0; i < f.values.size(); ++i) CHECK(f.values(i) == 2.0);
}

TEST_CASE("accel_max_magnitude of zeros") {
  VectorXd z = VectorXd::Zero(500);
  FeatureSeries f = accel_max_magnitude(z, 50.0, 1.0);
  REQUIRE(f.values.size() == 10);
  CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("accel_max_magnitude places a single spike in the right segment") {
  VectorXd z = VectorXd::Zero(500);
  z(75) = 5.0;  // t = 1.5 s at 50 Hz
  FeatureSeries f = accel_max_magnitude(z, 50.0, 1.0);
  REQUIRE(f.values.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(f.values(i) == (i == 1 ? 5.0 : 0.0));
}

TEST_CASE("accel_max_magnitude discards a trailing partial segment") {
  VectorXd z = VectorXd::Zero(125);  // 2.5 s at 50 Hz
  FeatureSeries f = accel_max_magnitude(z, 50.0, 1.0);
  CHECK(f.values.size() == 2);
}

TEST_CASE("accel_feature supports mean and percentile kinds") {
  // segment = 4 samples: |x| = {1, 2, 3, 4}
  VectorXd v(4);
  v << -1.0, 2.0, -3.0, 4.0;
  CHECK(accel_feature(v, 4.0, 1.0, Modality::accel_x,
                      AccelFeatureKind::mean_magnitude).values(0) == 2.5);
  CHECK(accel_feature(v, 4.0, 1.0, Modality::accel_x,
                      AccelFeatureKind::percentile25).values(0) == doctest::Approx(1.75));
  CHECK(accel_feature(v, 4.0, 1.0, Modality::accel_x,
                      AccelFeatureKind::percentile75).values(0) == doctest::Approx(3.25));
}

TEST_CASE("accel_max_magnitude is invariant under sign flip (100 random signals)") {
  for (int t = 0; t < 100; ++t) {
    Rng rng(t);
    VectorXd v(200);
    for (int i = 0; i < 200; ++i) v(i) = rng.normal(0.0, 2.0);
    FeatureSeries a = accel_max_magnitude(v, 50.0, 1.0);
    FeatureSeries b = accel_max_magnitude(-v, 50.0, 1.0);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("accel feature errors") {
  VectorXd v = VectorXd::Zero(10);
  CHECK_THROWS_AS(accel_max_magnitude(v, 50.0, 1.0), ParameterError);  // < one segment
  CHECK_THROWS_AS(accel_max_magnitude(v, 0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(accel_max_magnitude(v, 50.0, 0.0), ParameterError);
}

TEST_CASE("audio_zero_crossings of a constant signal is zero") {
  VectorXd c = VectorXd::Constant(48000 * 5, 1.0);
  FeatureSeries f = audio_zero_crossings(c, 48000.0, 5.0);
  REQUIRE(f.values.size() == 1);
  CHECK(f.values(0) == 0.0);
}

TEST_CASE("audio_zero_crossings of an alternating signal counts every pair") {
  const int len = 400;
  VectorXd v(len);
  for (int i = 0; i < len; ++i) v(i) = (i % 2 == 0) ? 1.0 : -1.0;
  FeatureSeries f = audio_zero_crossings(v, static_cast<double>(len), 1.0);
  REQUIRE(f.values.size() == 1);
  CHECK(f.values(0) == static_cast<double>(len - 1));
}

TEST_CASE("audio_zero_crossings of a pure sine matches the analytic count") {
  // A sinusoid crosses zero 2 f W times over a window of W seconds.
  const double rate = 8000.0;
  const double window = 5.0;
  for (double freq : {50.0, 100.0, 220.0}) {
    const long n = static_cast<long>(rate * window);
    VectorXd v(n);
    for (long i = 0; i < n; ++i) {
      v(i) = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
    }
    FeatureSeries f = audio_zero_crossings(v, rate, window);
    CHECK(std::abs(f.values(0) - 2.0 * freq * window) <= 1.0);
  }
}

TEST_CASE("audio_zero_crossings treats exact zeros as positive") {
  VectorXd v(8);
  v << 1.0, 0.0, -1.0, 0.0, 1.0, -1.0, 0.0, 0.0;
  // signs: + + - + + - + + -> crossings at (1,2),(2,3),(4,5),(5,6) = 4
  FeatureSeries f = audio_zero_crossings(v, 8.0, 1.0);
  CHECK(f.values(0) == 4.0);
}

TEST_CASE("audio_zero_crossings is invariant under positive scaling (100 random signals)") {
  for (int t = 0; t < 100; ++t) {
    Rng rng(500 + t);
    VectorXd v(300);
    for (int i = 0; i < 300; ++i) v(i) = rng.normal();
    const double scale = std::exp(rng.uniform(-3.0, 3.0));
    FeatureSeries a = audio_zero_crossings(v, 100.0, 1.0);
    FeatureSeries b = audio_zero_crossings(scale * v, 100.0, 1.0);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("audio_zero_crossings discards the trailing partial window and validates input") {
  VectorXd v = VectorXd::Ones(250);
  FeatureSeries f = audio_zero_crossings(v, 100.0, 1.0);
  CHECK(f.values.size() == 2);
  CHECK_THROWS_AS(audio_zero_crossings(VectorXd(), 100.0, 1.0), ParameterError);
}

TEST_SUITE_END();
