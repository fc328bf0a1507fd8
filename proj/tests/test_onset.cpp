#include "bts/onset.hpp"
#include "bts/synth.hpp"

#include <doctest.h>

using namespace bts;

namespace {

EegRecording noise(double ms, std::uint64_t seed) {
  SynthSpec spec;
  spec.channels = 8;
  spec.latent_sources = 3;
  spec.rng_seed = seed;
  return generate_noise(spec, ms);
}

// One session: the first minute is the baseline, later spans are test data.
const EegRecording& session() {
  static const EegRecording s = noise(150000, 100);
  return s;
}

EegRecording segment(double from_ms, double len_ms) {
  EegRecording part = session();
  part.samples = session().samples.middleCols(Eigen::Index(from_ms * part.fs_hz / 1000.0),
                                              Eigen::Index(len_ms * part.fs_hz / 1000.0));
  return part;
}

OnsetDetector fitted_detector(OnsetConfig cfg = {}) {
  OnsetDetector det(cfg);
  const std::vector<Signal> segs{segment(0, 60000).samples};
  det.fit_baseline(segs, session().fs_hz);
  return det;
}

void scale(EegRecording& rec, double from_ms, double to_ms, float gain) {
  const auto a = Eigen::Index(from_ms * rec.fs_hz / 1000.0);
  const auto b = Eigen::Index(to_ms * rec.fs_hz / 1000.0);
  rec.samples.middleCols(a, b - a) *= gain;
}

}  // namespace

TEST_CASE("baseline statistics") {
  const auto det = fitted_detector();
  CHECK(det.fitted());
  CHECK(det.baseline_mean() > 0.0);
  CHECK(det.baseline_std() > 0.0);
}

TEST_CASE("frame statistic is the channel-averaged RMS") {
  OnsetDetector det;
  Signal x(2, 250);
  x.row(0).setConstant(3.0f);
  x.row(1).setConstant(-1.0f);
  const auto r = det.frame_rms(x, 1000);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(2.0));
}

TEST_CASE("no onsets on baseline noise") {
  const auto det = fitted_detector();
  CHECK(det.detect(segment(60000, 30000)).empty());
}

TEST_CASE("a 3x step is detected within 300 ms") {
  const auto det = fitted_detector();
  auto rec = segment(90000, 10000);
  scale(rec, 5000, 10000, 3.0f);
  const auto on = det.detect(rec);
  REQUIRE(on.size() == 1);
  CHECK(on[0] >= 5000.0);
  CHECK(on[0] <= 5300.0);
}

TEST_CASE("separate bursts give separate onsets") {
  const auto det = fitted_detector();
  auto rec = segment(100000, 12000);
  scale(rec, 3000, 4000, 3.0f);
  scale(rec, 6000, 7000, 3.0f);
  const auto on = det.detect(rec);
  REQUIRE(on.size() == 2);
  CHECK(on[0] == doctest::Approx(3100.0));
  CHECK(on[1] == doctest::Approx(6100.0));
}

TEST_CASE("refractory period suppresses a close second burst") {
  const auto det = fitted_detector();
  auto rec = segment(112000, 8000);
  scale(rec, 2000, 2500, 3.0f);
  scale(rec, 2700, 3200, 3.0f);
  CHECK(det.detect(rec).size() == 1);
}

TEST_CASE("detector errors") {
  OnsetDetector det;
  try {
    det.detect(noise(2000, 1));
    FAIL("expected NoBaseline");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoBaseline);
  }
  const std::vector<Signal> tiny{Signal::Ones(2, 50)};
  CHECK_THROWS_AS(det.fit_baseline(tiny, 1000), Error);
  CHECK_THROWS_AS(OnsetDetector(OnsetConfig{100, 2.5, 0, 1000}), Error);
}
