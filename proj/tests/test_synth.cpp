#include "bts/dsp.hpp"
#include "bts/synth.hpp"

#include <doctest.h>

using namespace bts;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.channels = 8;
  spec.latent_sources = 3;
  spec.trials_per_class = 4;
  return spec;
}

double band_power(const EegRecording& rec, double lo, double hi, Eigen::Index from, Eigen::Index len) {
  BiquadCascade f = design_bandpass(lo, hi, rec.fs_hz, 4);
  f.reset(rec.n_channels());
  SignalD x = rec.samples.cast<double>();
  filter_apply(f, x);
  return x.middleCols(from, len).squaredNorm() / double(len * x.rows());
}

}  // namespace

TEST_CASE("sessions are deterministic per seed") {
  const auto a = generate_session(small_spec());
  const auto b = generate_session(small_spec());
  CHECK(a.recording.samples == b.recording.samples);
  CHECK(a.recording.annotations == b.recording.annotations);
  auto other = small_spec();
  other.rng_seed = 2;
  CHECK(generate_session(other).recording.samples != a.recording.samples);
}

TEST_CASE("layout and manifest agree with the annotations") {
  const auto spec = small_spec();
  const auto s = generate_session(spec);
  const auto& m = s.manifest;
  REQUIRE(s.recording.annotations.size() == 13 * 4);
  CHECK(s.recording.n_samples() == 1000 + 52 * 2000);
  CHECK(s.recording.n_channels() == 8);
  CHECK(s.recording.channel_names.size() == 8);
  for (std::size_t i = 0; i < m.trial_labels.size(); ++i) {
    CHECK(s.recording.annotations[i].time_ms == m.trial_start_ms[i]);
    CHECK(s.recording.annotations[i].label == spec.vocab.label(m.trial_labels[i]));
    CHECK(m.trial_start_ms[i] == 1000.0 + 2000.0 * double(i));
  }
  CHECK(m.mixing.rows() == 8);
  CHECK(m.mixing.cols() == 13);
  for (Eigen::Index k = 0; k < 13; ++k) CHECK(m.mixing.col(k).norm() == doctest::Approx(1.0));
  for (Eigen::Index i = 0; i < 8; ++i) CHECK(m.latent_loading.row(i).norm() == doctest::Approx(1.0));
}

TEST_CASE("mixing vectors keep the minimum angle") {
  auto spec = small_spec();
  spec.channels = 32;
  const auto s = generate_session(spec);
  const double max_cos = std::cos(30.0 * 3.14159265358979 / 180.0);
  for (Eigen::Index i = 0; i < 13; ++i)
    for (Eigen::Index j = i + 1; j < 13; ++j)
      CHECK(std::abs(s.manifest.mixing.col(i).dot(s.manifest.mixing.col(j))) <= max_cos + 1e-12);
}

TEST_CASE("background noise level") {
  auto spec = small_spec();
  const auto rec = generate_noise(spec, 60000);
  const double rms = std::sqrt(rec.samples.cast<double>().squaredNorm() / double(rec.samples.size()));
  CHECK(rms == doctest::Approx(spec.noise_rms_uv).epsilon(0.15));
  CHECK(rec.annotations.empty());
}

TEST_CASE("trials carry band-limited energy along their mixing vector") {
  auto spec = small_spec();
  spec.snr = 1.0;
  spec.trials_per_class = 2;
  const auto s = generate_session(spec);
  const auto rest = *spec.vocab.index_of("rest");
  double active = 0, quiet = 0;
  int n_active = 0, n_quiet = 0;
  for (std::size_t i = 0; i < s.manifest.trial_labels.size(); ++i) {
    const auto from = Eigen::Index(s.manifest.trial_start_ms[i]) + 200;
    const double p = band_power(s.recording, 30, 120, from, 1600);
    if (s.manifest.trial_labels[i] == rest) {
      quiet += p;
      ++n_quiet;
    } else {
      active += p;
      ++n_active;
    }
  }
  CHECK(active / n_active > 1.05 * quiet / n_quiet);

  auto silent = spec;
  silent.snr = 0.0;
  const auto z = generate_session(silent);
  const auto noise = generate_noise(silent, z.recording.duration_ms());
  CHECK(z.recording.samples == noise.samples);
}

TEST_CASE("spec validation") {
  auto spec = small_spec();
  spec.fs_hz = 200;
  try {
    generate_session(spec);
    FAIL("expected Nyquist");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Nyquist);
  }
  spec = small_spec();
  spec.noise_correlation = 1.5;
  CHECK_THROWS_AS(generate_session(spec), Error);
  spec = small_spec();
  spec.channels = 0;
  CHECK_THROWS_AS(generate_session(spec), Error);
}

TEST_CASE("binary vocabulary session") {
  auto spec = small_spec();
  spec.vocab = Vocabulary::binary();
  const auto s = generate_session(spec);
  CHECK(s.recording.annotations.size() == 8);
  for (const auto& a : s.recording.annotations) CHECK((a.label == "help me" || a.label == "rest"));
}
