#include "bts/dsp.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace bts;

namespace {

SignalD random_signal(int channels, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 10.0);
  SignalD x(channels, n);
  for (int c = 0; c < channels; ++c)
    for (int t = 0; t < n; ++t) x(c, t) = nd(rng);
  return x;
}

SignalD filtered(const BiquadCascade& design, SignalD x) {
  BiquadCascade f = design;
  f.reset(std::size_t(x.rows()));
  filter_apply(f, x);
  return x;
}

}  // namespace

TEST_CASE("bandpass magnitude from sine probes") {
  const auto d = design_bandpass(30, 120, 1000, 4);
  CHECK(d.sections().size() == 4);
  const double centre = oracle::probe_gain_db(d, 75);
  CHECK(centre <= 0.0);
  CHECK(centre >= -1.0);
  for (double edge : {30.0, 120.0}) {
    const double g = oracle::probe_gain_db(d, edge);
    CHECK(g >= -4.0);
    CHECK(g <= -2.0);
  }
  CHECK(oracle::probe_gain_db(d, 10) <= -20.0);
  CHECK(oracle::probe_gain_db(d, 350) <= -20.0);
}

TEST_CASE("probe agrees with the analytic response") {
  const auto d = design_bandpass(30, 120, 1000, 4);
  for (double f : {20.0, 45.0, 75.0, 100.0, 200.0}) {
    const double analytic = 20.0 * std::log10(std::abs(d.response(f)));
    CHECK(std::abs(oracle::probe_gain_db(d, f) - analytic) < 1e-3);
  }
}

TEST_CASE("75 Hz sine passes at near unit amplitude") {
  const auto d = design_bandpass(30, 120, 1000, 4);
  const double amp = std::pow(10.0, oracle::probe_gain_db(d, 75) / 20.0);
  CHECK(amp >= 0.89);
  CHECK(amp <= 1.0);
}

TEST_CASE("design rejects invalid arguments") {
  try {
    design_bandpass(30, 600, 1000, 4);
    FAIL("expected Nyquist");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Nyquist);
    CHECK(std::string(e.what()).find("Nyquist") != std::string::npos);
  }
  CHECK_THROWS_AS(design_bandpass(30, 120, 1000, 0), Error);
  CHECK_THROWS_AS(design_bandpass(30, 120, 1000, 3), Error);
  CHECK_THROWS_AS(design_bandpass(120, 30, 1000, 4), Error);
}

TEST_CASE("poles lie inside the unit circle") {
  for (int order : {2, 4, 6, 8}) {
    const auto d = design_bandpass(30, 120, 1000, order);
    for (const auto& p : d.poles()) CHECK(std::abs(p) < 1.0);
  }
}

TEST_CASE("zero input gives zero output") {
  const auto d = design_bandpass(30, 120, 1000, 4);
  const SignalD y = filtered(d, SignalD::Zero(3, 2000));
  CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chunked filtering equals batch filtering bit for bit") {
  const auto d = design_bandpass(30, 120, 1000, 4);
  const SignalD x = random_signal(4, 5000, 11);
  const SignalD batch = filtered(d, x);
  BiquadCascade f = d;
  f.reset(4);
  SignalD chunked(4, 5000);
  for (int i = 0; i < 10; ++i) {
    SignalD part = x.middleCols(500 * i, 500);
    filter_apply(f, part);
    chunked.middleCols(500 * i, 500) = part;
  }
  CHECK(chunked == batch);
}

TEST_CASE("filter is linear") {
  const auto d = design_bandpass(30, 120, 1000, 4);
  const SignalD a = random_signal(2, 3000, 1);
  const SignalD b = random_signal(2, 3000, 2);
  const SignalD lhs = filtered(d, (2.5 * a - 0.75 * b).eval());
  const SignalD rhs = 2.5 * filtered(d, a) - 0.75 * filtered(d, b);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("impulse response decays") {
  const auto d = design_bandpass(30, 120, 1000, 4);
  SignalD x = SignalD::Zero(1, 10000);
  x(0, 0) = 1.0;
  const SignalD y = filtered(d, x);
  CHECK(y.rightCols(2000).squaredNorm() < 1e-12);
}

TEST_CASE("filter_recording leaves the input untouched") {
  EegRecording rec;
  rec.fs_hz = 1000;
  rec.samples = random_signal(2, 1000, 3).cast<float>();
  const Signal before = rec.samples;
  const auto out = filter_recording(design_bandpass(30, 120, 1000, 4), rec);
  CHECK(rec.samples == before);
  CHECK(out.samples != before);
}
