#include "bts/csp.hpp"
#include "bts/kernels.hpp"

#include <doctest.h>

#include <random>

using namespace bts;
using kernels::Exec;

namespace {

Signal noise(int channels, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> nd(0.0f, 5.0f);
  Signal x(channels, n);
  for (int c = 0; c < channels; ++c)
    for (int t = 0; t < n; ++t) x(c, t) = nd(rng) + float(c);
  return x;
}

}  // namespace

TEST_CASE("serial and parallel filtering are bit-identical") {
  const auto d = design_bandpass(30, 120, 1000, 4);
  const Signal x = noise(16, 4000, 1);
  BiquadCascade fs = d, fp = d;
  fs.reset(16);
  fp.reset(16);
  Signal a = x, b = x;
  kernels::filter_channels(fs, a, Exec::Serial);
  kernels::filter_channels(fp, b, Exec::Parallel);
  CHECK(a == b);
  BiquadCascade wrong = d;
  wrong.reset(3);
  CHECK_THROWS_AS(kernels::filter_channels(wrong, a, Exec::Serial), Error);
}

TEST_CASE("block covariance equals the direct window covariance") {
  const Signal x = noise(6, 3000, 2);
  const auto span = kernels::span_window_stats(x, 500, 2000, 1000, 100);
  REQUIRE(span.window_covs.size() == 11);
  for (std::size_t i = 0; i < span.window_covs.size(); ++i) {
    const Signal w = x.middleCols(Eigen::Index(500 + 100 * i), 1000);
    CHECK((span.window_covs[i] - window_covariance(w)).cwiseAbs().maxCoeff() < 1e-9);
  }
  const Eigen::MatrixXd seg = x.middleCols(500, 2000).cast<double>();
  CHECK((span.scatter - seg * seg.transpose()).cwiseAbs().maxCoeff() < 1e-6 * span.scatter.cwiseAbs().maxCoeff());
}

TEST_CASE("window and hop that do not divide each other") {
  const Signal x = noise(3, 1000, 3);
  const auto span = kernels::span_window_stats(x, 0, 1000, 250, 150);
  REQUIRE(span.window_covs.size() == 6);
  for (std::size_t i = 0; i < span.window_covs.size(); ++i) {
    const Signal w = x.middleCols(Eigen::Index(150 * i), 250);
    CHECK((span.window_covs[i] - window_covariance(w)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("serial and parallel span statistics and features are bit-identical") {
  const Signal x = noise(8, 20000, 4);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + 2000 <= 20000; s += 1700) starts.push_back(s);
  const auto a = kernels::batch_span_window_stats(x, starts, 2000, 1000, 100, Exec::Serial);
  const auto b = kernels::batch_span_window_stats(x, starts, 2000, 1000, 100, Exec::Parallel);
  REQUIRE(a.size() == b.size());
  std::vector<Eigen::MatrixXd> covs;
  std::vector<Eigen::MatrixXd> trial;
  std::vector<int> labels;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].scatter == b[i].scatter);
    REQUIRE(a[i].window_covs.size() == b[i].window_covs.size());
    for (std::size_t j = 0; j < a[i].window_covs.size(); ++j) CHECK(a[i].window_covs[j] == b[i].window_covs[j]);
    covs.insert(covs.end(), a[i].window_covs.begin(), a[i].window_covs.end());
    trial.push_back(shrink_normalized(a[i].scatter, 0.05));
    labels.push_back(int(i % 2));
  }
  const CspBank bank = fit_csp_bank(trial, labels, 2, 2);
  const Eigen::MatrixXd fs = kernels::batch_features(bank, covs, Exec::Serial);
  const Eigen::MatrixXd fp = kernels::batch_features(bank, covs, Exec::Parallel);
  CHECK(fs == fp);
  CHECK(fs.col(0) == features_from_covariance(bank, covs[0]));
}

TEST_CASE("span overrun is reported") {
  const Signal x = noise(2, 100, 5);
  const std::vector<std::size_t> starts{50};
  CHECK_THROWS_AS(kernels::batch_span_window_stats(x, starts, 100, 50, 10, Exec::Parallel), Error);
  CHECK_THROWS_AS(kernels::span_window_stats(x, 50, 100, 50, 10), Error);
}
