#include "bts/csp.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace bts;

namespace {

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

TrialEpoch random_epoch(std::mt19937_64& rng, int channels, int n, const Eigen::VectorXd& boost_dir, double boost,
                        int label) {
  std::normal_distribution<double> nd;
  TrialEpoch e;
  e.samples.resize(channels, n);
  e.label = label;
  e.fs_hz = 1000;
  for (int t = 0; t < n; ++t) {
    const double s = nd(rng) * boost;
    for (int c = 0; c < channels; ++c) e.samples(c, t) = float(nd(rng) + s * boost_dir(c));
  }
  return e;
}

}  // namespace

TEST_CASE("shrinkage endpoints and trace") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd s = oracle::random_spd(rng, 5) * 7.0;
  CHECK(inf_norm(shrink_normalized(s, 1.0) - Eigen::MatrixXd::Identity(5, 5) / 5.0) < 1e-15);
  for (double g : {0.0, 0.05, 0.5}) {
    const Eigen::MatrixXd c = shrink_normalized(s, g);
    CHECK(c.trace() == doctest::Approx(1.0).epsilon(1e-12));
    const Eigen::MatrixXd expect = (1 - g) * s / s.trace() + g * Eigen::MatrixXd::Identity(5, 5) / 5.0;
    CHECK(inf_norm(c - expect) < 1e-12);
  }
}

TEST_CASE("zero-energy epochs") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  try {
    shrink_normalized(zero, 0.0);
    FAIL("expected DegenerateCovariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCovariance);
  }
  CHECK(inf_norm(shrink_normalized(zero, 0.05) - Eigen::MatrixXd::Identity(3, 3) / 3.0) < 1e-15);
}

TEST_CASE("covariance of an epoch is the normalized scatter") {
  TrialEpoch e;
  e.samples.resize(2, 3);
  e.samples << 1, 2, 3, 0, 1, 0;
  const Eigen::MatrixXd c = covariance(e, 0.0);
  Eigen::MatrixXd expect(2, 2);
  expect << 14, 2, 2, 1;
  CHECK(inf_norm(c - expect / 15.0) < 1e-12);
}

TEST_CASE("diagonal pencil eigenvalues") {
  Eigen::MatrixXd a = Eigen::Vector2d(2, 1).asDiagonal();
  Eigen::MatrixXd b = Eigen::Vector2d(1, 2).asDiagonal();
  const auto m = fit_csp_pair(a, b, 1);
  CHECK(m.eigenvalues(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.eigenvalues(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(m.filters(0, 1)) < 1e-12);
  CHECK(std::abs(m.filters(1, 0)) < 1e-12);
  CHECK(m.filters(0, 0) > 0);

  const auto eq = fit_csp_pair(a, a, 1);
  for (Eigen::Index i = 0; i < eq.full_eigenvalues.size(); ++i)
    CHECK(eq.full_eigenvalues(i) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("top filter matches the multi-start Rayleigh oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = oracle::random_spd(rng, 6);
    const Eigen::MatrixXd b = oracle::random_spd(rng, 6);
    const auto m = fit_csp_pair(a, b, 2);
    const Eigen::VectorXd w = m.filters.row(0).transpose();
    const double rq = w.dot(a * w) / w.dot((a + b) * w);
    CHECK(rq == doctest::Approx(m.eigenvalues(0)).epsilon(1e-10));
    CHECK(std::abs(oracle::rayleigh_max(a, b, 50, 7 + trial) - rq) < 1e-6);
  }
}

TEST_CASE("filters whiten the composite and diagonalize the target") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = oracle::random_spd(rng, 6);
    const Eigen::MatrixXd b = oracle::random_spd(rng, 6);
    const auto m = fit_csp_pair(a, b, 2);
    const Eigen::MatrixXd& w = m.full_filters;
    CHECK(inf_norm(w * (a + b) * w.transpose() - Eigen::MatrixXd::Identity(6, 6)) <= 1e-8);
    const Eigen::MatrixXd d = w * a * w.transpose();
    CHECK(inf_norm(d - Eigen::MatrixXd(m.full_eigenvalues.asDiagonal())) <= 1e-8);
    for (Eigen::Index i = 1; i < 6; ++i) CHECK(m.full_eigenvalues(i) >= m.full_eigenvalues(i - 1));
    CHECK(m.eigenvalues(0) >= m.eigenvalues(1));
    CHECK(m.eigenvalues(2) <= m.eigenvalues(3));
    CHECK(m.eigenvalues(1) >= m.eigenvalues(3));
  }
}

TEST_CASE("swapping the pencil mirrors the spectrum") {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd a = oracle::random_spd(rng, 5);
  const Eigen::MatrixXd b = oracle::random_spd(rng, 5);
  const auto ab = fit_csp_pair(a, b, 2);
  const auto ba = fit_csp_pair(b, a, 2);
  for (Eigen::Index i = 0; i < 5; ++i)
    CHECK(ab.full_eigenvalues(i) == doctest::Approx(1.0 - ba.full_eigenvalues(4 - i)).epsilon(1e-10));
}

TEST_CASE("non-positive-definite composite is rejected") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 0) = 1;
  try {
    fit_csp_pair(a, a, 1);
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    CHECK(std::string(e.what()).find("shrinkage") != std::string::npos);
  }
}

TEST_CASE("bank recovers a planted spatial pattern") {
  std::mt19937_64 rng(3);
  const int ch = 8;
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(ch);
  dir << 1, 2, -1, 0, 0.5, 0, 0, -1;
  dir.normalize();
  std::vector<TrialEpoch> train;
  for (int i = 0; i < 30; ++i) {
    train.push_back(random_epoch(rng, ch, 400, dir, 2.0, 0));
    train.push_back(random_epoch(rng, ch, 400, dir, 0.0, 1));
    train.push_back(random_epoch(rng, ch, 400, dir, 0.0, 2));
  }
  const CspBank bank = fit_csp_bank(train, 3, 2, 0.05);
  CHECK(bank.feature_dim() == 12);
  const Eigen::VectorXd p = bank.models[0].patterns.col(0).normalized();
  CHECK(std::abs(p.dot(dir)) >= 0.95);
}

TEST_CASE("bank needs two trials per class") {
  std::mt19937_64 rng(4);
  std::vector<Eigen::MatrixXd> covs;
  std::vector<int> labels;
  for (int i = 0; i < 5; ++i) {
    covs.push_back(oracle::random_spd(rng, 4));
    labels.push_back(i < 4 ? 0 : 1);
  }
  try {
    fit_csp_bank(covs, labels, 2, 1);
    FAIL("expected MissingClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingClass);
  }
}

TEST_CASE("feature dimension for the 13-class bank") {
  std::mt19937_64 rng(6);
  std::vector<Eigen::MatrixXd> covs;
  std::vector<int> labels;
  for (int k = 0; k < 13; ++k)
    for (int r = 0; r < 3; ++r) {
      covs.push_back(oracle::random_spd(rng, 6));
      labels.push_back(k);
    }
  const CspBank bank = fit_csp_bank(covs, labels, 13, 2);
  CHECK(bank.feature_dim() == 13 * 4);
  CHECK(features_from_covariance(bank, oracle::random_spd(rng, 6)).size() == 52);
}

TEST_CASE("log-variance features") {
  CspBank bank;
  bank.n_pairs = 1;
  bank.n_channels = 2;
  CspPairModel m;
  m.filters = Eigen::MatrixXd::Identity(2, 2);
  m.eigenvalues = Eigen::Vector2d(0.6, 0.4);
  bank.models.push_back(m);

  SUBCASE("equal variances give log(1/2)") {
    const Eigen::VectorXd f = features_from_covariance(bank, Eigen::MatrixXd::Identity(2, 2) * 3.0);
    CHECK(f(0) == doctest::Approx(std::log(0.5)));
    CHECK(f(1) == doctest::Approx(std::log(0.5)));
  }
  SUBCASE("scale invariance and recomputation") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    SignalD x(2, 300);
    for (int c = 0; c < 2; ++c)
      for (int t = 0; t < 300; ++t) x(c, t) = nd(rng) * (c + 1) + 4.0;
    const Eigen::VectorXd f = extract_features(bank, x);
    const Eigen::VectorXd f2 = extract_features(bank, SignalD(2.0 * x));
    CHECK((f - f2).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::VectorXd v(2);
    for (int c = 0; c < 2; ++c) {
      const double mu = x.row(c).mean();
      v(c) = (x.row(c).array() - mu).square().mean();
    }
    CHECK(f(0) == doctest::Approx(std::log(v(0) / v.sum())).epsilon(1e-12));
    CHECK(f(1) == doctest::Approx(std::log(v(1) / v.sum())).epsilon(1e-12));
  }
  SUBCASE("channel permutation commutes with filter permutation") {
    std::mt19937_64 rng(10);
    CspBank b3;
    b3.n_pairs = 1;
    b3.n_channels = 3;
    CspPairModel m3;
    m3.filters = Eigen::MatrixXd::Random(2, 3);
    m3.eigenvalues = Eigen::Vector2d(0.7, 0.2);
    b3.models.push_back(m3);
    const Eigen::MatrixXd cov = oracle::random_spd(rng, 3);
    Eigen::PermutationMatrix<3> p;
    p.indices() << 2, 0, 1;
    CspBank permuted = b3;
    permuted.models[0].filters = m3.filters * p.transpose();
    const Eigen::MatrixXd pcov = p * cov * p.transpose();
    CHECK((features_from_covariance(b3, cov) - features_from_covariance(permuted, pcov)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("variance floor keeps features finite") {
    const Eigen::VectorXd f = features_from_covariance(bank, Eigen::MatrixXd::Zero(2, 2));
    CHECK(f.allFinite());
  }
  SUBCASE("channel mismatch") {
    CHECK_THROWS_AS(features_from_covariance(bank, Eigen::MatrixXd::Identity(3, 3)), Error);
  }
}
