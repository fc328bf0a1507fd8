#include "bts/csp.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace bts {

Eigen::MatrixXd shrink_normalized(const Eigen::MatrixXd& scatter, double shrinkage) {
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "shrinkage must lie in [0, 1]");
  const auto n = scatter.rows();
  const double tr = scatter.trace();
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n) * (shrinkage / static_cast<double>(n));
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    if (shrinkage == 0.0) throw Error(ErrorCode::DegenerateCovariance, "degenerate covariance: zero-energy epoch");
    if (!std::isfinite(tr)) throw Error(ErrorCode::NonFinite, "non-finite epoch samples");
    // Zero energy: only the identity term survives, rescaled so trace stays 1.
    return Eigen::MatrixXd::Identity(n, n) / static_cast<double>(n);
  }
  if (shrinkage < 1.0) c += scatter * ((1.0 - shrinkage) / tr);
  return c;
}

Eigen::MatrixXd covariance(const TrialEpoch& epoch, double shrinkage) {
  const Eigen::MatrixXd x = epoch.samples.cast<double>();
  Eigen::MatrixXd scatter = x * x.transpose();
  return shrink_normalized(scatter, shrinkage);
}

CspPairModel fit_csp_pair(const Eigen::MatrixXd& c_target, const Eigen::MatrixXd& c_rest, int m) {
  const auto n = c_target.rows();
  if (c_target.cols() != n || c_rest.rows() != n || c_rest.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "CSP covariances must be square and of equal size");
  if (m < 1 || 2 * m > n)
    throw Error(ErrorCode::InvalidArgument, "need 1 <= m and 2m <= channels for CSP");

  const Eigen::MatrixXd composite = c_target + c_rest;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> outer(composite);
  if (outer.info() != Eigen::Success)
    throw Error(ErrorCode::NotPositiveDefinite, "eigendecomposition of composite covariance failed");
  const Eigen::VectorXd d = outer.eigenvalues();
  if (!(d.minCoeff() > 1e-14 * std::max(1.0, d.maxCoeff())))
    throw Error(ErrorCode::NotPositiveDefinite,
                "composite covariance is not positive definite; raise covariance_shrinkage");

  // Whitening transform P with P composite P' = I.
  const Eigen::MatrixXd whiten = d.cwiseSqrt().cwiseInverse().asDiagonal() * outer.eigenvectors().transpose();
  Eigen::MatrixXd s = whiten * c_target * whiten.transpose();
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> inner(s);
  if (inner.info() != Eigen::Success)
    throw Error(ErrorCode::NotPositiveDefinite, "eigendecomposition of whitened target failed");

  CspPairModel model;
  model.full_eigenvalues = inner.eigenvalues();
  model.full_filters = inner.eigenvectors().transpose() * whiten;
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index arg;
    model.full_filters.row(r).cwiseAbs().maxCoeff(&arg);
    if (model.full_filters(r, arg) < 0) model.full_filters.row(r) *= -1.0;
  }

  model.filters.resize(2 * m, n);
  model.eigenvalues.resize(2 * m);
  for (int i = 0; i < m; ++i) {
    model.filters.row(i) = model.full_filters.row(n - 1 - i);
    model.eigenvalues(i) = model.full_eigenvalues(n - 1 - i);
    model.filters.row(m + i) = model.full_filters.row(i);
    model.eigenvalues(m + i) = model.full_eigenvalues(i);
  }
  model.patterns = composite * model.filters.transpose();
  return model;
}

CspBank fit_csp_bank(std::span<const Eigen::MatrixXd> trial_covariances, std::span<const int> labels,
                     std::size_t n_classes, int m) {
  if (trial_covariances.size() != labels.size())
    throw Error(ErrorCode::DimensionMismatch, "one label per trial covariance required");
  if (trial_covariances.empty()) throw Error(ErrorCode::InvalidArgument, "no training trials");
  const auto n = trial_covariances.front().rows();

  std::vector<Eigen::MatrixXd> class_sum(n_classes, Eigen::MatrixXd::Zero(n, n));
  std::vector<int> count(n_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int k = labels[i];
    if (k < 0 || static_cast<std::size_t>(k) >= n_classes)
      throw Error(ErrorCode::InvalidArgument, "label out of range in CSP training set");
    if (trial_covariances[i].rows() != n)
      throw Error(ErrorCode::DimensionMismatch, "trial covariances differ in size");
    class_sum[static_cast<std::size_t>(k)] += trial_covariances[i];
    ++count[static_cast<std::size_t>(k)];
  }
  for (std::size_t k = 0; k < n_classes; ++k)
    if (count[k] < 2)
      throw Error(ErrorCode::MissingClass, "class " + std::to_string(k) + " has " + std::to_string(count[k]) +
                                               " training trials, CSP needs at least 2");

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : class_sum) total += s;
  const int n_total = static_cast<int>(labels.size());

  CspBank bank;
  bank.n_pairs = m;
  bank.n_channels = static_cast<int>(n);
  bank.models.resize(n_classes);
  const long nk = static_cast<long>(n_classes);
#pragma omp parallel for schedule(static)
  for (long k = 0; k < nk; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Eigen::MatrixXd c_target = class_sum[ku] / count[ku];
    const Eigen::MatrixXd c_rest = (total - class_sum[ku]) / (n_total - count[ku]);
    bank.models[ku] = fit_csp_pair(c_target, c_rest, m);
  }
  return bank;
}

CspBank fit_csp_bank(std::span<const TrialEpoch> train, std::size_t n_classes, int m, double shrinkage) {
  std::vector<Eigen::MatrixXd> covs;
  std::vector<int> labels;
  covs.reserve(train.size());
  for (const auto& e : train) {
    covs.push_back(covariance(e, shrinkage));
    labels.push_back(e.label);
  }
  return fit_csp_bank(covs, labels, n_classes, m);
}

Eigen::VectorXd features_from_covariance(const CspBank& bank, const Eigen::MatrixXd& window_cov) {
  if (window_cov.rows() != bank.n_channels || window_cov.cols() != bank.n_channels)
    throw Error(ErrorCode::DimensionMismatch, "window has " + std::to_string(window_cov.rows()) +
                                                  " channels, model expects " + std::to_string(bank.n_channels));
  const auto per = 2 * bank.n_pairs;
  Eigen::VectorXd f(static_cast<Eigen::Index>(bank.feature_dim()));
  for (std::size_t k = 0; k < bank.models.size(); ++k) {
    const Eigen::MatrixXd& w = bank.models[k].filters;
    Eigen::VectorXd v = (w * window_cov).cwiseProduct(w).rowwise().sum();
    v = v.cwiseMax(kVarianceFloor);
    const double total = v.sum();
    f.segment(static_cast<Eigen::Index>(k) * per, per) = (v / total).array().log().matrix();
  }
  return f;
}

namespace {
template <typename M>
Eigen::MatrixXd centered_cov(const M& window) {
  if (window.cols() < 1) throw Error(ErrorCode::InvalidArgument, "empty window");
  const Eigen::MatrixXd x = window.template cast<double>();
  const Eigen::VectorXd mu = x.rowwise().mean();
  const Eigen::MatrixXd xc = x.colwise() - mu;
  return (xc * xc.transpose()) / static_cast<double>(x.cols());
}
}  // namespace

Eigen::MatrixXd window_covariance(const Signal& window) { return centered_cov(window); }
Eigen::MatrixXd window_covariance(const SignalD& window) { return centered_cov(window); }

Eigen::VectorXd extract_features(const CspBank& bank, const Signal& window) {
  return features_from_covariance(bank, window_covariance(window));
}

Eigen::VectorXd extract_features(const CspBank& bank, const SignalD& window) {
  return features_from_covariance(bank, window_covariance(window));
}

}  // namespace bts
