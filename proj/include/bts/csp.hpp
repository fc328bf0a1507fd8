#pragma once

#include "bts/core_types.hpp"

#include <span>
#include <vector>

namespace bts {

// One class-vs-rest contrast. `filters` holds the selected rows ordered
// [largest eigenvalue ... , smallest eigenvalue ...]: the m largest in
// descending order followed by the m smallest in ascending order.
struct CspPairModel {
  Eigen::MatrixXd filters;       // 2m x channels
  Eigen::VectorXd eigenvalues;   // 2m, each in (0, 1)

  // Fit-time diagnostics, not persisted.
  Eigen::MatrixXd full_filters;      // channels x channels, rows ascending by eigenvalue
  Eigen::VectorXd full_eigenvalues;  // ascending
  Eigen::MatrixXd patterns;          // channels x 2m, forward model of the selected filters
};

struct CspBank {
  std::vector<CspPairModel> models;  // one per class, aligned with the vocabulary
  int n_pairs = 0;
  int n_channels = 0;

  std::size_t n_classes() const { return models.size(); }
  std::size_t feature_dim() const { return models.size() * 2 * static_cast<std::size_t>(n_pairs); }
};

// C = (1 - shrinkage) * XX'/trace(XX') + shrinkage * I/channels.
Eigen::MatrixXd covariance(const TrialEpoch& epoch, double shrinkage);
// Same formula from an uncentered scatter matrix XX'.
Eigen::MatrixXd shrink_normalized(const Eigen::MatrixXd& scatter, double shrinkage);

// Solves C_target w = lambda (C_target + C_rest) w and keeps the m most
// extreme filters at each end of the spectrum.
CspPairModel fit_csp_pair(const Eigen::MatrixXd& c_target, const Eigen::MatrixXd& c_rest, int m);

CspBank fit_csp_bank(std::span<const TrialEpoch> train, std::size_t n_classes, int m, double shrinkage);
// Same from per-trial (already shrunk) covariances.
CspBank fit_csp_bank(std::span<const Eigen::MatrixXd> trial_covariances, std::span<const int> labels,
                     std::size_t n_classes, int m);

inline constexpr double kVarianceFloor = 1e-12;

// Log variance-ratio features from a window's (mean-removed) covariance.
// Per model: f_r = log(v_r / sum_r v_r), v_r = w_r' S w_r clamped to kVarianceFloor.
Eigen::VectorXd features_from_covariance(const CspBank& bank, const Eigen::MatrixXd& window_cov);

// Mean-removed covariance of a channels x time window (1/n normalization).
Eigen::MatrixXd window_covariance(const Signal& window);
Eigen::MatrixXd window_covariance(const SignalD& window);

Eigen::VectorXd extract_features(const CspBank& bank, const Signal& window);
Eigen::VectorXd extract_features(const CspBank& bank, const SignalD& window);

}  // namespace bts
