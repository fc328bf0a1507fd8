#pragma once

#include "bts/core_types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bts {

// Linear soft-margin SVM. The bias is learned as the weight of a constant unit
// feature, so the dual is a box-constrained QP over kernel x_i'x_j + 1:
//   max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j (x_i'x_j + 1),  0 <= a_i <= C,
// with w = sum a_i y_i x_i and b = sum a_i y_i.
struct BinarySvm {
  Eigen::VectorXd w;
  double b = 0.0;
  double c = 1.0;
  double tol = 1e-4;
  Eigen::VectorXd alpha;  // training-time only, not persisted
  bool converged = false;
  int passes = 0;  // sweeps, full or over the shrunk active set

  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const { return w.dot(x) + b; }
};

struct SvmOptions {
  double c = 1.0;
  double tol = 1e-4;
  int max_iter = 100000;  // budget in full passes over the data; sweeps over a shrunk set count fractionally
  std::uint64_t seed = 0;
  // Called after every pass with the current dual variables (feasibility audits).
  std::function<void(const Eigen::VectorXd& alpha)> on_pass;
};

// Dual coordinate descent. X is features x n (one column per sample), y in {-1, +1}.
BinarySvm fit_binary(const Eigen::MatrixXd& x, std::span<const int> y, const SvmOptions& opt);

// Value of the dual objective for the given alphas.
double dual_objective(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& alpha);

// Largest KKT violation of a fitted machine on its training data (0 when optimal).
double max_kkt_violation(const BinarySvm& svm, const Eigen::MatrixXd& x, std::span<const int> y);

class OvrClassifier {
 public:
  OvrClassifier() = default;
  OvrClassifier(std::vector<BinarySvm> machines, Eigen::VectorXd mean, Eigen::VectorXd stdev);

  // Standardizes features with training statistics, then one machine per class.
  static OvrClassifier fit(const Eigen::MatrixXd& x, std::span<const int> labels, std::size_t n_classes,
                           const SvmOptions& opt);

  std::size_t n_classes() const { return machines_.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(mean_.size()); }
  const std::vector<BinarySvm>& machines() const { return machines_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& stdev() const { return stdev_; }

  Eigen::VectorXd standardize(const Eigen::VectorXd& f) const;
  Eigen::VectorXd decision_scores(const Eigen::VectorXd& f) const;
  // Argmax of the scores; ties go to the lowest class index.
  int predict(const Eigen::VectorXd& f) const;

 private:
  std::vector<BinarySvm> machines_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd stdev_;
};

inline constexpr double kStdFloor = 1e-12;

int argmax_lowest(const Eigen::VectorXd& scores);

}  // namespace bts
