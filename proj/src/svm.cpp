#include "bts/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace bts {

namespace {

void check_inputs(const Eigen::MatrixXd& x, std::span<const int> y) {
  if (static_cast<std::size_t>(x.cols()) != y.size())
    throw Error(ErrorCode::DimensionMismatch, "SVM: one label per sample column required");
  if (x.cols() < 2) throw Error(ErrorCode::InvalidArgument, "SVM: need at least 2 samples");
  if (!x.allFinite()) throw Error(ErrorCode::NonFinite, "SVM: non-finite features");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw Error(ErrorCode::InvalidArgument, "SVM: labels must be -1 or +1");
  }
  if (!pos || !neg) throw Error(ErrorCode::SingleClass, "SVM: training data contains a single class");
}

// Projected gradient of the (minimization form of the) dual at coordinate i.
double projected_gradient(double g, double a, double c) {
  if (a <= 0.0) return std::min(g, 0.0);
  if (a >= c) return std::max(g, 0.0);
  return g;
}

void primal_from_dual(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& alpha,
                      Eigen::VectorXd& w, double& b) {
  w.setZero(x.rows());
  b = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double ay = alpha(i) * y[static_cast<std::size_t>(i)];
    if (ay != 0.0) {
      w.noalias() += ay * x.col(i);
      b += ay;
    }
  }
}

}  // namespace

BinarySvm fit_binary(const Eigen::MatrixXd& x, std::span<const int> y, const SvmOptions& opt) {
  check_inputs(x, y);
  if (!(opt.c > 0.0)) throw Error(ErrorCode::InvalidArgument, "SVM: C must be positive");
  const Eigen::Index n = x.cols();
  const double c = opt.c;

  Eigen::VectorXd qdiag = (x.colwise().squaredNorm().array() + 1.0).transpose();
  BinarySvm m;
  m.c = c;
  m.tol = opt.tol;
  m.alpha = Eigen::VectorXd::Zero(n);
  m.w = Eigen::VectorXd::Zero(x.rows());
  m.b = 0.0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(opt.seed);

  // Shrinking: coordinates stuck at a bound whose gradient points further out
  // of the box than anything seen last pass are set aside until the active
  // set converges, then everything is re-checked.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::size_t active = order.size();
  double pg_max_old = inf, pg_min_old = -inf;
  // The budget counts coordinate visits, so a sweep over a shrunk active set
  // costs only its share of a full pass.
  const double budget = static_cast<double>(opt.max_iter) * static_cast<double>(n);
  double visits = 0.0;
  for (int pass = 0; visits < budget; ++pass) {
    visits += static_cast<double>(active);
    std::shuffle(order.begin(), order.begin() + static_cast<long>(active), rng);
    double pg_max = -inf, pg_min = inf;
    std::size_t s = 0;
    while (s < active) {
      const Eigen::Index i = order[s];
      const int yi = y[static_cast<std::size_t>(i)];
      const double g = yi * (m.w.dot(x.col(i)) + m.b) - 1.0;
      const double a = m.alpha(i);
      double pg = 0.0;
      if (a <= 0.0) {
        if (g > pg_max_old) {
          std::swap(order[s], order[--active]);
          continue;
        }
        pg = std::min(g, 0.0);
      } else if (a >= c) {
        if (g < pg_min_old) {
          std::swap(order[s], order[--active]);
          continue;
        }
        pg = std::max(g, 0.0);
      } else {
        pg = g;
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg != 0.0) {
        const double a_new = std::clamp(a - g / qdiag(i), 0.0, c);
        const double d = (a_new - a) * yi;
        if (d != 0.0) {
          m.alpha(i) = a_new;
          m.w.noalias() += d * x.col(i);
          m.b += d;
        }
      }
      ++s;
    }
    m.passes = pass + 1;
    if (opt.on_pass) opt.on_pass(m.alpha);

    if (std::max(pg_max, -pg_min) <= opt.tol) {
      if (active == order.size()) {
        // The in-pass check used a moving w; confirm against the exact primal.
        primal_from_dual(x, y, m.alpha, m.w, m.b);
        if (max_kkt_violation(m, x, y) <= opt.tol) {
          m.converged = true;
          break;
        }
      }
      active = order.size();
      pg_max_old = inf;
      pg_min_old = -inf;
      continue;
    }
    pg_max_old = pg_max > 0.0 ? pg_max : inf;
    pg_min_old = pg_min < 0.0 ? pg_min : -inf;
  }
  primal_from_dual(x, y, m.alpha, m.w, m.b);
  return m;
}

double dual_objective(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd w;
  double b;
  primal_from_dual(x, y, alpha, w, b);
  return alpha.sum() - 0.5 * (w.squaredNorm() + b * b);
}

double max_kkt_violation(const BinarySvm& svm, const Eigen::MatrixXd& x, std::span<const int> y) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double g = y[static_cast<std::size_t>(i)] * svm.score(x.col(i)) - 1.0;
    worst = std::max(worst, std::abs(projected_gradient(g, svm.alpha(i), svm.c)));
  }
  return worst;
}

OvrClassifier::OvrClassifier(std::vector<BinarySvm> machines, Eigen::VectorXd mean, Eigen::VectorXd stdev)
    : machines_(std::move(machines)), mean_(std::move(mean)), stdev_(std::move(stdev)) {
  for (const auto& m : machines_)
    if (m.w.size() != mean_.size())
      throw Error(ErrorCode::DimensionMismatch, "OVR machine weight size differs from feature size");
  if (stdev_.size() != mean_.size())
    throw Error(ErrorCode::DimensionMismatch, "standardization vectors differ in size");
  stdev_ = stdev_.cwiseMax(kStdFloor);
}

OvrClassifier OvrClassifier::fit(const Eigen::MatrixXd& x, std::span<const int> labels, std::size_t n_classes,
                                 const SvmOptions& opt) {
  if (static_cast<std::size_t>(x.cols()) != labels.size())
    throw Error(ErrorCode::DimensionMismatch, "OVR: one label per sample column required");
  if (x.cols() < 2) throw Error(ErrorCode::InvalidArgument, "OVR: need at least 2 samples");
  if (!x.allFinite()) throw Error(ErrorCode::NonFinite, "OVR: non-finite features");
  const double n = static_cast<double>(x.cols());
  Eigen::VectorXd mean = x.rowwise().mean();
  Eigen::VectorXd stdev = ((x.colwise() - mean).array().square().rowwise().sum() / n).sqrt().matrix();
  stdev = stdev.cwiseMax(kStdFloor);
  const Eigen::MatrixXd z = (x.colwise() - mean).array().colwise() / stdev.array();

  std::vector<BinarySvm> machines(n_classes);
  const long nk = static_cast<long>(n_classes);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < nk; ++k) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == k ? 1 : -1;
    SvmOptions o = opt;
    o.seed = opt.seed + static_cast<std::uint64_t>(k);
    o.on_pass = nullptr;
    machines[static_cast<std::size_t>(k)] = fit_binary(z, y, o);
  }
  return OvrClassifier(std::move(machines), std::move(mean), std::move(stdev));
}

Eigen::VectorXd OvrClassifier::standardize(const Eigen::VectorXd& f) const {
  if (f.size() != mean_.size())
    throw Error(ErrorCode::DimensionMismatch, "feature vector has " + std::to_string(f.size()) +
                                                  " entries, classifier expects " + std::to_string(mean_.size()));
  return ((f - mean_).array() / stdev_.array()).matrix();
}

Eigen::VectorXd OvrClassifier::decision_scores(const Eigen::VectorXd& f) const {
  const Eigen::VectorXd z = standardize(f);
  Eigen::VectorXd s(static_cast<Eigen::Index>(machines_.size()));
  for (std::size_t k = 0; k < machines_.size(); ++k) s(static_cast<Eigen::Index>(k)) = machines_[k].score(z);
  return s;
}

int OvrClassifier::predict(const Eigen::VectorXd& f) const { return argmax_lowest(decision_scores(f)); }

int argmax_lowest(const Eigen::VectorXd& scores) {
  int best = 0;
  for (Eigen::Index k = 1; k < scores.size(); ++k)
    if (scores(k) > scores(best)) best = static_cast<int>(k);
  return best;
}

}  // namespace bts
