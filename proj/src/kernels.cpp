#include "bts/kernels.hpp"

#include <numeric>

namespace bts::kernels {

namespace {

template <typename M>
void filter_impl(BiquadCascade& filter, M& x, Exec exec) {
  const auto n_ch = static_cast<std::size_t>(x.rows());
  if (filter.n_channels() != n_ch)
    throw Error(ErrorCode::DimensionMismatch, "filter state has " + std::to_string(filter.n_channels()) +
                                                  " channels, signal has " + std::to_string(n_ch));
  const auto n = static_cast<std::size_t>(x.cols());
  const long nc = static_cast<long>(n_ch);
  if (exec == Exec::Serial) {
    for (long c = 0; c < nc; ++c) filter.process_channel(static_cast<std::size_t>(c), x.row(c).data(), n);
    return;
  }
#pragma omp parallel for schedule(static)
  for (long c = 0; c < nc; ++c) filter.process_channel(static_cast<std::size_t>(c), x.row(c).data(), n);
}

}  // namespace

void filter_channels(BiquadCascade& filter, Signal& x, Exec exec) { filter_impl(filter, x, exec); }
void filter_channels(BiquadCascade& filter, SignalD& x, Exec exec) { filter_impl(filter, x, exec); }

BlockStats block_stats(const Signal& x, std::size_t first_col, std::size_t n_cols) {
  const Eigen::MatrixXd b =
      x.middleCols(static_cast<Eigen::Index>(first_col), static_cast<Eigen::Index>(n_cols)).cast<double>();
  BlockStats s;
  s.scatter = b * b.transpose();
  s.sum = b.rowwise().sum();
  s.n = n_cols;
  return s;
}

Eigen::MatrixXd covariance_from_blocks(std::span<const BlockStats> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::InvalidArgument, "no blocks to combine");
  Eigen::MatrixXd scatter = blocks.front().scatter;
  Eigen::VectorXd sum = blocks.front().sum;
  std::size_t n = blocks.front().n;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    scatter += blocks[i].scatter;
    sum += blocks[i].sum;
    n += blocks[i].n;
  }
  const double inv = 1.0 / static_cast<double>(n);
  const Eigen::VectorXd mu = sum * inv;
  return scatter * inv - mu * mu.transpose();
}

SpanWindows span_window_stats(const Signal& x, std::size_t start, std::size_t length, std::size_t window,
                              std::size_t hop) {
  if (window == 0 || hop == 0) throw Error(ErrorCode::InvalidArgument, "window and hop must be positive");
  if (start + length > static_cast<std::size_t>(x.cols()))
    throw Error(ErrorCode::EpochOverrun, "epoch overruns recording");
  const std::size_t block = std::gcd(window, hop);
  const std::size_t n_blocks = length / block;
  std::vector<BlockStats> blocks;
  blocks.reserve(n_blocks);
  for (std::size_t j = 0; j < n_blocks; ++j) blocks.push_back(block_stats(x, start + j * block, block));

  SpanWindows out;
  const auto ch = x.rows();
  out.scatter = Eigen::MatrixXd::Zero(ch, ch);
  for (const auto& b : blocks) out.scatter += b.scatter;
  if (n_blocks * block < length) out.scatter += block_stats(x, start + n_blocks * block, length - n_blocks * block).scatter;

  const std::size_t per_window = window / block;
  const std::size_t step = hop / block;
  for (std::size_t j0 = 0; j0 + per_window <= n_blocks; j0 += step)
    out.window_covs.push_back(covariance_from_blocks(std::span(blocks).subspan(j0, per_window)));
  return out;
}

std::vector<SpanWindows> batch_span_window_stats(const Signal& x, std::span<const std::size_t> starts,
                                                 std::size_t length, std::size_t window, std::size_t hop,
                                                 Exec exec) {
  std::vector<SpanWindows> out(starts.size());
  const long n = static_cast<long>(starts.size());
  if (exec == Exec::Serial) {
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = span_window_stats(x, starts[static_cast<std::size_t>(i)], length, window, hop);
    return out;
  }
  // Exceptions must not escape an OpenMP region; validate up front instead.
  for (auto s : starts)
    if (s + length > static_cast<std::size_t>(x.cols())) throw Error(ErrorCode::EpochOverrun, "epoch overruns recording");
  if (window == 0 || hop == 0) throw Error(ErrorCode::InvalidArgument, "window and hop must be positive");
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = span_window_stats(x, starts[static_cast<std::size_t>(i)], length, window, hop);
  return out;
}

Eigen::MatrixXd batch_features(const CspBank& bank, std::span<const Eigen::MatrixXd> covs, Exec exec) {
  for (const auto& c : covs)
    if (c.rows() != bank.n_channels || c.cols() != bank.n_channels)
      throw Error(ErrorCode::DimensionMismatch, "window covariance size does not match the CSP bank");
  Eigen::MatrixXd f(static_cast<Eigen::Index>(bank.feature_dim()), static_cast<Eigen::Index>(covs.size()));
  const long n = static_cast<long>(covs.size());
  if (exec == Exec::Serial) {
    for (long i = 0; i < n; ++i) f.col(i) = features_from_covariance(bank, covs[static_cast<std::size_t>(i)]);
    return f;
  }
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) f.col(i) = features_from_covariance(bank, covs[static_cast<std::size_t>(i)]);
  return f;
}

}  // namespace bts::kernels
