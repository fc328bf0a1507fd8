#pragma once

// Data-parallel kernels. Each has a serial reference path and an OpenMP path
// that splits the same per-item work across threads; both produce bit-identical
// results because no reduction crosses an item boundary.

#include "bts/core_types.hpp"
#include "bts/csp.hpp"
#include "bts/dsp.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bts::kernels {

enum class Exec { Serial, Parallel };

// Per-channel causal filtering (channels are independent streams).
void filter_channels(BiquadCascade& filter, Signal& x, Exec exec);
void filter_channels(BiquadCascade& filter, SignalD& x, Exec exec);

// Sufficient statistics of a run of samples: uncentered scatter XX', row sums, count.
struct BlockStats {
  Eigen::MatrixXd scatter;
  Eigen::VectorXd sum;
  std::size_t n = 0;
};

BlockStats block_stats(const Signal& x, std::size_t first_col, std::size_t n_cols);

// Mean-removed covariance (1/n) of the concatenation of consecutive blocks.
Eigen::MatrixXd covariance_from_blocks(std::span<const BlockStats> blocks);

// Statistics of one analysis span (a training epoch): the uncentered scatter of
// the whole span and the covariance of every window at offsets 0, hop, 2 hop, ...
// that fits inside it. Windows are assembled from blocks of gcd(window, hop) samples.
struct SpanWindows {
  Eigen::MatrixXd scatter;
  std::vector<Eigen::MatrixXd> window_covs;
};

SpanWindows span_window_stats(const Signal& x, std::size_t start, std::size_t length, std::size_t window,
                              std::size_t hop);

std::vector<SpanWindows> batch_span_window_stats(const Signal& x, std::span<const std::size_t> starts,
                                                 std::size_t length, std::size_t window, std::size_t hop,
                                                 Exec exec);

// Feature matrix (feature_dim x covs.size()), one column per window covariance.
Eigen::MatrixXd batch_features(const CspBank& bank, std::span<const Eigen::MatrixXd> covs, Exec exec);

}  // namespace bts::kernels
