#include "bts/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bts {

std::size_t window_count(std::size_t length, std::size_t window, std::size_t hop) {
  if (window == 0 || hop == 0) throw Error(ErrorCode::InvalidArgument, "window and hop must be positive");
  return length < window ? 0 : (length - window) / hop + 1;
}

WindowStream::WindowStream(const EegRecording& rec, double window_ms, double hop_ms)
    : rec_(&rec),
      window_(ms_to_samples(window_ms, rec.fs_hz)),
      hop_(ms_to_samples(hop_ms, rec.fs_hz)),
      count_(window_count(rec.n_samples(), window_, hop_)) {}

std::optional<WindowStream::Window> WindowStream::next() {
  if (index_ >= count_) return std::nullopt;
  const std::size_t start = index_ * hop_;
  ++index_;
  return Window{1000.0 * static_cast<double>(start) / rec_->fs_hz,
                rec_->samples.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(window_))};
}

WindowStream window_stream(const EegRecording& rec, double window_ms, double hop_ms) {
  return WindowStream(rec, window_ms, hop_ms);
}

WindowVote classify_window(const CspBank& bank, const OvrClassifier& clf, const Signal& window,
                           double window_start_ms) {
  WindowVote v;
  v.window_start_ms = window_start_ms;
  v.scores = clf.decision_scores(extract_features(bank, window));
  v.predicted = argmax_lowest(v.scores);
  return v;
}

DecisionEvent decide_epoch(std::span<const WindowVote> votes, std::size_t n_classes) {
  if (votes.empty()) throw Error(ErrorCode::EmptyVotes, "cannot decide an epoch from an empty vote list");
  DecisionEvent ev;
  ev.epoch_start_ms = votes.front().window_start_ms;
  ev.histogram.assign(n_classes, 0);
  std::vector<double> score_sum(n_classes, 0.0);
  for (const auto& v : votes) {
    if (v.predicted < 0 || static_cast<std::size_t>(v.predicted) >= n_classes)
      throw Error(ErrorCode::InvalidArgument, "vote class index out of range");
    ++ev.histogram[static_cast<std::size_t>(v.predicted)];
  }
  const int top = *std::max_element(ev.histogram.begin(), ev.histogram.end());
  std::vector<int> tied;
  for (std::size_t k = 0; k < n_classes; ++k)
    if (ev.histogram[k] == top) tied.push_back(static_cast<int>(k));

  ev.command = tied.front();
  ev.tie_broken = tied.size() > 1;
  if (ev.tie_broken) {
    // Sum in a fixed order so the result does not depend on vote order beyond rounding.
    std::vector<std::vector<double>> per_class(n_classes);
    for (const auto& v : votes)
      for (int k : tied) per_class[static_cast<std::size_t>(k)].push_back(v.scores(k));
    for (int k : tied) {
      auto& s = per_class[static_cast<std::size_t>(k)];
      std::sort(s.begin(), s.end());
      score_sum[static_cast<std::size_t>(k)] = std::accumulate(s.begin(), s.end(), 0.0);
    }
    for (int k : tied)
      if (score_sum[static_cast<std::size_t>(k)] > score_sum[static_cast<std::size_t>(ev.command)]) ev.command = k;
  }
  ev.votes.assign(votes.begin(), votes.end());
  return ev;
}

StreamingDecoder::StreamingDecoder(const Model& model, std::vector<DecisionEpoch> epochs) : model_(&model) {
  const auto& cfg = model.config;
  cfg.validate(model.fs_hz);
  filter_ = design_bandpass(cfg.band_lo_hz, cfg.band_hi_hz, model.fs_hz, cfg.filter_order);
  filter_.reset(static_cast<std::size_t>(model.n_channels));
  window_ = ms_to_samples(cfg.window_ms, model.fs_hz);
  hop_ = ms_to_samples(cfg.hop_ms, model.fs_hz);
  block_ = std::gcd(window_, hop_);
  per_window_ = window_ / block_;
  pending_.resize(model.n_channels, static_cast<Eigen::Index>(block_));

  const std::size_t decision = ms_to_samples(cfg.decision_ms, model.fs_hz);
  std::stable_sort(epochs.begin(), epochs.end(),
                   [](const DecisionEpoch& a, const DecisionEpoch& b) { return a.start_ms < b.start_ms; });
  for (auto& e : epochs) {
    if (e.start_ms < 0) throw Error(ErrorCode::InvalidArgument, "decision epoch starts before the recording");
    const auto s = static_cast<std::size_t>(std::llround(e.start_ms * model.fs_hz / 1000.0));
    epochs_.push_back(OpenEpoch{s, s + decision, e, {}, false});
  }
}

void StreamingDecoder::push(const Signal& chunk) {
  if (chunk.rows() != model_->n_channels)
    throw Error(ErrorCode::DimensionMismatch, "chunk has " + std::to_string(chunk.rows()) +
                                                  " channels, model expects " + std::to_string(model_->n_channels));
  Signal x = chunk;
  kernels::filter_channels(filter_, x, kernels::Exec::Parallel);
  std::size_t col = 0;
  const auto n = static_cast<std::size_t>(x.cols());
  while (col < n) {
    const std::size_t take = std::min(block_ - pending_fill_, n - col);
    pending_.middleCols(static_cast<Eigen::Index>(pending_fill_), static_cast<Eigen::Index>(take)) =
        x.middleCols(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(take));
    pending_fill_ += take;
    col += take;
    if (pending_fill_ == block_) {
      process_block();
      pending_fill_ = 0;
    }
  }
}

void StreamingDecoder::process_block() {
  const std::size_t b0 = blocks_done_ * block_;
  const std::size_t b1 = b0 + block_;
  ++blocks_done_;

  while (first_open_ < epochs_.size() && epochs_[first_open_].closed) ++first_open_;
  bool needed = false;
  for (std::size_t i = first_open_; i < epochs_.size() && epochs_[i].start < b1; ++i)
    if (!epochs_[i].closed && epochs_[i].end > b0) {
      needed = true;
      break;
    }
  if (needed) recent_.emplace_back(kernels::block_stats(pending_, 0, block_));
  else recent_.emplace_back(std::nullopt);
  if (recent_.size() > per_window_) recent_.pop_front();

  // The window ending at this block boundary, if it is on the hop grid.
  if (b1 >= window_ && (b1 - window_) % hop_ == 0 && recent_.size() == per_window_) {
    const std::size_t ws = b1 - window_;
    std::optional<WindowVote> vote;
    for (std::size_t i = first_open_; i < epochs_.size() && epochs_[i].start <= ws; ++i) {
      auto& e = epochs_[i];
      if (e.closed || ws + window_ > e.end) continue;
      if (!vote) {
        std::vector<kernels::BlockStats> blocks;
        blocks.reserve(per_window_);
        for (auto& b : recent_) blocks.push_back(*b);
        const Eigen::MatrixXd cov = kernels::covariance_from_blocks(blocks);
        WindowVote v;
        v.window_start_ms = 1000.0 * static_cast<double>(ws) / model_->fs_hz;
        v.scores = model_->classifier.decision_scores(features_from_covariance(model_->bank, cov));
        v.predicted = argmax_lowest(v.scores);
        vote = std::move(v);
        ++windows_classified_;
      }
      e.votes.push_back(*vote);
    }
  }

  for (std::size_t i = first_open_; i < epochs_.size() && epochs_[i].start < b1; ++i) {
    auto& e = epochs_[i];
    if (e.closed || e.end > b1) continue;
    e.closed = true;
    if (e.votes.empty()) continue;
    DecisionEvent ev = decide_epoch(e.votes, model_->vocab.size());
    ev.epoch_start_ms = e.spec.start_ms;
    ev.truth = e.spec.truth;
    events_.push_back(std::move(ev));
    e.votes.clear();
  }
}

std::size_t StreamingDecoder::finish() {
  std::size_t dropped = 0;
  for (auto& e : epochs_)
    if (!e.closed) {
      e.closed = true;
      ++dropped;
    }
  return dropped;
}

PseudoOnlineResult run_pseudo_online(const EegRecording& rec, const Model& model, const PipelineConfig& config,
                                     std::vector<DecisionEpoch> epochs, double chunk_ms) {
  if (!(config == model.config))
    throw Error(ErrorCode::ConfigMismatch, "decoding config differs from the config the model was trained with");
  if (std::abs(rec.fs_hz - model.fs_hz) > 1e-9)
    throw Error(ErrorCode::ConfigMismatch, "recording fs " + std::to_string(rec.fs_hz) + " Hz differs from model fs " +
                                               std::to_string(model.fs_hz) + " Hz");
  if (static_cast<int>(rec.n_channels()) != model.n_channels)
    throw Error(ErrorCode::ConfigMismatch, "recording has " + std::to_string(rec.n_channels()) +
                                               " channels, model expects " + std::to_string(model.n_channels));

  StreamingDecoder dec(model, std::move(epochs));
  const std::size_t chunk = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(chunk_ms * rec.fs_hz / 1000.0)));
  const std::size_t n = rec.n_samples();
  for (std::size_t s = 0; s < n; s += chunk) {
    const std::size_t take = std::min(chunk, n - s);
    dec.push(rec.samples.middleCols(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(take)));
  }

  PseudoOnlineResult r;
  r.incomplete_epochs = dec.finish();
  r.events = dec.events();
  r.windows_classified = dec.windows_classified();
  r.short_recording = n < ms_to_samples(config.window_ms, rec.fs_hz);
  const std::size_t k = model.vocab.size();
  r.confusion.assign(k, std::vector<int>(k, 0));
  for (const auto& ev : r.events) {
    if (ev.tie_broken) ++r.ties;
    if (!ev.truth) continue;
    ++r.n_scored;
    ++r.confusion[static_cast<std::size_t>(*ev.truth)][static_cast<std::size_t>(ev.command)];
    if (*ev.truth == ev.command) ++r.n_correct;
  }
  r.accuracy = r.n_scored ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_scored) : 0.0;
  return r;
}

}  // namespace bts
