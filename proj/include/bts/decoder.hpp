#pragma once

#include "bts/core_types.hpp"
#include "bts/dsp.hpp"
#include "bts/kernels.hpp"
#include "bts/model.hpp"

#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace bts {

struct WindowVote {
  double window_start_ms = 0.0;
  int predicted = 0;
  Eigen::VectorXd scores;
};

struct DecisionEvent {
  double epoch_start_ms = 0.0;
  int command = 0;
  std::vector<WindowVote> votes;
  std::vector<int> histogram;  // votes per class
  bool tie_broken = false;
  std::optional<int> truth;
};

// Sliding windows over a recording: starts at 0, hop, 2 hop, ... while the
// window fits. A recording shorter than one window yields nothing.
class WindowStream {
 public:
  struct Window {
    double start_ms;
    Signal samples;
  };

  WindowStream(const EegRecording& rec, double window_ms, double hop_ms);

  std::size_t count() const { return count_; }
  std::optional<Window> next();

 private:
  const EegRecording* rec_;
  std::size_t window_, hop_, count_, index_ = 0;
};

WindowStream window_stream(const EegRecording& rec, double window_ms, double hop_ms);

// floor((length - window) / hop) + 1 for length >= window, else 0.
std::size_t window_count(std::size_t length, std::size_t window, std::size_t hop);

WindowVote classify_window(const CspBank& bank, const OvrClassifier& clf, const Signal& window,
                           double window_start_ms = 0.0);

// Majority vote. Ties go to the tied class with the largest summed decision
// score over all votes, then to the lowest index.
DecisionEvent decide_epoch(std::span<const WindowVote> votes, std::size_t n_classes);

struct DecisionEpoch {
  double start_ms = 0.0;
  std::optional<int> truth;
};

// One decoding session: causal filter state, a partial-block buffer and the
// recent block statistics. Chunk boundaries never change the output.
class StreamingDecoder {
 public:
  StreamingDecoder(const Model& model, std::vector<DecisionEpoch> epochs);

  // Raw (unfiltered) samples, channels x n.
  void push(const Signal& chunk);
  // Drops epochs that the stream never completed; returns how many.
  std::size_t finish();

  const std::vector<DecisionEvent>& events() const { return events_; }
  std::size_t windows_classified() const { return windows_classified_; }

 private:
  struct OpenEpoch {
    std::size_t start, end;  // samples
    DecisionEpoch spec;
    std::vector<WindowVote> votes;
    bool closed = false;
  };

  void process_block();

  const Model* model_;
  BiquadCascade filter_;
  std::size_t window_, hop_, block_, per_window_;
  Signal pending_;
  std::size_t pending_fill_ = 0;
  std::size_t blocks_done_ = 0;
  std::deque<std::optional<kernels::BlockStats>> recent_;
  std::vector<OpenEpoch> epochs_;
  std::size_t first_open_ = 0;
  std::vector<DecisionEvent> events_;
  std::size_t windows_classified_ = 0;
};

struct PseudoOnlineResult {
  std::vector<DecisionEvent> events;
  std::size_t windows_classified = 0;
  std::size_t incomplete_epochs = 0;
  bool short_recording = false;  // shorter than one analysis window
  std::size_t n_scored = 0;
  std::size_t n_correct = 0;
  std::size_t ties = 0;
  double accuracy = 0.0;
  std::vector<std::vector<int>> confusion;  // [truth][command]
};

// Replays a raw recording through a streaming session in chunk_ms pieces and
// scores each decision epoch against its truth label.
PseudoOnlineResult run_pseudo_online(const EegRecording& rec, const Model& model, const PipelineConfig& config,
                                     std::vector<DecisionEpoch> epochs, double chunk_ms = 1000.0);

}  // namespace bts
