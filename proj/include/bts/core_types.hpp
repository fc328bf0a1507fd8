#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bts {

// Every signal in the library is stored channels x time, one contiguous row per
// channel. Amplitudes are microvolts, times are milliseconds, rates are Hz.
using Signal = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SignalD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ErrorCode {
  InvalidArgument,
  EpochOverrun,
  InsufficientTrials,
  MissingClass,
  Nyquist,
  DegenerateCovariance,
  NotPositiveDefinite,
  SingleClass,
  NonFinite,
  DimensionMismatch,
  ConfigMismatch,
  NoBaseline,
  EmptyVotes,
  BadMagic,
  VersionMismatch,
  TruncatedPayload,
  Io,
  Parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Ordered class labels; the position of a label is its class index.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> labels);

  // The twelve imagined words/phrases followed by "rest" (K = 13).
  static Vocabulary imagined_speech();
  // "help me" vs "rest".
  static Vocabulary binary();
  // Comma separated list, e.g. "help me,rest". An empty string yields imagined_speech().
  static Vocabulary parse(const std::string& csv);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(int index) const;
  std::optional<int> index_of(const std::string& label) const;
  const std::vector<std::string>& labels() const { return labels_; }
  std::string to_csv() const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> labels_;
};

struct Annotation {
  double time_ms = 0.0;
  std::string label;

  bool operator==(const Annotation&) const = default;
};

struct EegRecording {
  Signal samples;  // channels x time, microvolts
  double fs_hz = 0.0;
  std::vector<std::string> channel_names;
  std::vector<Annotation> annotations;

  std::size_t n_channels() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t n_samples() const { return static_cast<std::size_t>(samples.cols()); }
  double duration_ms() const { return fs_hz > 0 ? 1000.0 * n_samples() / fs_hz : 0.0; }

  // Throws on empty data, non-finite samples, bad fs or a channel-name count mismatch.
  void validate() const;
};

struct TrialEpoch {
  Signal samples;  // channels x time
  int label = 0;
  double fs_hz = 0.0;
  double duration_ms = 0.0;
  double start_ms = 0.0;  // position in the source recording
};

struct PipelineConfig {
  double band_lo_hz = 30.0;
  double band_hi_hz = 120.0;
  double window_ms = 1000.0;
  double hop_ms = 100.0;
  double decision_ms = 2000.0;
  int n_csp_pairs = 2;
  double svm_c = 1.0;
  double svm_tol = 1e-4;
  int svm_max_iter = 100000;
  double covariance_shrinkage = 0.05;
  int filter_order = 4;
  std::uint64_t rng_seed = 0;
  int n_train = 80;
  int n_test = 20;

  // Checks the sampling-rate independent invariants.
  void validate() const;
  // Adds the checks that need the sampling rate (Nyquist, integral sample counts).
  void validate(double fs_hz) const;

  bool operator==(const PipelineConfig&) const = default;
};

struct SplitSpec {
  int n_train = 80;
  int n_test = 20;
  std::uint64_t rng_seed = 0;
};

// Indices into the epoch (or label) list that was split.
struct TrialSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Converts a duration to a sample count; throws unless it is an integral number of samples.
std::size_t ms_to_samples(double ms, double fs_hz);

// One epoch per annotation, labels mapped through the vocabulary.
std::vector<TrialEpoch> extract_epochs(const EegRecording& rec,
                                       std::span<const Annotation> annotations,
                                       const Vocabulary& vocab, double duration_ms);

// Keeps only the annotations whose label belongs to the vocabulary (binary mode).
std::vector<Annotation> select_annotations(std::span<const Annotation> annotations,
                                           const Vocabulary& vocab);

// Stratified random split. Classes are visited in index order with one seeded
// generator, so the result depends only on the label sequence and the seed.
// Trials beyond n_train + n_test in a class are left out of both sets.
TrialSplit split_trials(std::span<const int> labels, std::size_t n_classes, const SplitSpec& spec);
TrialSplit split_trials(std::span<const TrialEpoch> epochs, std::size_t n_classes,
                        const SplitSpec& spec);

}  // namespace bts
