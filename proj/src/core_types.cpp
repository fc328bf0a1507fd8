#include "bts/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace bts {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::EpochOverrun: return "epoch overruns recording";
    case ErrorCode::InsufficientTrials: return "insufficient trials";
    case ErrorCode::MissingClass: return "missing class";
    case ErrorCode::Nyquist: return "band edge violates Nyquist";
    case ErrorCode::DegenerateCovariance: return "degenerate covariance";
    case ErrorCode::NotPositiveDefinite: return "not positive definite";
    case ErrorCode::SingleClass: return "single class";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::ConfigMismatch: return "config mismatch";
    case ErrorCode::NoBaseline: return "no baseline";
    case ErrorCode::EmptyVotes: return "empty vote list";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::VersionMismatch: return "version mismatch";
    case ErrorCode::TruncatedPayload: return "truncated payload";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
  }
  return "unknown";
}

Vocabulary::Vocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error(ErrorCode::InvalidArgument, "vocabulary must not be empty");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw Error(ErrorCode::InvalidArgument, "vocabulary label must not be empty");
    if (!seen.insert(l).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate vocabulary label '" + l + "'");
  }
}

Vocabulary Vocabulary::imagined_speech() {
  return Vocabulary({"ambulance", "clock", "hello", "help me", "light", "pain", "stop",
                     "thank you", "toilet", "TV", "water", "yes", "rest"});
}

Vocabulary Vocabulary::binary() { return Vocabulary({"help me", "rest"}); }

Vocabulary Vocabulary::parse(const std::string& csv) {
  if (csv.empty()) return imagined_speech();
  if (csv == "13") return imagined_speech();
  if (csv == "2" || csv == "binary") return binary();
  std::vector<std::string> labels;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    labels.push_back(b == std::string::npos ? std::string{} : item.substr(b, e - b + 1));
  }
  return Vocabulary(std::move(labels));
}

const std::string& Vocabulary::label(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= labels_.size())
    throw Error(ErrorCode::InvalidArgument, "class index " + std::to_string(index) + " out of range");
  return labels_[static_cast<std::size_t>(index)];
}

std::optional<int> Vocabulary::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<int>(it - labels_.begin());
}

std::string Vocabulary::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) out += ',';
    out += labels_[i];
  }
  return out;
}

void EegRecording::validate() const {
  if (samples.rows() < 1 || samples.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "recording needs at least one channel and one sample");
  if (!(fs_hz > 0.0) || !std::isfinite(fs_hz))
    throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");
  if (!channel_names.empty() && channel_names.size() != n_channels())
    throw Error(ErrorCode::DimensionMismatch, "channel name count does not match channel count");
  if (!samples.allFinite()) throw Error(ErrorCode::NonFinite, "recording contains non-finite samples");
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (!(band_lo_hz > 0.0) || !(band_lo_hz < band_hi_hz)) fail("need 0 < band_lo_hz < band_hi_hz");
  if (!(window_ms > 0.0) || !(hop_ms > 0.0)) fail("window_ms and hop_ms must be positive");
  if (decision_ms < window_ms) fail("decision_ms must be >= window_ms");
  double steps = (decision_ms - window_ms) / hop_ms;
  if (std::abs(steps - std::round(steps)) > 1e-9) fail("hop_ms must divide decision_ms - window_ms");
  if (n_csp_pairs < 1) fail("n_csp_pairs must be >= 1");
  if (!(svm_c > 0.0)) fail("svm_c must be positive");
  if (!(svm_tol > 0.0)) fail("svm_tol must be positive");
  if (svm_max_iter < 1) fail("svm_max_iter must be >= 1");
  if (!(covariance_shrinkage >= 0.0 && covariance_shrinkage <= 1.0))
    fail("covariance_shrinkage must lie in [0, 1]");
  if (filter_order < 2 || filter_order % 2 != 0) fail("filter_order must be even and >= 2");
  if (n_train < 1 || n_test < 1) fail("n_train and n_test must be >= 1");
}

void PipelineConfig::validate(double fs_hz) const {
  validate();
  if (!(band_hi_hz < fs_hz / 2.0))
    throw Error(ErrorCode::Nyquist, "band edge violates Nyquist: " + std::to_string(band_hi_hz) +
                                        " Hz >= fs/2 = " + std::to_string(fs_hz / 2.0) + " Hz");
  ms_to_samples(window_ms, fs_hz);
  ms_to_samples(hop_ms, fs_hz);
  ms_to_samples(decision_ms, fs_hz);
}

std::size_t ms_to_samples(double ms, double fs_hz) {
  double n = ms * fs_hz / 1000.0;
  double r = std::round(n);
  if (n < 0 || std::abs(n - r) > 1e-9 * std::max(1.0, r))
    throw Error(ErrorCode::InvalidArgument, std::to_string(ms) + " ms is not a whole number of samples at " +
                                                std::to_string(fs_hz) + " Hz");
  return static_cast<std::size_t>(r);
}

std::vector<TrialEpoch> extract_epochs(const EegRecording& rec, std::span<const Annotation> annotations,
                                       const Vocabulary& vocab, double duration_ms) {
  const std::size_t len = ms_to_samples(duration_ms, rec.fs_hz);
  if (len == 0) throw Error(ErrorCode::InvalidArgument, "epoch duration must be positive");
  std::vector<TrialEpoch> epochs;
  epochs.reserve(annotations.size());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    auto label = vocab.index_of(a.label);
    if (!label)
      throw Error(ErrorCode::InvalidArgument,
                  "annotation #" + std::to_string(i) + " has unknown label '" + a.label + "'");
    double start = std::round(a.time_ms * rec.fs_hz / 1000.0);
    if (a.time_ms < 0 || start + static_cast<double>(len) > static_cast<double>(rec.n_samples())) {
      std::ostringstream msg;
      msg << "epoch overruns recording: annotation #" << i << " ('" << a.label << "' at " << a.time_ms
          << " ms, " << duration_ms << " ms long) ends past " << rec.duration_ms() << " ms";
      throw Error(ErrorCode::EpochOverrun, msg.str());
    }
    TrialEpoch e;
    e.samples = rec.samples.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len));
    e.label = *label;
    e.fs_hz = rec.fs_hz;
    e.duration_ms = duration_ms;
    e.start_ms = a.time_ms;
    epochs.push_back(std::move(e));
  }
  return epochs;
}

std::vector<Annotation> select_annotations(std::span<const Annotation> annotations, const Vocabulary& vocab) {
  std::vector<Annotation> out;
  for (const auto& a : annotations)
    if (vocab.index_of(a.label)) out.push_back(a);
  return out;
}

TrialSplit split_trials(std::span<const int> labels, std::size_t n_classes, const SplitSpec& spec) {
  if (spec.n_train < 0 || spec.n_test < 0)
    throw Error(ErrorCode::InvalidArgument, "split sizes must be non-negative");
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes)
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(labels[i]) + " out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  const std::size_t need = static_cast<std::size_t>(spec.n_train + spec.n_test);
  std::mt19937_64 rng(spec.rng_seed);
  TrialSplit split;
  for (std::size_t k = 0; k < n_classes; ++k) {
    auto& idx = by_class[k];
    if (idx.size() < need)
      throw Error(ErrorCode::InsufficientTrials, "class " + std::to_string(k) + " has " +
                                                     std::to_string(idx.size()) + " trials, need " +
                                                     std::to_string(need));
    std::shuffle(idx.begin(), idx.end(), rng);
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + spec.n_train);
    split.test.insert(split.test.end(), idx.begin() + spec.n_train, idx.begin() + static_cast<long>(need));
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

TrialSplit split_trials(std::span<const TrialEpoch> epochs, std::size_t n_classes, const SplitSpec& spec) {
  std::vector<int> labels;
  labels.reserve(epochs.size());
  for (const auto& e : epochs) labels.push_back(e.label);
  return split_trials(labels, n_classes, spec);
}

}  // namespace bts
