#include "bts/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bts {

namespace {

std::vector<int> labels_of(const std::vector<Annotation>& trials, const Vocabulary& vocab) {
  std::vector<int> labels;
  labels.reserve(trials.size());
  for (const auto& a : trials) labels.push_back(*vocab.index_of(a.label));
  std::vector<int> count(vocab.size(), 0);
  for (int l : labels) ++count[static_cast<std::size_t>(l)];
  for (std::size_t k = 0; k < vocab.size(); ++k)
    if (count[k] == 0)
      throw Error(ErrorCode::MissingClass, "class '" + vocab.label(static_cast<int>(k)) + "' has no trials in the recording");
  return labels;
}

TrialSplit split_named(const std::vector<int>& labels, const Vocabulary& vocab, const PipelineConfig& config) {
  const SplitSpec spec{config.n_train, config.n_test, config.rng_seed};
  std::vector<int> count(vocab.size(), 0);
  for (int l : labels) ++count[static_cast<std::size_t>(l)];
  for (std::size_t k = 0; k < vocab.size(); ++k)
    if (count[k] < spec.n_train + spec.n_test)
      throw Error(ErrorCode::InsufficientTrials, "class '" + vocab.label(static_cast<int>(k)) + "' has " +
                                                     std::to_string(count[k]) + " trials, need " +
                                                     std::to_string(spec.n_train + spec.n_test));
  return split_trials(labels, vocab.size(), spec);
}

}  // namespace

TrainResult train_pipeline(EegRecording rec, const Vocabulary& vocab, const PipelineConfig& config,
                           const TrainOptions& options) {
  rec.validate();
  config.validate(rec.fs_hz);

  TrainResult out;
  out.trials = select_annotations(rec.annotations, vocab);
  std::vector<int> labels = labels_of(out.trials, vocab);
  out.split = split_named(labels, vocab, config);

  const std::size_t epoch_len = ms_to_samples(config.decision_ms, rec.fs_hz);
  const std::size_t window = ms_to_samples(config.window_ms, rec.fs_hz);
  const std::size_t hop = ms_to_samples(config.hop_ms, rec.fs_hz);

  std::vector<std::size_t> starts;
  std::vector<int> train_labels;
  for (std::size_t i : out.split.train) {
    const auto& a = out.trials[i];
    const double s = std::round(a.time_ms * rec.fs_hz / 1000.0);
    if (a.time_ms < 0 || s + static_cast<double>(epoch_len) > static_cast<double>(rec.n_samples()))
      throw Error(ErrorCode::EpochOverrun, "epoch overruns recording: '" + a.label + "' at " + std::to_string(a.time_ms) + " ms");
    starts.push_back(static_cast<std::size_t>(s));
    train_labels.push_back(labels[i]);
  }
  if (options.shuffle_labels) {
    std::mt19937_64 rng(config.rng_seed ^ 0x5eed5eed5eed5eedULL);
    std::shuffle(train_labels.begin(), train_labels.end(), rng);
  }

  BiquadCascade filter = design_bandpass(config.band_lo_hz, config.band_hi_hz, rec.fs_hz, config.filter_order);
  filter.reset(rec.n_channels());
  kernels::filter_channels(filter, rec.samples, options.exec);

  std::vector<kernels::SpanWindows> spans =
      kernels::batch_span_window_stats(rec.samples, starts, epoch_len, window, hop, options.exec);
  const int n_channels = static_cast<int>(rec.n_channels());
  rec.samples.resize(0, 0);

  std::vector<Eigen::MatrixXd> trial_covs;
  trial_covs.reserve(spans.size());
  for (const auto& s : spans) trial_covs.push_back(shrink_normalized(s.scatter, config.covariance_shrinkage));

  Model& model = out.model;
  model.config = config;
  model.vocab = vocab;
  model.fs_hz = rec.fs_hz;
  model.n_channels = n_channels;
  model.bank = fit_csp_bank(trial_covs, train_labels, vocab.size(), config.n_csp_pairs);
  trial_covs.clear();

  std::vector<Eigen::MatrixXd> window_covs;
  std::vector<int> window_labels;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    for (auto& c : spans[i].window_covs) {
      window_covs.push_back(std::move(c));
      window_labels.push_back(train_labels[i]);
    }
  }
  spans.clear();
  const Eigen::MatrixXd features = kernels::batch_features(model.bank, window_covs, options.exec);
  window_covs.clear();

  SvmOptions svm;
  svm.c = config.svm_c;
  svm.tol = config.svm_tol;
  svm.max_iter = config.svm_max_iter;
  svm.seed = config.rng_seed;
  model.classifier = OvrClassifier::fit(features, window_labels, vocab.size(), svm);

  model.meta.split_seed = config.rng_seed;
  model.meta.dataset_hash = options.dataset_hash;
  model.meta.shuffled_labels = options.shuffle_labels;
  model.meta.train_counts.assign(vocab.size(), 0);
  for (int l : train_labels) ++model.meta.train_counts[static_cast<std::size_t>(l)];
  model.meta.n_train_windows = static_cast<int>(window_labels.size());
  for (const auto& m : model.classifier.machines())
    if (!m.converged) ++model.meta.svm_unconverged;
  return out;
}

std::vector<DecisionEpoch> test_epochs(const EegRecording& rec, const Vocabulary& vocab, const PipelineConfig& config) {
  const std::vector<Annotation> trials = select_annotations(rec.annotations, vocab);
  const std::vector<int> labels = labels_of(trials, vocab);
  const TrialSplit split = split_named(labels, vocab, config);
  std::vector<DecisionEpoch> out;
  for (std::size_t i : split.test) out.push_back({trials[i].time_ms, labels[i]});
  return out;
}

std::vector<DecisionEpoch> all_epochs(const EegRecording& rec, const Vocabulary& vocab) {
  std::vector<DecisionEpoch> out;
  for (const auto& a : rec.annotations)
    if (auto k = vocab.index_of(a.label)) out.push_back({a.time_ms, *k});
  return out;
}

}  // namespace bts
