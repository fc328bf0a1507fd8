#pragma once

#include "bts/core_types.hpp"
#include "bts/decoder.hpp"
#include "bts/kernels.hpp"
#include "bts/model.hpp"

#include <string>
#include <vector>

namespace bts {

struct TrainOptions {
  bool shuffle_labels = false;  // permutes training labels (null model)
  std::string dataset_hash;
  kernels::Exec exec = kernels::Exec::Parallel;
};

struct TrainResult {
  Model model;
  TrialSplit split;                 // indices into the vocabulary-filtered annotations
  std::vector<Annotation> trials;   // the vocabulary-filtered annotations
};

// Calibration: causal band-pass over the whole recording, stratified split,
// one-vs-rest CSP on the training epochs, then the SVM ensemble on the
// log-variance features of every analysis window inside those epochs.
TrainResult train_pipeline(EegRecording rec, const Vocabulary& vocab, const PipelineConfig& config,
                           const TrainOptions& options = {});

// The cue-aligned decision epochs of the held-out trials, reproduced from the
// same split seed, with their truth labels.
std::vector<DecisionEpoch> test_epochs(const EegRecording& rec, const Vocabulary& vocab,
                                       const PipelineConfig& config);
// Every vocabulary trial in the recording.
std::vector<DecisionEpoch> all_epochs(const EegRecording& rec, const Vocabulary& vocab);

}  // namespace bts
