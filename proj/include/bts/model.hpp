#pragma once

#include "bts/core_types.hpp"
#include "bts/csp.hpp"
#include "bts/svm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bts {

struct TrainingMeta {
  std::uint64_t split_seed = 0;
  std::string dataset_hash;  // FNV-1a 64 of the dataset file, hex; empty when trained in memory
  bool shuffled_labels = false;
  std::vector<int> train_counts;  // per class
  int n_train_windows = 0;
  int svm_unconverged = 0;
};

// Everything a decoding session needs: the calibration config, the label set,
// the recording geometry it was fitted on, and the fitted stages.
struct Model {
  PipelineConfig config;
  Vocabulary vocab;
  double fs_hz = 0.0;
  int n_channels = 0;
  CspBank bank;
  OvrClassifier classifier;
  TrainingMeta meta;
};

}  // namespace bts
