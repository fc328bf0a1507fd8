#pragma once

#include "bts/core_types.hpp"

#include <cstdint>
#include <vector>

namespace bts {

// Synthetic continuous EEG with cue-aligned trials. Background is 1/f noise
// with a fixed spatial correlation (shared latent sources plus independent
// per-channel noise), unit-normalized to noise_rms_uv on every channel. During
// a trial of class k a band-limited source s_k(t) (unit RMS) is added along the
// unit mixing vector a_k with amplitude snr * noise_rms_uv. "rest" trials carry
// no source.
struct SynthSpec {
  Vocabulary vocab = Vocabulary::imagined_speech();
  int channels = 64;
  double fs_hz = 1000.0;
  int trials_per_class = 100;
  double trial_ms = 2000.0;
  double lead_in_ms = 1000.0;
  double snr = 2.0;
  double noise_rms_uv = 10.0;
  double noise_correlation = 0.5;  // share of noise variance from latent sources
  int latent_sources = 8;
  double source_lo_hz = 30.0;
  double source_hi_hz = 120.0;
  double min_mixing_angle_deg = 30.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct SynthManifest {
  SynthSpec spec;
  std::vector<int> trial_labels;            // in presentation order
  std::vector<double> trial_start_ms;
  Eigen::MatrixXd mixing;                   // channels x classes, unit columns
  Eigen::MatrixXd latent_loading;           // channels x latent, unit rows
};

struct SynthSession {
  EegRecording recording;
  SynthManifest manifest;
};

SynthSession generate_session(const SynthSpec& spec);

// Background noise only (no trials, no annotations), same construction as the session.
EegRecording generate_noise(const SynthSpec& spec, double duration_ms);

}  // namespace bts
