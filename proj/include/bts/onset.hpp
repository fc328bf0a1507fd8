#pragma once

#include "bts/core_types.hpp"

#include <span>
#include <vector>

namespace bts {

// Amplitude-based imagery onset detector. The input is causally band-passed to
// [band_lo_hz, band_hi_hz]; the statistic is the channel-averaged RMS over
// consecutive non-overlapping frames of rms_window_ms, z-scored against
// a baseline fitted on rest data. An onset is declared when a run of at least
// consecutive_required supra-threshold frames starts after a sub-threshold
// frame and at least refractory_ms after the previous onset.
struct OnsetConfig {
  double rms_window_ms = 100.0;
  double threshold_z = 2.5;
  int consecutive_required = 2;
  double refractory_ms = 1000.0;
  double band_lo_hz = 30.0;
  double band_hi_hz = 120.0;
  int filter_order = 4;
};

class OnsetDetector {
 public:
  explicit OnsetDetector(OnsetConfig config = {});

  const OnsetConfig& config() const { return config_; }
  bool fitted() const { return fitted_; }
  double baseline_mean() const { return mean_; }
  double baseline_std() const { return std_; }

  // Fits baseline statistics from one or more rest segments (same fs).
  void fit_baseline(std::span<const Signal> rest_segments, double fs_hz);

  // Channel-averaged RMS of every complete frame of x, without band-passing.
  std::vector<double> frame_rms(const Signal& x, double fs_hz) const;
  // Band-passes x (fresh filter state), then frame_rms.
  std::vector<double> statistic(const Signal& x, double fs_hz) const;

  // Onset times in ms. Each onset is stamped at the end of the first frame of
  // its supra-threshold run, the earliest time the change is observable causally.
  std::vector<double> detect(const EegRecording& rec) const;

 private:
  OnsetConfig config_;
  bool fitted_ = false;
  double mean_ = 0.0;
  double std_ = 0.0;
};

std::vector<double> detect_onsets(const EegRecording& rec, const OnsetDetector& det);

}  // namespace bts
