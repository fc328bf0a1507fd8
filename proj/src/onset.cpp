#include "bts/onset.hpp"
#include "bts/dsp.hpp"

#include <cmath>

namespace bts {

OnsetDetector::OnsetDetector(OnsetConfig config) : config_(config) {
  if (!(config_.rms_window_ms > 0.0)) throw Error(ErrorCode::InvalidArgument, "rms_window_ms must be positive");
  if (!(config_.threshold_z > 0.0)) throw Error(ErrorCode::InvalidArgument, "onset threshold must be positive");
  if (config_.consecutive_required < 1) throw Error(ErrorCode::InvalidArgument, "consecutive_required must be >= 1");
  if (config_.refractory_ms < 0.0) throw Error(ErrorCode::InvalidArgument, "refractory_ms must be >= 0");
  if (!(config_.band_lo_hz > 0.0 && config_.band_lo_hz < config_.band_hi_hz))
    throw Error(ErrorCode::InvalidArgument, "onset band needs 0 < band_lo_hz < band_hi_hz");
}

std::vector<double> OnsetDetector::statistic(const Signal& x, double fs_hz) const {
  BiquadCascade f = design_bandpass(config_.band_lo_hz, config_.band_hi_hz, fs_hz, config_.filter_order);
  f.reset(static_cast<std::size_t>(x.rows()));
  Signal y = x;
  filter_apply(f, y);
  return frame_rms(y, fs_hz);
}

std::vector<double> OnsetDetector::frame_rms(const Signal& x, double fs_hz) const {
  const std::size_t frame = ms_to_samples(config_.rms_window_ms, fs_hz);
  if (frame == 0) throw Error(ErrorCode::InvalidArgument, "RMS frame shorter than one sample");
  const std::size_t n_frames = static_cast<std::size_t>(x.cols()) / frame;
  std::vector<double> out(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const Eigen::MatrixXd b =
        x.middleCols(static_cast<Eigen::Index>(f * frame), static_cast<Eigen::Index>(frame)).cast<double>();
    const Eigen::VectorXd rms = (b.array().square().rowwise().sum() / static_cast<double>(frame)).sqrt();
    out[f] = rms.mean();
  }
  return out;
}

void OnsetDetector::fit_baseline(std::span<const Signal> rest_segments, double fs_hz) {
  std::vector<double> all;
  for (const auto& seg : rest_segments) {
    auto r = statistic(seg, fs_hz);
    all.insert(all.end(), r.begin(), r.end());
  }
  if (all.size() < 2) throw Error(ErrorCode::NoBaseline, "baseline needs at least two RMS frames of rest data");
  double m = 0.0;
  for (double v : all) m += v;
  m /= static_cast<double>(all.size());
  double ss = 0.0;
  for (double v : all) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(all.size() - 1));
  if (!(sd > 0.0)) throw Error(ErrorCode::NoBaseline, "baseline RMS has zero spread");
  mean_ = m;
  std_ = sd;
  fitted_ = true;
}

std::vector<double> OnsetDetector::detect(const EegRecording& rec) const {
  if (!fitted_) throw Error(ErrorCode::NoBaseline, "onset detector has no baseline; fit it on rest data first");
  const auto rms = statistic(rec.samples, rec.fs_hz);
  const double frame_ms = config_.rms_window_ms;
  std::vector<double> onsets;
  bool armed = true;  // requires a sub-threshold frame between runs
  std::size_t run = 0;
  double last = -1e300;
  for (std::size_t f = 0; f < rms.size(); ++f) {
    const double z = (rms[f] - mean_) / std_;
    if (z > config_.threshold_z) {
      ++run;
      if (armed && run == static_cast<std::size_t>(config_.consecutive_required)) {
        const double t = static_cast<double>(f + 2 - run) * frame_ms;
        if (t - last >= config_.refractory_ms) {
          onsets.push_back(t);
          last = t;
        }
        armed = false;
      }
    } else {
      run = 0;
      armed = true;
    }
  }
  return onsets;
}

std::vector<double> detect_onsets(const EegRecording& rec, const OnsetDetector& det) { return det.detect(rec); }

}  // namespace bts
