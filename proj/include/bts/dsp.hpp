#pragma once

#include "bts/core_types.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace bts {

struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;  // a0 normalized to 1
};

// Cascade of second-order sections with per-channel transposed direct form II state.
// A cascade with state belongs to one stream; copy it to start an independent one.
class BiquadCascade {
 public:
  BiquadCascade() = default;
  BiquadCascade(std::vector<Biquad> sections, double lo_hz, double hi_hz, double fs_hz, int order);

  const std::vector<Biquad>& sections() const { return sections_; }
  double lo_hz() const { return lo_hz_; }
  double hi_hz() const { return hi_hz_; }
  double fs_hz() const { return fs_hz_; }
  int order() const { return order_; }

  // Allocates zeroed state for n channels (2 delays per section per channel).
  void reset(std::size_t n_channels);
  std::size_t n_channels() const { return n_channels_; }
  std::size_t state_size() const { return state_.size(); }

  // Poles of every section, for stability checks.
  std::vector<std::complex<double>> poles() const;
  // Complex frequency response of the whole cascade at f Hz.
  std::complex<double> response(double f_hz) const;

  // Filters one channel in place, carrying that channel's state.
  template <typename T>
  void process_channel(std::size_t channel, T* data, std::size_t n);

 private:
  std::vector<Biquad> sections_;
  std::vector<double> state_;  // [channel][section][2]
  std::size_t n_channels_ = 0;
  double lo_hz_ = 0, hi_hz_ = 0, fs_hz_ = 0;
  int order_ = 0;
};

template <typename T>
void BiquadCascade::process_channel(std::size_t channel, T* data, std::size_t n) {
  double* z = state_.data() + channel * sections_.size() * 2;
  const std::size_t ns = sections_.size();
  for (std::size_t t = 0; t < n; ++t) {
    double x = static_cast<double>(data[t]);
    for (std::size_t s = 0; s < ns; ++s) {
      const Biquad& q = sections_[s];
      double* zs = z + 2 * s;
      double y = q.b0 * x + zs[0];
      zs[0] = q.b1 * x - q.a1 * y + zs[1];
      zs[1] = q.b2 * x - q.a2 * y;
      x = y;
    }
    data[t] = static_cast<T>(x);
  }
}

// Butterworth bandpass: `order` is the low-pass prototype order, giving 2*order
// poles realized as `order` sections. Bilinear transform with prewarped edges,
// so both edges sit at -3 dB; unit gain at the geometric band centre.
BiquadCascade design_bandpass(double lo_hz, double hi_hz, double fs_hz, int order);

// Causal filtering in place. The cascade state must have been reset to the
// signal's channel count; consecutive calls continue the stream.
void filter_apply(BiquadCascade& filter, Signal& x);
void filter_apply(BiquadCascade& filter, SignalD& x);

// Convenience: fresh state, filters a copy of the recording's samples.
EegRecording filter_recording(const BiquadCascade& design, const EegRecording& rec);

}  // namespace bts
