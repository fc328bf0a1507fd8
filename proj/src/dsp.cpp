#include "bts/dsp.hpp"
#include "bts/kernels.hpp"

#include <cmath>
#include <numbers>

namespace bts {

BiquadCascade::BiquadCascade(std::vector<Biquad> sections, double lo_hz, double hi_hz, double fs_hz,
                             int order)
    : sections_(std::move(sections)), lo_hz_(lo_hz), hi_hz_(hi_hz), fs_hz_(fs_hz), order_(order) {}

void BiquadCascade::reset(std::size_t n_channels) {
  n_channels_ = n_channels;
  state_.assign(n_channels * sections_.size() * 2, 0.0);
}

std::vector<std::complex<double>> BiquadCascade::poles() const {
  std::vector<std::complex<double>> out;
  for (const auto& q : sections_) {
    // z^2 + a1 z + a2 = 0
    std::complex<double> disc = std::sqrt(std::complex<double>(q.a1 * q.a1 - 4.0 * q.a2, 0.0));
    out.push_back((-q.a1 + disc) / 2.0);
    out.push_back((-q.a1 - disc) / 2.0);
  }
  return out;
}

std::complex<double> BiquadCascade::response(double f_hz) const {
  const double w = 2.0 * std::numbers::pi * f_hz / fs_hz_;
  const std::complex<double> zi = std::polar(1.0, -w);
  const std::complex<double> zi2 = zi * zi;
  std::complex<double> h = 1.0;
  for (const auto& q : sections_) h *= (q.b0 + q.b1 * zi + q.b2 * zi2) / (1.0 + q.a1 * zi + q.a2 * zi2);
  return h;
}

BiquadCascade design_bandpass(double lo_hz, double hi_hz, double fs_hz, int order) {
  if (order <= 0) throw Error(ErrorCode::InvalidArgument, "filter order must be positive");
  if (order % 2 != 0) throw Error(ErrorCode::InvalidArgument, "filter order must be even");
  if (!(fs_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");
  if (hi_hz >= fs_hz / 2.0)
    throw Error(ErrorCode::Nyquist, "band edge violates Nyquist: " + std::to_string(hi_hz) +
                                        " Hz >= fs/2 = " + std::to_string(fs_hz / 2.0) + " Hz");
  if (!(lo_hz > 0.0) || !(lo_hz < hi_hz))
    throw Error(ErrorCode::InvalidArgument, "need 0 < lo_hz < hi_hz");

  using cd = std::complex<double>;
  const double pi = std::numbers::pi;
  const double k2 = 2.0 * fs_hz;
  const double w_lo = k2 * std::tan(pi * lo_hz / fs_hz);
  const double w_hi = k2 * std::tan(pi * hi_hz / fs_hz);
  const double bw = w_hi - w_lo;
  const double w0sq = w_lo * w_hi;

  // Upper-half-plane z poles, one per section.
  std::vector<cd> zpoles;
  for (int k = 0; k < order; ++k) {
    const cd p = std::polar(1.0, pi * (2.0 * k + order + 1) / (2.0 * order));
    const cd half = p * bw / 2.0;
    const cd root = std::sqrt(half * half - w0sq);
    for (cd s : {half + root, half - root}) {
      const cd z = (k2 + s) / (k2 - s);
      if (z.imag() > 0.0) zpoles.push_back(z);
    }
  }
  if (zpoles.size() != static_cast<std::size_t>(order))
    throw Error(ErrorCode::InvalidArgument, "bandpass design produced an unexpected pole layout");

  std::vector<Biquad> sections;
  for (const cd& z : zpoles) {
    Biquad q;
    q.b0 = 1.0;
    q.b1 = 0.0;
    q.b2 = -1.0;  // zeros at z = 1 and z = -1
    q.a1 = -2.0 * z.real();
    q.a2 = std::norm(z);
    sections.push_back(q);
  }

  BiquadCascade cascade(sections, lo_hz, hi_hz, fs_hz, order);
  const double f_centre = std::atan(std::sqrt(w0sq) / k2) * fs_hz / pi;
  const double g = std::pow(1.0 / std::abs(cascade.response(f_centre)), 1.0 / order);
  for (auto& q : sections) {
    q.b0 *= g;
    q.b2 *= g;
  }
  return BiquadCascade(std::move(sections), lo_hz, hi_hz, fs_hz, order);
}

void filter_apply(BiquadCascade& filter, Signal& x) {
  kernels::filter_channels(filter, x, kernels::Exec::Parallel);
}

void filter_apply(BiquadCascade& filter, SignalD& x) {
  kernels::filter_channels(filter, x, kernels::Exec::Parallel);
}

EegRecording filter_recording(const BiquadCascade& design, const EegRecording& rec) {
  EegRecording out = rec;
  BiquadCascade f = design;
  f.reset(out.n_channels());
  filter_apply(f, out.samples);
  return out;
}

}  // namespace bts
