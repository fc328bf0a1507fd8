#include "bts/synth.hpp"
#include "bts/dsp.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

namespace bts {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, purpose, index).
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  return std::mt19937_64(splitmix(splitmix(seed ^ (purpose << 56)) + index));
}

// Kellet's refined pink-noise filter: a bank of one-pole sections whose sum
// approximates a 1/f spectrum across the audio-normalized band.
struct PinkFilter {
  double s[7] = {0, 0, 0, 0, 0, 0, 0};
  double operator()(double w) {
    s[0] = 0.99886 * s[0] + w * 0.0555179;
    s[1] = 0.99332 * s[1] + w * 0.0750759;
    s[2] = 0.96900 * s[2] + w * 0.1538520;
    s[3] = 0.86650 * s[3] + w * 0.3104856;
    s[4] = 0.55000 * s[4] + w * 0.5329522;
    s[5] = -0.7616 * s[5] - w * 0.0168980;
    const double out = s[0] + s[1] + s[2] + s[3] + s[4] + s[5] + s[6] + w * 0.5362;
    s[6] = w * 0.115926;
    return out;
  }
};

double pink_gain() {
  static const double g = [] {
    PinkFilter f;
    double e = 0.0;
    for (int i = 0; i < 200000; ++i) {
      const double y = f(i == 0 ? 1.0 : 0.0);
      e += y * y;
    }
    return 1.0 / std::sqrt(e);
  }();
  return g;
}

constexpr std::size_t kPinkBurnIn = 8000;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One unit-variance pink noise generator per row, each with its own stream,
// filled chunk by chunk so long sessions never hold a double copy.
class PinkRows {
 public:
  PinkRows(std::uint64_t seed, std::uint64_t purpose, std::size_t rows) {
    for (std::size_t r = 0; r < rows; ++r) {
      gens_.push_back(Gen{stream(seed, purpose, r), {}, {}});
      auto& g = gens_.back();
      for (std::size_t i = 0; i < kPinkBurnIn; ++i) g.filter(g.normal(g.rng));
    }
  }

  void fill(RowMatrix& out, Eigen::Index len) {
    const double g = pink_gain();
    const long nr = static_cast<long>(gens_.size());
    out.resize(nr, len);
#pragma omp parallel for schedule(static)
    for (long r = 0; r < nr; ++r) {
      auto& gen = gens_[static_cast<std::size_t>(r)];
      double* row = out.row(r).data();
      for (Eigen::Index i = 0; i < len; ++i) row[i] = g * gen.filter(gen.normal(gen.rng));
    }
  }

 private:
  struct Gen {
    std::mt19937_64 rng;
    boost::random::normal_distribution<double> normal;
    PinkFilter filter;
  };
  std::vector<Gen> gens_;
};

Eigen::MatrixXd random_loading(std::uint64_t seed, int channels, int latent) {
  auto rng = stream(seed, 2, 0);
  boost::random::normal_distribution<double> normal;
  Eigen::MatrixXd b(channels, latent);
  for (int i = 0; i < channels; ++i)
    for (int j = 0; j < latent; ++j) b(i, j) = normal(rng);
  for (int i = 0; i < channels; ++i) b.row(i).normalize();
  return b;
}

Eigen::MatrixXd random_mixing(std::uint64_t seed, int channels, int classes, double min_angle_deg) {
  auto rng = stream(seed, 1, 0);
  boost::random::normal_distribution<double> normal;
  const double max_cos = std::cos(min_angle_deg * std::numbers::pi / 180.0);
  Eigen::MatrixXd a(channels, classes);
  for (int k = 0; k < classes; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw Error(ErrorCode::InvalidArgument, "cannot place mixing vectors at the requested angle");
      Eigen::VectorXd v(channels);
      for (int i = 0; i < channels; ++i) v(i) = normal(rng);
      v.normalize();
      bool ok = true;
      for (int j = 0; j < k && ok; ++j) ok = std::abs(a.col(j).dot(v)) <= max_cos;
      if (ok) {
        a.col(k) = v;
        break;
      }
    }
  }
  return a;
}

// Adds correlated background noise to rows of `out` for samples [0, n).
void add_background(const SynthSpec& spec, const Eigen::MatrixXd& loading, Signal& out) {
  const std::size_t n = static_cast<std::size_t>(out.cols());
  const double shared = std::sqrt(spec.noise_correlation) * spec.noise_rms_uv;
  const double own = std::sqrt(1.0 - spec.noise_correlation) * spec.noise_rms_uv;
  PinkRows latent_gen(spec.rng_seed, 3, static_cast<std::size_t>(spec.latent_sources));
  PinkRows own_gen(spec.rng_seed, 4, static_cast<std::size_t>(spec.channels));
  RowMatrix latent, indep;
  const std::size_t chunk = 8192;
  for (std::size_t s = 0; s < n; s += chunk) {
    const auto len = static_cast<Eigen::Index>(std::min(chunk, n - s));
    latent_gen.fill(latent, len);
    own_gen.fill(indep, len);
    const RowMatrix mixed = shared * (loading * latent) + own * indep;
    out.middleCols(static_cast<Eigen::Index>(s), len) += mixed.cast<float>();
  }
}

}  // namespace

void SynthSpec::validate() const {
  if (channels < 1) throw Error(ErrorCode::InvalidArgument, "synth: channels must be >= 1");
  if (trials_per_class < 1) throw Error(ErrorCode::InvalidArgument, "synth: trials_per_class must be >= 1");
  if (!(snr >= 0.0)) throw Error(ErrorCode::InvalidArgument, "synth: snr must be >= 0");
  if (!(noise_rms_uv > 0.0)) throw Error(ErrorCode::InvalidArgument, "synth: noise_rms_uv must be positive");
  if (!(noise_correlation >= 0.0 && noise_correlation <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "synth: noise_correlation must lie in [0, 1]");
  if (latent_sources < 1) throw Error(ErrorCode::InvalidArgument, "synth: latent_sources must be >= 1");
  if (!(fs_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "synth: fs must be positive");
  if (!(source_hi_hz < fs_hz / 2.0))
    throw Error(ErrorCode::Nyquist, "synth: fs " + std::to_string(fs_hz) + " Hz too low for a " +
                                        std::to_string(source_hi_hz) + " Hz source band (band edge violates Nyquist)");
  if (!(source_lo_hz > 0.0 && source_lo_hz < source_hi_hz))
    throw Error(ErrorCode::InvalidArgument, "synth: need 0 < source_lo_hz < source_hi_hz");
  if (trial_ms <= 0.0 || lead_in_ms < 0.0) throw Error(ErrorCode::InvalidArgument, "synth: bad trial timing");
  ms_to_samples(trial_ms, fs_hz);
  ms_to_samples(lead_in_ms, fs_hz);
}

EegRecording generate_noise(const SynthSpec& spec, double duration_ms) {
  spec.validate();
  const std::size_t n = ms_to_samples(duration_ms, spec.fs_hz);
  EegRecording rec;
  rec.fs_hz = spec.fs_hz;
  rec.samples = Signal::Zero(spec.channels, static_cast<Eigen::Index>(n));
  for (int c = 0; c < spec.channels; ++c) rec.channel_names.push_back("E" + std::to_string(c + 1));
  add_background(spec, random_loading(spec.rng_seed, spec.channels, spec.latent_sources), rec.samples);
  return rec;
}

SynthSession generate_session(const SynthSpec& spec) {
  spec.validate();
  const int k_classes = static_cast<int>(spec.vocab.size());
  const std::size_t trial = ms_to_samples(spec.trial_ms, spec.fs_hz);
  const std::size_t lead = ms_to_samples(spec.lead_in_ms, spec.fs_hz);
  const std::size_t n_trials = static_cast<std::size_t>(k_classes * spec.trials_per_class);
  const std::size_t n = lead + n_trials * trial;

  SynthSession out;
  auto& m = out.manifest;
  m.spec = spec;
  m.mixing = random_mixing(spec.rng_seed, spec.channels, k_classes, spec.min_mixing_angle_deg);
  m.latent_loading = random_loading(spec.rng_seed, spec.channels, spec.latent_sources);
  for (int k = 0; k < k_classes; ++k)
    for (int t = 0; t < spec.trials_per_class; ++t) m.trial_labels.push_back(k);
  auto order_rng = stream(spec.rng_seed, 5, 0);
  std::shuffle(m.trial_labels.begin(), m.trial_labels.end(), order_rng);

  auto& rec = out.recording;
  rec.fs_hz = spec.fs_hz;
  rec.samples = Signal::Zero(spec.channels, static_cast<Eigen::Index>(n));
  for (int c = 0; c < spec.channels; ++c) rec.channel_names.push_back("E" + std::to_string(c + 1));
  add_background(spec, m.latent_loading, rec.samples);

  const BiquadCascade band = design_bandpass(spec.source_lo_hz, spec.source_hi_hz, spec.fs_hz, 4);
  // Noise-equivalent gain of the band filter for unit-variance white input.
  double band_energy = 0.0;
  {
    BiquadCascade f = band;
    f.reset(1);
    for (int i = 0; i < 20000; ++i) {
      double v = i == 0 ? 1.0 : 0.0;
      f.process_channel(0, &v, 1);
      band_energy += v * v;
    }
  }
  const double unit = 1.0 / std::sqrt(band_energy);
  const std::optional<int> rest = spec.vocab.index_of("rest");
  const std::size_t settle = ms_to_samples(500.0, spec.fs_hz);

  for (std::size_t t = 0; t < n_trials; ++t) {
    const int k = m.trial_labels[t];
    const std::size_t start = lead + t * trial;
    m.trial_start_ms.push_back(1000.0 * static_cast<double>(start) / spec.fs_hz);
    rec.annotations.push_back({m.trial_start_ms.back(), spec.vocab.label(k)});
    if ((rest && k == *rest) || spec.snr == 0.0) continue;

    auto rng = stream(spec.rng_seed, 6, t);
    boost::random::normal_distribution<double> normal;
    std::vector<double> s(settle + trial);
    for (auto& v : s) v = normal(rng);
    BiquadCascade f = band;
    f.reset(1);
    f.process_channel(0, s.data(), s.size());
    const double amp = spec.snr * spec.noise_rms_uv * unit;
    const Eigen::VectorXd a = m.mixing.col(k);
    for (std::size_t i = 0; i < trial; ++i) {
      const double v = amp * s[settle + i];
      rec.samples.col(static_cast<Eigen::Index>(start + i)) += (a * v).cast<float>();
    }
  }
  return out;
}

}  // namespace bts
