// Serial reference vs OpenMP kernels on a synthetic 64-channel session.

#include "bts/kernels.hpp"
#include "bts/synth.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <numeric>

using namespace bts;

template <typename F>
double seconds(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int main(int argc, char** argv) {
  SynthSpec spec;
  spec.trials_per_class = argc > 1 ? std::atoi(argv[1]) : 10;
  const SynthSession s = generate_session(spec);
  const auto& rec = s.recording;
  std::printf("threads: %d, session: %zu ch x %zu samples\n", omp_get_max_threads(), rec.n_channels(), rec.n_samples());

  const BiquadCascade design = design_bandpass(30, 120, rec.fs_hz, 4);
  Signal serial = rec.samples, parallel = rec.samples;
  BiquadCascade f1 = design, f2 = design;
  f1.reset(rec.n_channels());
  f2.reset(rec.n_channels());
  const double t_fs = seconds([&] { kernels::filter_channels(f1, serial, kernels::Exec::Serial); });
  const double t_fp = seconds([&] { kernels::filter_channels(f2, parallel, kernels::Exec::Parallel); });
  std::printf("filter_channels      serial %8.3f s  parallel %8.3f s  identical %s\n", t_fs, t_fp,
              serial == parallel ? "yes" : "NO");

  std::vector<std::size_t> starts;
  for (const auto& a : rec.annotations) starts.push_back(static_cast<std::size_t>(a.time_ms));
  std::vector<kernels::SpanWindows> ws, wp;
  const double t_ss = seconds([&] { ws = kernels::batch_span_window_stats(serial, starts, 2000, 1000, 100, kernels::Exec::Serial); });
  const double t_sp = seconds([&] { wp = kernels::batch_span_window_stats(serial, starts, 2000, 1000, 100, kernels::Exec::Parallel); });
  bool same = ws.size() == wp.size();
  for (std::size_t i = 0; same && i < ws.size(); ++i) same = ws[i].scatter == wp[i].scatter;
  std::printf("span_window_stats    serial %8.3f s  parallel %8.3f s  identical %s\n", t_ss, t_sp, same ? "yes" : "NO");

  std::vector<Eigen::MatrixXd> covs, trial;
  std::vector<int> labels;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    trial.push_back(shrink_normalized(ws[i].scatter, 0.05));
    labels.push_back(*spec.vocab.index_of(rec.annotations[i].label));
    for (auto& c : ws[i].window_covs) covs.push_back(c);
  }
  const CspBank bank = fit_csp_bank(trial, labels, spec.vocab.size(), 2);
  Eigen::MatrixXd fs, fp;
  const double t_bs = seconds([&] { fs = kernels::batch_features(bank, covs, kernels::Exec::Serial); });
  const double t_bp = seconds([&] { fp = kernels::batch_features(bank, covs, kernels::Exec::Parallel); });
  std::printf("batch_features       serial %8.3f s  parallel %8.3f s  identical %s\n", t_bs, t_bp, fs == fp ? "yes" : "NO");
  return 0;
}
