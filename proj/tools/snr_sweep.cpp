// Pseudo-online accuracy versus generator SNR, used to pick the acceptance fixture.
// usage: snr_sweep [trials_per_class] [seeds] [snr ...]

#include "bts/pipeline.hpp"
#include "bts/synth.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

using namespace bts;

int main(int argc, char** argv) {
  const int trials = argc > 1 ? std::atoi(argv[1]) : 100;
  const int seeds = argc > 2 ? std::atoi(argv[2]) : 3;
  std::vector<double> snrs;
  for (int i = 3; i < argc; ++i) snrs.push_back(std::atof(argv[i]));
  if (snrs.empty()) snrs = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0};

  std::printf("%6s %7s %6s %9s %8s\n", "snr", "classes", "seed", "accuracy", "seconds");
  for (double snr : snrs) {
    for (const Vocabulary& vocab : {Vocabulary::imagined_speech(), Vocabulary::binary()}) {
      for (int seed = 1; seed <= seeds; ++seed) {
        const auto t0 = std::chrono::steady_clock::now();
        SynthSpec spec;
        spec.vocab = vocab;
        spec.snr = snr;
        spec.trials_per_class = trials;
        spec.rng_seed = static_cast<std::uint64_t>(seed);
        SynthSession s = generate_session(spec);
        PipelineConfig config;
        config.rng_seed = static_cast<std::uint64_t>(seed);
        config.n_train = trials * 4 / 5;
        config.n_test = trials - config.n_train;
        auto epochs = test_epochs(s.recording, vocab, config);
        const EegRecording rec = s.recording;
        TrainResult tr = train_pipeline(std::move(s.recording), vocab, config);
        const auto r = run_pseudo_online(rec, tr.model, config, std::move(epochs));
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%6.2f %7zu %6d %8.2f%% %8.1f\n", snr, vocab.size(), seed, 100.0 * r.accuracy, sec);
        std::fflush(stdout);
      }
    }
  }
  return 0;
}
