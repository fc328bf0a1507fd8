#pragma once

#include "bts/io.hpp"
#include "bts/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace bts::cli {

namespace fs = std::filesystem;

// Shared flags. Precedence: built-in defaults < --config file < explicit flags.
struct Overrides {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> classes;
};

struct SynthArgs {
  Overrides common;
  std::optional<double> snr;
  fs::path out;  // dataset; the manifest goes to <out>.manifest.json
};

struct TrainArgs {
  Overrides common;
  fs::path dataset;
  bool shuffle_labels = false;
  fs::path out;
};

struct EvalArgs {
  Overrides common;
  fs::path dataset;
  fs::path model;
  fs::path out;  // JSON report; the table goes next to it with a .txt extension
};

struct DecodeArgs {
  Overrides common;
  fs::path dataset;
  fs::path model;
  bool all_trials = false;  // decode every annotated trial, not only the held-out ones
  fs::path out;             // JSON lines
};

SynthSpec resolve_synth_spec(const Overrides& o, std::optional<double> snr);
PipelineConfig resolve_config(const Overrides& o);

std::string synth(const SynthArgs& a);
std::string train(const TrainArgs& a);
Json eval(const EvalArgs& a);
std::string decode(const DecodeArgs& a);

// Human-readable table for an evaluation report.
std::string format_report(const Json& report);

Json make_report(const PseudoOnlineResult& r, const Model& model, const std::string& dataset_hash,
                 const std::string& evaluated_on);

}  // namespace bts::cli
