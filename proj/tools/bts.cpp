// bts: synthetic data, calibration, pseudo-online evaluation and decoding.

#include "bts/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* cmd, bts::cli::Overrides& o) {
  cmd->add_option_function<std::string>("--config", [&o](const std::string& p) { o.config = p; },
                                        "key = value config file");
  cmd->add_option_function<std::uint64_t>("--seed", [&o](std::uint64_t s) { o.seed = s; }, "RNG seed");
  cmd->add_option_function<std::string>("--classes", [&o](const std::string& c) { o.classes = c; },
                                        "comma separated class labels, or 13 / binary");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Imagined-speech pseudo-online decoder"};
  app.require_subcommand(1);

  bts::cli::SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic session");
  add_common(c_synth, synth.common);
  c_synth->add_option_function<double>("--snr", [&](double v) { synth.snr = v; }, "source-to-noise amplitude ratio");
  c_synth->add_option("--out", synth.out, "dataset file")->required();

  bts::cli::TrainArgs train;
  auto* c_train = app.add_subcommand("train", "calibrate CSP + SVM on the training split");
  add_common(c_train, train.common);
  c_train->add_option("dataset", train.dataset)->required();
  c_train->add_flag("--shuffle-labels", train.shuffle_labels, "permute training labels (null model)");
  c_train->add_option("--out", train.out, "model file")->required();

  bts::cli::EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "pseudo-online evaluation report");
  add_common(c_eval, eval.common);
  c_eval->add_option("dataset", eval.dataset)->required();
  c_eval->add_option("model", eval.model)->required();
  c_eval->add_option("--out", eval.out, "JSON report (table written next to it as .txt)")->required();

  bts::cli::DecodeArgs decode;
  auto* c_decode = app.add_subcommand("decode", "emit the JSON-lines command stream");
  add_common(c_decode, decode.common);
  c_decode->add_option("dataset", decode.dataset)->required();
  c_decode->add_option("model", decode.model)->required();
  c_decode->add_flag("--all-trials", decode.all_trials, "decode every annotated trial");
  c_decode->add_option("--out", decode.out, "events file")->required();

  std::string report_path;
  auto* c_report = app.add_subcommand("report", "print an evaluation report as a table");
  c_report->add_option("report", report_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_synth) std::cout << bts::cli::synth(synth);
    if (*c_train) std::cout << bts::cli::train(train);
    if (*c_eval) std::cout << bts::cli::format_report(bts::cli::eval(eval));
    if (*c_decode) std::cout << bts::cli::decode(decode);
    if (*c_report) std::cout << bts::cli::format_report(bts::Json::parse(bts::read_text(report_path)));
  } catch (const bts::Error& e) {
    std::cerr << "bts: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "bts: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
