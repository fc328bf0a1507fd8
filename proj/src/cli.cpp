#include "bts/cli.hpp"

#include <cstdio>
#include <sstream>

namespace bts::cli {

namespace {

KeyValues load_checked(const Overrides& o) {
  if (!o.config) return {};
  KeyValues kv = read_key_values(*o.config);
  KeyValues probe = kv;
  PipelineConfig pc;
  SynthSpec ss;
  OnsetConfig oc;
  apply_config(pc, probe);
  apply_config(ss, probe);
  apply_config(oc, probe);
  if (!probe.empty())
    throw Error(ErrorCode::Parse, "unknown config key '" + probe.begin()->first + "' in " + o.config->string());
  return kv;
}

Vocabulary resolve_vocab(const Overrides& o) {
  if (o.classes) return Vocabulary::parse(*o.classes);
  KeyValues kv = load_checked(o);
  if (auto it = kv.find("classes"); it != kv.end()) return Vocabulary::parse(it->second);
  return Vocabulary::imagined_speech();
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

std::vector<DecisionEpoch> epochs_for(const EegRecording& rec, const Model& model, const std::string& hash,
                                      bool all_trials, std::string& evaluated_on) {
  if (!all_trials && !model.meta.dataset_hash.empty() && model.meta.dataset_hash == hash) {
    evaluated_on = "held-out split";
    return test_epochs(rec, model.vocab, model.config);
  }
  evaluated_on = "all trials";
  return all_epochs(rec, model.vocab);
}

}  // namespace

SynthSpec resolve_synth_spec(const Overrides& o, std::optional<double> snr) {
  SynthSpec spec;
  KeyValues kv = load_checked(o);
  apply_config(spec, kv);
  if (o.seed) spec.rng_seed = *o.seed;
  if (o.classes) spec.vocab = Vocabulary::parse(*o.classes);
  if (snr) spec.snr = *snr;
  spec.validate();
  return spec;
}

PipelineConfig resolve_config(const Overrides& o) {
  PipelineConfig c;
  KeyValues kv = load_checked(o);
  apply_config(c, kv);
  if (o.seed) c.rng_seed = *o.seed;
  c.validate();
  return c;
}

std::string synth(const SynthArgs& a) {
  const SynthSpec spec = resolve_synth_spec(a.common, a.snr);
  const SynthSession s = generate_session(spec);
  write_dataset(s.recording, a.out);
  fs::path manifest = a.out;
  manifest += ".manifest.json";
  write_text(manifest, to_json(s.manifest).dump(1) + "\n");
  std::ostringstream msg;
  msg << "wrote " << a.out.string() << ": " << spec.vocab.size() << " classes x " << spec.trials_per_class
      << " trials, " << spec.channels << " channels, " << s.recording.duration_ms() / 1000.0 << " s at "
      << spec.fs_hz << " Hz, snr " << spec.snr << ", seed " << spec.rng_seed << "\n";
  return msg.str();
}

std::string train(const TrainArgs& a) {
  const PipelineConfig config = resolve_config(a.common);
  const Vocabulary vocab = resolve_vocab(a.common);
  TrainOptions opt;
  opt.shuffle_labels = a.shuffle_labels;
  opt.dataset_hash = file_hash(a.dataset);
  TrainResult r = train_pipeline(read_dataset(a.dataset), vocab, config, opt);
  write_model(r.model, a.out);

  std::ostringstream msg;
  msg << "trained " << vocab.size() << "-class model on " << r.split.train.size() << " trials ("
      << r.model.meta.n_train_windows << " windows), " << r.split.test.size() << " held out, seed "
      << config.rng_seed << (a.shuffle_labels ? ", labels shuffled" : "") << "\n";
  for (std::size_t k = 0; k < vocab.size(); ++k)
    msg << "  " << vocab.label(static_cast<int>(k)) << ": " << r.model.meta.train_counts[k] << " train\n";
  if (r.model.meta.svm_unconverged > 0)
    msg << "warning: " << r.model.meta.svm_unconverged << " SVM machine(s) hit svm_max_iter before converging\n";
  return msg.str();
}

Json make_report(const PseudoOnlineResult& r, const Model& model, const std::string& dataset_hash,
                 const std::string& evaluated_on) {
  const std::size_t k = model.vocab.size();
  std::size_t vmin = 0, vmax = 0;
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    const std::size_t v = r.events[i].votes.size();
    vmin = i == 0 ? v : std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  Json per_class = Json::object();
  for (std::size_t t = 0; t < k; ++t) {
    int total = 0;
    for (int c : r.confusion[t]) total += c;
    per_class[model.vocab.label(static_cast<int>(t))] =
        total ? static_cast<double>(r.confusion[t][t]) / total : 0.0;
  }
  return Json{{"classes", model.vocab.labels()},
              {"config", to_json(model.config)},
              {"split_seed", model.meta.split_seed},
              {"dataset_hash", dataset_hash},
              {"model_dataset_hash", model.meta.dataset_hash},
              {"shuffled_labels", model.meta.shuffled_labels},
              {"evaluated_on", evaluated_on},
              {"n_events", r.events.size()},
              {"votes_per_event", Json{{"min", vmin}, {"max", vmax}}},
              {"windows_classified", r.windows_classified},
              {"incomplete_epochs", r.incomplete_epochs},
              {"short_recording", r.short_recording},
              {"n_scored", r.n_scored},
              {"n_correct", r.n_correct},
              {"accuracy", r.accuracy},
              {"chance_level", 1.0 / static_cast<double>(k)},
              {"ties", r.ties},
              {"per_class_accuracy", per_class},
              {"confusion", r.confusion}};
}

Json eval(const EvalArgs& a) {
  const Model model = read_model(a.model);
  PipelineConfig config = model.config;
  if (a.common.config || a.common.seed) config = resolve_config(a.common);
  const std::string hash = file_hash(a.dataset);
  const EegRecording rec = read_dataset(a.dataset);
  std::string evaluated_on;
  auto epochs = epochs_for(rec, model, hash, false, evaluated_on);
  const PseudoOnlineResult r = run_pseudo_online(rec, model, config, std::move(epochs));
  Json report = make_report(r, model, hash, evaluated_on);
  write_text(a.out, report.dump(1) + "\n");
  fs::path table = a.out;
  table.replace_extension(".txt");
  write_text(table, format_report(report));
  return report;
}

std::string decode(const DecodeArgs& a) {
  const Model model = read_model(a.model);
  PipelineConfig config = model.config;
  if (a.common.config || a.common.seed) config = resolve_config(a.common);
  const std::string hash = file_hash(a.dataset);
  const EegRecording rec = read_dataset(a.dataset);
  std::string evaluated_on;
  auto epochs = epochs_for(rec, model, hash, a.all_trials, evaluated_on);
  const PseudoOnlineResult r = run_pseudo_online(rec, model, config, std::move(epochs));
  std::string lines;
  for (const auto& ev : r.events) lines += event_record(ev, model.vocab).dump() + "\n";
  write_text(a.out, lines);
  std::ostringstream msg;
  msg << "decoded " << r.events.size() << " commands (" << evaluated_on << ") to " << a.out.string() << "\n";
  return msg.str();
}

std::string format_report(const Json& report) {
  const auto classes = report.at("classes").get<std::vector<std::string>>();
  const auto confusion = report.at("confusion").get<std::vector<std::vector<int>>>();
  std::ostringstream out;
  out << "Pseudo-online decoding, " << classes.size() << "-class (" << report.at("evaluated_on").get<std::string>()
      << ")\n";
  out << "  decision epochs : " << report.at("n_events").get<std::size_t>() << "\n";
  out << "  votes per epoch : " << report.at("votes_per_event").at("min").get<std::size_t>();
  if (report.at("votes_per_event").at("max") != report.at("votes_per_event").at("min"))
    out << ".." << report.at("votes_per_event").at("max").get<std::size_t>();
  out << "\n";
  out << "  accuracy        : " << percent(report.at("accuracy").get<double>()) << "\n";
  out << "  chance level    : " << percent(report.at("chance_level").get<double>()) << "\n";
  out << "  ties broken     : " << report.at("ties").get<std::size_t>() << "\n";
  if (report.at("short_recording").get<bool>()) out << "  note: recording shorter than one analysis window\n";
  if (report.at("incomplete_epochs").get<std::size_t>() > 0)
    out << "  note: " << report.at("incomplete_epochs").get<std::size_t>() << " epoch(s) ran past the recording\n";

  std::size_t w = 10;
  for (const auto& c : classes) w = std::max(w, c.size() + 4);
  out << "\n" << std::string(w, ' ');
  for (std::size_t j = 0; j < classes.size(); ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%5zu", j);
    out << buf;
  }
  out << "   acc\n";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    char lead[32];
    std::snprintf(lead, sizeof lead, "%2zu ", i);
    std::string name = lead + classes[i];
    name.resize(w, ' ');
    out << name;
    int total = 0;
    for (std::size_t j = 0; j < classes.size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%5d", confusion[i][j]);
      out << buf;
      total += confusion[i][j];
    }
    out << "  " << (total ? percent(static_cast<double>(confusion[i][i]) / total) : std::string("-")) << "\n";
  }
  return out.str();
}

}  // namespace bts::cli
