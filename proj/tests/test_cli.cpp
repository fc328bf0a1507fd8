#include "bts/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace bts;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "bts_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path small_config() {
  const fs::path p = workdir() / "small.cfg";
  std::ofstream(p) << "channels = 8\nlatent_sources = 3\ntrials_per_class = 6\nn_train = 4\nn_test = 2\n";
  return p;
}

struct Outputs {
  std::string dataset, model, report, events;
};

Outputs run_all(const std::string& tag, const std::optional<std::string>& classes) {
  const fs::path d = workdir();
  cli::Overrides o{small_config(), 3, classes};
  cli::synth({o, std::nullopt, d / (tag + ".btse")});
  cli::train({o, d / (tag + ".btse"), false, d / (tag + ".model.json")});
  cli::eval({o, d / (tag + ".btse"), d / (tag + ".model.json"), d / (tag + ".report.json")});
  cli::decode({o, d / (tag + ".btse"), d / (tag + ".model.json"), false, d / (tag + ".events.jsonl")});
  return {bytes_of(d / (tag + ".btse")), bytes_of(d / (tag + ".model.json")), bytes_of(d / (tag + ".report.json")),
          bytes_of(d / (tag + ".events.jsonl"))};
}

}  // namespace

TEST_CASE("pipeline outputs are byte-identical across runs") {
  const auto a = run_all("a", std::nullopt);
  const auto b = run_all("b", std::nullopt);
  CHECK(a.dataset == b.dataset);
  CHECK(a.model == b.model);
  CHECK(a.report == b.report);
  CHECK(a.events == b.events);

  const Json r = Json::parse(a.report);
  CHECK(r.at("n_events") == 26);
  CHECK(r.at("votes_per_event").at("min") == 11);
  CHECK(r.at("evaluated_on") == "held-out split");
  CHECK(cli::format_report(r).find("chance level    : 7.7%") != std::string::npos);

  std::size_t lines = 0;
  for (char c : a.events) lines += c == '\n';
  CHECK(lines == 26);
  const Json first = Json::parse(a.events.substr(0, a.events.find('\n')));
  CHECK(first.contains("t_ms"));
  CHECK(first.contains("command_label"));
  CHECK(first.contains("histogram"));
  CHECK(first.contains("tie_broken"));
}

TEST_CASE("binary mode") {
  const auto out = run_all("bin", std::string("binary"));
  const Json r = Json::parse(out.report);
  CHECK(r.at("classes") == Json::array({"help me", "rest"}));
  CHECK(r.at("confusion").size() == 2);
  CHECK(r.at("confusion")[0].size() == 2);
  CHECK(r.at("n_events") == 4);
  CHECK(cli::format_report(r).find("chance level    : 50.0%") != std::string::npos);
}

TEST_CASE("a 13-class dataset decodes in binary mode") {
  const fs::path d = workdir();
  cli::Overrides o13{small_config(), 5, std::nullopt};
  cli::synth({o13, std::nullopt, d / "mixed.btse"});
  cli::Overrides o2{small_config(), 5, std::string("help me,rest")};
  cli::train({o2, d / "mixed.btse", false, d / "mixed.model.json"});
  const Json r = cli::eval({o2, d / "mixed.btse", d / "mixed.model.json", d / "mixed.report.json"});
  CHECK(r.at("n_events") == 4);
  CHECK(r.at("chance_level") == 0.5);
}

TEST_CASE("flags override the config file") {
  cli::Overrides o{small_config(), 11, std::nullopt};
  const auto spec = cli::resolve_synth_spec(o, 0.5);
  CHECK(spec.channels == 8);
  CHECK(spec.rng_seed == 11);
  CHECK(spec.snr == 0.5);
  CHECK(cli::resolve_config(o).rng_seed == 11);
  CHECK(cli::resolve_config(o).n_train == 4);
}

TEST_CASE("unknown config keys are rejected") {
  const fs::path p = workdir() / "typo.cfg";
  std::ofstream(p) << "windw_ms = 500\n";
  cli::Overrides o{p, std::nullopt, std::nullopt};
  try {
    cli::resolve_config(o);
    FAIL("expected Parse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("windw_ms") != std::string::npos);
  }
}

TEST_CASE("training reports insufficient trials by class name") {
  const fs::path d = workdir();
  const fs::path cfg = d / "tiny.cfg";
  std::ofstream(cfg) << "channels = 8\nlatent_sources = 3\ntrials_per_class = 3\n";
  cli::Overrides o{cfg, 1, std::nullopt};
  cli::synth({o, std::nullopt, d / "tiny.btse"});
  try {
    cli::train({o, d / "tiny.btse", false, d / "tiny.model.json"});
    FAIL("expected InsufficientTrials");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientTrials);
    CHECK(std::string(e.what()).find("ambulance") != std::string::npos);
  }
}
