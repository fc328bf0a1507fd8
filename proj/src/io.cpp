#include "bts/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bts {

namespace fs = std::filesystem;

namespace {

template <typename U>
void put_le(std::ostream& out, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "string too long for dataset file: " + s.substr(0, 32));
  put_le(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& in, std::uintmax_t size) : in_(in), left_(size) {}

  void bytes(void* dst, std::uintmax_t n, const char* what) {
    if (n > left_) throw Error(ErrorCode::TruncatedPayload, std::string("truncated payload: file ends inside ") + what);
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::uintmax_t>(in_.gcount()) != n)
      throw Error(ErrorCode::TruncatedPayload, std::string("truncated payload: short read in ") + what);
    left_ -= n;
  }

  template <typename U>
  U le(const char* what) {
    unsigned char b[sizeof(U)];
    bytes(b, sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(b[i]) << (8 * i));
    return v;
  }

  double f64(const char* what) { return std::bit_cast<double>(le<std::uint64_t>(what)); }

  std::string str(const char* what) {
    const auto n = le<std::uint16_t>(what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }

  std::uintmax_t left() const { return left_; }

 private:
  std::istream& in_;
  std::uintmax_t left_;
};

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "config key '" + key + "': '" + v + "' is not a number");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "config key '" + key + "': '" + v + "' is not an integer");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    unsigned long long i = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "config key '" + key + "': '" + v + "' is not an unsigned integer");
  }
}

template <typename F>
void take(KeyValues& kv, const std::string& key, F&& apply) {
  auto it = kv.find(key);
  if (it == kv.end()) return;
  apply(it->first, it->second);
  kv.erase(it);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Json matrix_rows(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd json_vector(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd json_matrix(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols)
      throw Error(ErrorCode::Parse, "ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

void write_dataset(const EegRecording& rec, const fs::path& path) {
  rec.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out.write("BTSE", 4);
  put_le(out, kDatasetVersion);
  put_f64(out, rec.fs_hz);
  put_le(out, static_cast<std::uint32_t>(rec.n_channels()));
  put_le(out, static_cast<std::uint64_t>(rec.n_samples()));
  for (std::size_t c = 0; c < rec.n_channels(); ++c)
    put_string(out, c < rec.channel_names.size() ? rec.channel_names[c] : "E" + std::to_string(c + 1));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(rec.samples.data()),
              static_cast<std::streamsize>(rec.samples.size() * sizeof(float)));
  } else {
    for (Eigen::Index i = 0; i < rec.samples.size(); ++i)
      put_le(out, std::bit_cast<std::uint32_t>(rec.samples.data()[i]));
  }
  put_le(out, static_cast<std::uint32_t>(rec.annotations.size()));
  for (const auto& a : rec.annotations) {
    put_f64(out, a.time_ms);
    put_string(out, a.label);
  }
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

EegRecording read_dataset(const fs::path& path) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot stat '" + path.string() + "': " + ec.message());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  Reader r(in, size);

  char magic[4];
  if (size < 4) throw Error(ErrorCode::BadMagic, "bad magic: '" + path.string() + "' is not a BTSE dataset");
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, "BTSE", 4) != 0)
    throw Error(ErrorCode::BadMagic, "bad magic: '" + path.string() + "' is not a BTSE dataset");
  const auto version = r.le<std::uint32_t>("header");
  if (version != kDatasetVersion)
    throw Error(ErrorCode::VersionMismatch, "dataset version " + std::to_string(version) + " not supported (expected " +
                                                std::to_string(kDatasetVersion) + ")");
  EegRecording rec;
  rec.fs_hz = r.f64("header");
  const auto channels = r.le<std::uint32_t>("header");
  const auto samples = r.le<std::uint64_t>("header");
  for (std::uint32_t c = 0; c < channels; ++c) rec.channel_names.push_back(r.str("channel names"));

  const std::uintmax_t payload = static_cast<std::uintmax_t>(channels) * samples * sizeof(float);
  if (channels == 0 || samples == 0 || payload / sizeof(float) / channels != samples)
    throw Error(ErrorCode::Parse, "dataset header declares an empty or oversized payload");
  if (payload > r.left()) throw Error(ErrorCode::TruncatedPayload, "truncated payload: '" + path.string() + "' is shorter than its header declares");
  rec.samples.resize(channels, static_cast<Eigen::Index>(samples));
  if constexpr (std::endian::native == std::endian::little) {
    r.bytes(rec.samples.data(), payload, "sample payload");
  } else {
    for (Eigen::Index i = 0; i < rec.samples.size(); ++i)
      rec.samples.data()[i] = std::bit_cast<float>(r.le<std::uint32_t>("sample payload"));
  }
  const auto n_ann = r.le<std::uint32_t>("annotation table");
  for (std::uint32_t i = 0; i < n_ann; ++i) {
    Annotation a;
    a.time_ms = r.f64("annotation table");
    a.label = r.str("annotation table");
    rec.annotations.push_back(std::move(a));
  }
  rec.validate();
  return rec;
}

EegRecording read_csv(const fs::path& path, double fs_hz) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  EegRecording rec;
  rec.fs_hz = fs_hz;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "CSV '" + path.string() + "' is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) rec.channel_names.push_back(trim(cell));
  }
  const std::size_t ch = rec.channel_names.size();
  std::vector<std::vector<float>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<float> row;
    while (std::getline(ss, cell, ',')) row.push_back(static_cast<float>(parse_double("line " + std::to_string(lineno), trim(cell))));
    if (row.size() != ch)
      throw Error(ErrorCode::Parse, "CSV line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                                        " values, header has " + std::to_string(ch));
    rows.push_back(std::move(row));
  }
  rec.samples.resize(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t c = 0; c < ch; ++c) rec.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = rows[t][c];
  rec.validate();
  return rec;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Parse, "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::Parse, "config line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const fs::path& path) { return parse_key_values(read_text(path)); }

void apply_config(PipelineConfig& c, KeyValues& kv) {
  auto dbl = [&](const char* k, double& dst) { take(kv, k, [&](auto& key, auto& v) { dst = parse_double(key, v); }); };
  auto int_ = [&](const char* k, int& dst) {
    take(kv, k, [&](auto& key, auto& v) { dst = static_cast<int>(parse_int(key, v)); });
  };
  dbl("band_lo_hz", c.band_lo_hz);
  dbl("band_hi_hz", c.band_hi_hz);
  dbl("window_ms", c.window_ms);
  dbl("hop_ms", c.hop_ms);
  dbl("decision_ms", c.decision_ms);
  int_("n_csp_pairs", c.n_csp_pairs);
  dbl("svm_c", c.svm_c);
  dbl("svm_tol", c.svm_tol);
  int_("svm_max_iter", c.svm_max_iter);
  dbl("covariance_shrinkage", c.covariance_shrinkage);
  int_("filter_order", c.filter_order);
  take(kv, "rng_seed", [&](auto& key, auto& v) { c.rng_seed = parse_u64(key, v); });
  int_("n_train", c.n_train);
  int_("n_test", c.n_test);
}

void apply_config(SynthSpec& s, KeyValues& kv) {
  auto dbl = [&](const char* k, double& dst) { take(kv, k, [&](auto& key, auto& v) { dst = parse_double(key, v); }); };
  auto int_ = [&](const char* k, int& dst) {
    take(kv, k, [&](auto& key, auto& v) { dst = static_cast<int>(parse_int(key, v)); });
  };
  take(kv, "classes", [&](auto&, auto& v) { s.vocab = Vocabulary::parse(v); });
  int_("channels", s.channels);
  dbl("fs_hz", s.fs_hz);
  int_("trials_per_class", s.trials_per_class);
  dbl("trial_ms", s.trial_ms);
  dbl("lead_in_ms", s.lead_in_ms);
  dbl("snr", s.snr);
  dbl("noise_rms_uv", s.noise_rms_uv);
  dbl("noise_correlation", s.noise_correlation);
  int_("latent_sources", s.latent_sources);
  dbl("source_lo_hz", s.source_lo_hz);
  dbl("source_hi_hz", s.source_hi_hz);
  dbl("min_mixing_angle_deg", s.min_mixing_angle_deg);
  take(kv, "synth_seed", [&](auto& key, auto& v) { s.rng_seed = parse_u64(key, v); });
}

void apply_config(OnsetConfig& c, KeyValues& kv) {
  auto dbl = [&](const char* k, double& dst) { take(kv, k, [&](auto& key, auto& v) { dst = parse_double(key, v); }); };
  dbl("onset_rms_window_ms", c.rms_window_ms);
  dbl("onset_threshold_z", c.threshold_z);
  take(kv, "onset_consecutive", [&](auto& key, auto& v) { c.consecutive_required = static_cast<int>(parse_int(key, v)); });
  dbl("onset_refractory_ms", c.refractory_ms);
  dbl("onset_band_lo_hz", c.band_lo_hz);
  dbl("onset_band_hi_hz", c.band_hi_hz);
}

std::string format_config(const PipelineConfig& c) {
  const Json j = to_json(c);
  std::string out;
  for (const auto& [k, v] : j.items()) out += k + " = " + v.dump() + "\n";
  return out;
}

Json to_json(const PipelineConfig& c) {
  return Json{{"band_lo_hz", c.band_lo_hz},
              {"band_hi_hz", c.band_hi_hz},
              {"window_ms", c.window_ms},
              {"hop_ms", c.hop_ms},
              {"decision_ms", c.decision_ms},
              {"n_csp_pairs", c.n_csp_pairs},
              {"svm_c", c.svm_c},
              {"svm_tol", c.svm_tol},
              {"svm_max_iter", c.svm_max_iter},
              {"covariance_shrinkage", c.covariance_shrinkage},
              {"filter_order", c.filter_order},
              {"rng_seed", c.rng_seed},
              {"n_train", c.n_train},
              {"n_test", c.n_test}};
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  c.band_lo_hz = j.at("band_lo_hz").get<double>();
  c.band_hi_hz = j.at("band_hi_hz").get<double>();
  c.window_ms = j.at("window_ms").get<double>();
  c.hop_ms = j.at("hop_ms").get<double>();
  c.decision_ms = j.at("decision_ms").get<double>();
  c.n_csp_pairs = j.at("n_csp_pairs").get<int>();
  c.svm_c = j.at("svm_c").get<double>();
  c.svm_tol = j.at("svm_tol").get<double>();
  c.svm_max_iter = j.at("svm_max_iter").get<int>();
  c.covariance_shrinkage = j.at("covariance_shrinkage").get<double>();
  c.filter_order = j.at("filter_order").get<int>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.n_train = j.at("n_train").get<int>();
  c.n_test = j.at("n_test").get<int>();
  return c;
}

Json to_json(const Model& m) {
  Json csp_models = Json::array();
  for (const auto& pm : m.bank.models)
    csp_models.push_back(Json{{"eigenvalues", vector_json(pm.eigenvalues)}, {"filters", matrix_rows(pm.filters)}});
  Json machines = Json::array();
  for (const auto& s : m.classifier.machines())
    machines.push_back(Json{{"w", vector_json(s.w)},
                            {"b", s.b},
                            {"c", s.c},
                            {"tol", s.tol},
                            {"converged", s.converged},
                            {"passes", s.passes}});
  return Json{{"format", "bts-model"},
              {"version", 1},
              {"config", to_json(m.config)},
              {"vocabulary", m.vocab.labels()},
              {"fs_hz", m.fs_hz},
              {"n_channels", m.n_channels},
              {"csp", Json{{"n_pairs", m.bank.n_pairs}, {"models", csp_models}}},
              {"classifier", Json{{"mean", vector_json(m.classifier.mean())},
                                  {"std", vector_json(m.classifier.stdev())},
                                  {"machines", machines}}},
              {"training", Json{{"split_seed", m.meta.split_seed},
                                {"dataset_hash", m.meta.dataset_hash},
                                {"shuffled_labels", m.meta.shuffled_labels},
                                {"train_counts", m.meta.train_counts},
                                {"n_train_windows", m.meta.n_train_windows},
                                {"svm_unconverged", m.meta.svm_unconverged}}}};
}

Model model_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != "bts-model") throw Error(ErrorCode::BadMagic, "not a bts model file");
    if (j.at("version").get<int>() != 1) throw Error(ErrorCode::VersionMismatch, "unsupported model file version");
    Model m;
    m.config = config_from_json(j.at("config"));
    m.vocab = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    m.fs_hz = j.at("fs_hz").get<double>();
    m.n_channels = j.at("n_channels").get<int>();
    m.bank.n_pairs = j.at("csp").at("n_pairs").get<int>();
    m.bank.n_channels = m.n_channels;
    for (const auto& pm : j.at("csp").at("models")) {
      CspPairModel p;
      p.eigenvalues = json_vector(pm.at("eigenvalues"));
      p.filters = json_matrix(pm.at("filters"));
      if (p.filters.rows() != 2 * m.bank.n_pairs || p.filters.cols() != m.n_channels)
        throw Error(ErrorCode::Parse, "CSP filter matrix has the wrong shape");
      m.bank.models.push_back(std::move(p));
    }
    std::vector<BinarySvm> machines;
    for (const auto& s : j.at("classifier").at("machines")) {
      BinarySvm b;
      b.w = json_vector(s.at("w"));
      b.b = s.at("b").get<double>();
      b.c = s.at("c").get<double>();
      b.tol = s.at("tol").get<double>();
      b.converged = s.at("converged").get<bool>();
      b.passes = s.at("passes").get<int>();
      machines.push_back(std::move(b));
    }
    m.classifier = OvrClassifier(std::move(machines), json_vector(j.at("classifier").at("mean")),
                                 json_vector(j.at("classifier").at("std")));
    const auto& t = j.at("training");
    m.meta.split_seed = t.at("split_seed").get<std::uint64_t>();
    m.meta.dataset_hash = t.at("dataset_hash").get<std::string>();
    m.meta.shuffled_labels = t.at("shuffled_labels").get<bool>();
    m.meta.train_counts = t.at("train_counts").get<std::vector<int>>();
    m.meta.n_train_windows = t.at("n_train_windows").get<int>();
    m.meta.svm_unconverged = t.at("svm_unconverged").get<int>();
    if (m.bank.models.size() != m.vocab.size() || m.classifier.n_classes() != m.vocab.size() ||
        m.classifier.feature_dim() != m.bank.feature_dim())
      throw Error(ErrorCode::Parse, "model file stages disagree on class count or feature size");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed model file: ") + e.what());
  }
}

void write_model(const Model& model, const fs::path& path) { write_text(path, to_json(model).dump(1) + "\n"); }

Model read_model(const fs::path& path) {
  const std::string text = read_text(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, "model file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

Json to_json(const SynthManifest& m) {
  const auto& s = m.spec;
  Json mixing = Json::array();
  for (Eigen::Index k = 0; k < m.mixing.cols(); ++k) mixing.push_back(vector_json(m.mixing.col(k)));
  return Json{{"spec", Json{{"classes", s.vocab.labels()},
                            {"channels", s.channels},
                            {"fs_hz", s.fs_hz},
                            {"trials_per_class", s.trials_per_class},
                            {"trial_ms", s.trial_ms},
                            {"lead_in_ms", s.lead_in_ms},
                            {"snr", s.snr},
                            {"noise_rms_uv", s.noise_rms_uv},
                            {"noise_correlation", s.noise_correlation},
                            {"latent_sources", s.latent_sources},
                            {"source_band_hz", {s.source_lo_hz, s.source_hi_hz}},
                            {"min_mixing_angle_deg", s.min_mixing_angle_deg},
                            {"synth_seed", s.rng_seed}}},
              {"trial_labels", m.trial_labels},
              {"trial_start_ms", m.trial_start_ms},
              {"mixing_vectors", mixing}};
}

Json event_record(const DecisionEvent& ev, const Vocabulary& vocab) {
  Json hist = Json::object();
  for (std::size_t k = 0; k < ev.histogram.size(); ++k)
    if (ev.histogram[k] > 0) hist[vocab.label(static_cast<int>(k))] = ev.histogram[k];
  return Json{{"t_ms", ev.epoch_start_ms},
              {"command_label", vocab.label(ev.command)},
              {"histogram", hist},
              {"tie_broken", ev.tie_broken}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bts
