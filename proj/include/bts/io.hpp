#pragma once

#include "bts/core_types.hpp"
#include "bts/decoder.hpp"
#include "bts/model.hpp"
#include "bts/onset.hpp"
#include "bts/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace bts {

// Dataset file, all fields little-endian:
//   "BTSE"                      magic, 4 bytes
//   u32   version               (1)
//   f64   fs_hz
//   u32   n_channels
//   u64   n_samples
//   n_channels x { u16 len, len bytes }          channel names (UTF-8)
//   f32   samples[n_channels][n_samples]         channel-major, microvolts
//   u32   n_annotations
//   n_annotations x { f64 time_ms, u16 len, len bytes }
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const EegRecording& rec, const std::filesystem::path& path);
EegRecording read_dataset(const std::filesystem::path& path);

// Time-major CSV: a header row of channel names, then one row per sample.
EegRecording read_csv(const std::filesystem::path& path, double fs_hz);

// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

// Flat key = value text. '#' starts a comment; blank lines are ignored.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);

// Each consumes the keys it knows from `kv` (erasing them) and throws on bad values.
void apply_config(PipelineConfig& config, KeyValues& kv);
void apply_config(SynthSpec& spec, KeyValues& kv);
void apply_config(OnsetConfig& config, KeyValues& kv);
std::string format_config(const PipelineConfig& config);

using Json = nlohmann::ordered_json;

Json to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const Json& j);

Json to_json(const Model& model);
Model model_from_json(const Json& j);
void write_model(const Model& model, const std::filesystem::path& path);
Model read_model(const std::filesystem::path& path);

Json to_json(const SynthManifest& manifest);

// One JSON-lines record per decision event: {t_ms, command_label, histogram, tie_broken}.
Json event_record(const DecisionEvent& ev, const Vocabulary& vocab);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace bts
