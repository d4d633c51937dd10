#pragma once

// Run manifests: the merged effective configuration of a CLI invocation,
// serialized so that `recon replay` reproduces every numeric artifact
// byte-identically. JSON conversions for the library config types live here.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "recon/bilevel.hpp"
#include "recon/gradpen.hpp"
#include "recon/init_schemes.hpp"
#include "recon/model.hpp"
#include "recon/trainer.hpp"

namespace recon {

inline constexpr const char* kToolName = "recon";
inline constexpr const char* kToolVersion = "0.1.0";

// How a command obtains its data. Synthetic blobs are regenerated from the
// seed; CIFAR sources are reloaded from the named files. The train/holdout
// split applies to both.
struct DataConfig {
  std::string source = "synth";  // "synth" | "cifar"
  // synth
  std::size_t n = 24;
  std::size_t k = 48;
  double separation = 1.0;
  // cifar
  std::vector<std::string> cifar_files;
  int class_a = 0;
  int class_b = 1;
  std::size_t per_class = 12;
  // split
  double holdout_fraction = 0.5;
  std::uint64_t seed = 7;
};

// (train, holdout) per the config; holdout is the non-overlapping partition
std::pair<Dataset, Dataset> resolve_data(const DataConfig& cfg);

void to_json(nlohmann::json& j, const ModelSpec& s);
void from_json(const nlohmann::json& j, ModelSpec& s);
void to_json(nlohmann::json& j, const LossSpec& s);
void from_json(const nlohmann::json& j, LossSpec& s);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const CgConfig& c);
void from_json(const nlohmann::json& j, CgConfig& c);
void to_json(nlohmann::json& j, const ReconConfig& c);
void from_json(const nlohmann::json& j, ReconConfig& c);
void to_json(nlohmann::json& j, const GradPenConfig& c);
void from_json(const nlohmann::json& j, GradPenConfig& c);
void to_json(nlohmann::json& j, const MixScheme& m);
void from_json(const nlohmann::json& j, MixScheme& m);
void to_json(nlohmann::json& j, const InitScheme& s);
void from_json(const nlohmann::json& j, InitScheme& s);
void to_json(nlohmann::json& j, const DataConfig& c);
void from_json(const nlohmann::json& j, DataConfig& c);

void write_manifest(const std::string& path, const nlohmann::json& manifest);
nlohmann::json read_manifest(const std::string& path);

}  // namespace recon
