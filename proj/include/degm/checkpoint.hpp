#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "degm/network.hpp"

namespace degm {

// On-disk layout:
//   8 bytes   magic "DEGMCKPT"
//   8 bytes   little-endian uint64 header length H
//   H bytes   UTF-8 JSON header: {"format_version", "model": {...}, "ontology": [...],
//             "metadata": {...}, "arrays": [{"name", "shape": [r, c], "offset"}]}
//   rest      float64 little-endian array payloads, row-major, at the given
//             element offsets
struct Checkpoint {
    DenoiserParams params;
    std::vector<std::string> ontology;  // every type name including PAD, by index
    nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace degm
