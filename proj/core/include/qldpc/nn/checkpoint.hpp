#pragma once

#include <string>

#include "json.hpp"
#include "qldpc/nn/params.hpp"

namespace qldpc::nn {

struct CheckpointInfo {
  nlohmann::json hyperparams;
  nlohmann::json metadata;
};

// Versioned JSON document: format tag, hyperparameters, training metadata,
// optimizer step, and per-parameter shape + base64 little-endian f64
// payloads for the value and both Adam moments (so a resumed run continues
// exactly).
void save_checkpoint(const ParameterStore& store, const std::string& path,
                     const nlohmann::json& hyperparams,
                     const nlohmann::json& metadata);

// Replaces the store contents. Throws on unknown format/version or
// malformed payloads.
CheckpointInfo load_checkpoint(ParameterStore& store, const std::string& path);

// Helpers shared with other serialization spots.
std::string base64_encode_doubles(const std::vector<double>& values);
std::vector<double> base64_decode_doubles(const std::string& text);

}  // namespace qldpc::nn
