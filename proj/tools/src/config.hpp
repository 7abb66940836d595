#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "rieif/generator.hpp"
#include "rieif/pipeline.hpp"

namespace rieif::cli {

using Json = nlohmann::ordered_json;

/// Resolved run configuration. Every command reads the sections it needs; the whole
/// object is written to the manifest, and a manifest is accepted back as --config.
Json default_config();

/// Loads a config file or a manifest (its "config" member) and merges it over `base`.
void merge_config_file(Json& base, const std::filesystem::path& path);

model::ModelConfig model_config(const Json& c, std::size_t nodes);
train::TrainConfig train_config(const Json& c);
pipeline::EvalSpec eval_spec(const Json& c);
pipeline::DiagnoseSpec diagnose_spec(const Json& c);
data::GeneratorSpec generator_spec(const Json& c);

/// Comma-separated list to a JSON array of strings; "" gives an empty array.
Json split_list(const std::string& s);

}  // namespace rieif::cli
