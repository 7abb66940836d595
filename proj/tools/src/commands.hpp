#pragma once

#include "config.hpp"

namespace rieif::cli {

// Each command reads the resolved config, writes its outputs plus manifest.json into
// config["out"], and throws rieif errors on failure.
void cmd_gen_data(const Json& c);
void cmd_train(const Json& c);
void cmd_eval(const Json& c);
void cmd_baseline(const Json& c);
void cmd_diagnose(const Json& c);

}  // namespace rieif::cli
