#pragma once

#include <iosfwd>
#include <string>

#include "bsmvdr/pipeline.hpp"

namespace bsmvdr {

/// Overlays a YAML document onto `cfg`. Top-level sections are `pipeline`,
/// `array`, `radio` and `scenario`; see docs/formats.md. Unknown keys and
/// bad values raise ConfigError naming the key path.
void apply_config_yaml(const std::string& text, PipelineConfig& cfg);

/// Reads a YAML file and overlays it onto `base`.
PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {});

/// Parses a `scenario` mapping given as a standalone document.
Scenario parse_scenario_yaml(const std::string& text);

/// Writes `cfg` back out in the same schema. A custom scenario is included.
std::string dump_config_yaml(const PipelineConfig& cfg);

}  // namespace bsmvdr
