#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maga/corpus.hpp"
#include "maga/trainer.hpp"

namespace maga::cli {

/// Settings of the train command, filled from a key=value file and then
/// overridden by flags.
struct TrainSettings {
  TrainConfig train;
  std::optional<Protocol> protocol;  // unset: the protocol in the manifest
};

/// Keys accepted in a config file, sorted.
const std::vector<std::string>& config_keys();

/// Parses "key = value" lines. Blank lines and text after '#' are ignored.
/// Throws ConfigError naming the line for malformed lines.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

/// Throws ConfigError for unknown keys (listing the valid ones) or values
/// that do not parse.
void apply_setting(TrainSettings& settings, const std::string& key, const std::string& value);

TrainSettings load_settings_file(const std::string& path);

/// MAGA_THREADS, default 1. Throws ArgumentError when not a positive integer.
std::size_t threads_from_env();

}  // namespace maga::cli
