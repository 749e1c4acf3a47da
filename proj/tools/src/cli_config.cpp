#include "cli_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "maga/errors.hpp"

namespace maga::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

std::string key_list() {
  std::string s;
  for (const auto& k : config_keys()) s += (s.empty() ? "" : ", ") + k;
  return s;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"batch_size", "epochs",   "lr",   "max_grad_norm", "momentum",
                                                "patience",   "protocol", "seed", "weight_decay"};
  return keys;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(number) + ": empty key or value");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void apply_setting(TrainSettings& s, const std::string& key, const std::string& value) {
  TrainConfig& t = s.train;
  if (key == "epochs") {
    t.epochs = parse_number<std::size_t>(key, value);
    if (t.epochs < 1) throw ConfigError("epochs must be at least 1");
  } else if (key == "batch_size") {
    t.batch_size = parse_number<std::size_t>(key, value);
    if (t.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  } else if (key == "seed") {
    t.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "lr") {
    t.lr = parse_number<double>(key, value);
    if (!(t.lr > 0.0)) throw ConfigError("lr must be positive");
  } else if (key == "momentum") {
    t.momentum = parse_number<double>(key, value);
  } else if (key == "weight_decay") {
    t.weight_decay = parse_number<double>(key, value);
  } else if (key == "max_grad_norm") {
    t.max_grad_norm = parse_number<double>(key, value);
    if (!(t.max_grad_norm >= 0.0)) throw ConfigError("max_grad_norm must be non-negative");
  } else if (key == "patience") {
    t.patience = parse_number<std::size_t>(key, value);
  } else if (key == "protocol") {
    try {
      s.protocol = parse_protocol(value);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("unknown config key '" + key + "' (valid keys: " + key_list() + ")");
  }
}

TrainSettings load_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  TrainSettings s;
  for (const auto& [k, v] : parse_key_values(buffer.str())) apply_setting(s, k, v);
  return s;
}

std::size_t threads_from_env() {
  const char* env = std::getenv("MAGA_THREADS");
  if (!env || !*env) return 1;
  std::size_t n = 0;
  const std::string s = env;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), n);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || n == 0) {
    throw ArgumentError("MAGA_THREADS must be a positive integer, got '" + s + "'");
  }
  return n;
}

}  // namespace maga::cli
