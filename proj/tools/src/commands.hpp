#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "cli_config.hpp"

namespace maga::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct GenDataOptions {
  std::string out;
  std::size_t count = 10;
  std::optional<std::size_t> val_count;  // default max(1, count / 5)
  std::string protocol = "sparse";
  std::size_t sparse_count = 500;
  std::size_t size = 64;
  std::uint64_t seed = 0;
};

struct TrainOptions {
  std::string corpus;
  std::string config;  // optional key=value file
  std::string out;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<std::string> protocol;
};

struct EvalOptions {
  std::string corpus;
  std::string checkpoint;
  std::string split = "val";
  std::optional<std::string> protocol;  // unset: both protocols
  std::optional<std::string> baseline;
};

struct CompleteOptions {
  std::string color;
  std::string depth;
  std::string checkpoint;
  std::string out;
  std::optional<std::string> gt;
};

int run_gen_data(const GenDataOptions& o, std::size_t threads, std::ostream& out);
int run_train(const TrainOptions& o, std::size_t threads, std::ostream& out);
int run_eval(const EvalOptions& o, std::size_t threads, std::ostream& out);
int run_complete(const CompleteOptions& o, std::ostream& out);
int run_verify(const std::string& suite, std::ostream& out);

}  // namespace maga::cli
