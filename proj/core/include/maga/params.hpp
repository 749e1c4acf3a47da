#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "maga/rng.hpp"
#include "maga/tensor.hpp"

namespace maga {

struct ParamInfo {
  std::string path;
  Shape shape;
  std::size_t count;
};

/// Registry of trainable tensors keyed by stable dotted paths, e.g.
/// "depth_encoder.block1.layer2.head_k5.kernel". Iteration is sorted by path.
class ParamStore {
 public:
  /// Registers `value` as a trainable leaf. Throws ConfigError on duplicates.
  Tensor add(const std::string& path, Tensor value);

  const Tensor& get(const std::string& path) const;
  bool contains(const std::string& path) const { return params_.count(path) != 0; }

  const std::map<std::string, Tensor>& entries() const { return params_; }
  std::map<std::string, Tensor>& mutable_entries() { return params_; }
  std::size_t size() const { return params_.size(); }

  std::vector<ParamInfo> inventory() const;
  std::size_t total_count() const;
  void zero_grad();

 private:
  std::map<std::string, Tensor> params_;
};

/// Weight decay applies to ".kernel" and ".weight" entries only.
bool is_decayed(const std::string& path);

/// Seeded parameter initialisation.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed, double epsilon_raw = 0.0, double gate_target = 0.0)
      : rng_(seed), epsilon_raw_(epsilon_raw), gate_target_(gate_target) {}

  /// U(-b, b) with b = sqrt(6 / fan_in).
  Tensor he_uniform(Shape shape, std::size_t fan_in);
  Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  Tensor constant(Shape shape, double value) { return Tensor(std::move(shape), value); }

  /// Starting value of every MagaConv epsilon_raw when gate_target() is 0.
  double epsilon_raw() const { return epsilon_raw_; }

  /// When positive, each MagaConv head instead starts with the epsilon that
  /// maps a fully invalid footprint to this unsuitability, given its initial
  /// kernel. Values at or below 0 select the fixed epsilon_raw().
  double gate_target() const { return gate_target_; }

 private:
  SplitMix64 rng_;
  double epsilon_raw_;
  double gate_target_;
};

}  // namespace maga
