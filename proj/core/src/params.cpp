#include "maga/params.hpp"

#include <cmath>

#include "maga/errors.hpp"

namespace maga {

Tensor ParamStore::add(const std::string& path, Tensor value) {
  if (params_.count(path)) throw ConfigError("duplicate parameter path " + path);
  value.set_requires_grad(true);
  params_.emplace(path, value);
  return value;
}

const Tensor& ParamStore::get(const std::string& path) const {
  auto it = params_.find(path);
  if (it == params_.end()) throw ArgumentError("unknown parameter " + path);
  return it->second;
}

std::vector<ParamInfo> ParamStore::inventory() const {
  std::vector<ParamInfo> out;
  out.reserve(params_.size());
  for (const auto& [path, t] : params_) out.push_back({path, t.shape(), t.size()});
  return out;
}

std::size_t ParamStore::total_count() const {
  std::size_t n = 0;
  for (const auto& [path, t] : params_) n += t.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& entry : params_) entry.second.zero_grad();
}

bool is_decayed(const std::string& path) {
  auto ends_with = [&](const std::string& suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".kernel") || ends_with(".weight");
}

Tensor Initializer::he_uniform(Shape shape, std::size_t fan_in) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = rng_.uniform(-bound, bound);
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace maga
