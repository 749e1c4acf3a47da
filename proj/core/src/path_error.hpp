#pragma once

#include <string>
#include <utility>

#include "maga/errors.hpp"

namespace maga::detail {

// Runs `fn`, prefixing any NumericError with the layer path that raised it.
template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return std::forward<Fn>(fn)();
  } catch (const NumericError& e) {
    throw NumericError(path + ": " + e.what());
  }
}

}  // namespace maga::detail
