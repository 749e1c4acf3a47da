#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "maga/params.hpp"

namespace maga::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct GradientOptions {
  std::size_t coords_per_class = 50;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::size_t size = 16;
  std::uint64_t seed = 11;
};

/// Adds a uniform offset in [-amplitude, amplitude] to every bias. Zero
/// biases put units whose whole input is zero exactly on the ReLU kink, where
/// finite differences are meaningless.
void offset_biases(ParamStore& params, std::uint64_t seed, double amplitude = 0.05);

/// Reverse-mode gradients of the total loss of a small model against central
/// differences, one result per parameter class. Classes smaller than
/// `coords_per_class` are checked exhaustively.
std::vector<CheckResult> check_gradients(const GradientOptions& options = {});

/// Full model on a fully valid input equals its gating-disabled twin bit for bit.
CheckResult check_vanilla_collapse(std::size_t size = 32, std::uint64_t seed = 3);

/// RnC(0) = 1, RnC(ln 2) = 0, monotone non-increasing with range in [0, 1]
/// on `points` grid points over [0, 4].
CheckResult check_rnc_contract(std::size_t points = 1000);

/// Random masks: pyramid validity never shrinks along the nine entries and
/// every entry equals the loop min-pool oracle.
CheckResult check_mask_pyramid(std::size_t count = 100, std::size_t size = 64, std::uint64_t seed = 5);

/// Monotone gating: adding invalid pixels never raises a gate value.
CheckResult check_gate_monotonicity(std::size_t count = 50, std::uint64_t seed = 6);

CheckResult check_conv_oracle(std::size_t count = 50, double tolerance = 1e-12, std::uint64_t seed = 7);

/// <conv(x), y> = <x, conv_transpose(y)> for random shapes and strides.
CheckResult check_conv_adjoint(std::size_t count = 50, double tolerance = 1e-10, std::uint64_t seed = 8);

CheckResult check_magaconv_oracle(std::size_t count = 200, double tolerance = 1e-12, std::uint64_t seed = 9);

/// Also checks that the MLP parameter count does not depend on c.
CheckResult check_cmf_oracle(std::size_t count = 100, double tolerance = 1e-12, std::uint64_t seed = 10);

/// evaluate() against the loop oracle, rmse >= mae, delta monotone in t,
/// rel and delta invariant under joint scaling.
CheckResult check_metric_oracle(std::size_t count = 100, double tolerance = 1e-12, std::uint64_t seed = 12);

/// total = mse + sc exactly, both zero iff pred = gt, interior Laplacian
/// blind to constant offsets; agreement with the loop oracle.
CheckResult check_loss_contract(std::size_t count = 50, std::uint64_t seed = 13);

/// Names accepted by run_suite.
const std::vector<std::string>& suite_names();

/// "grads", "masks", "oracles" or "all". Throws ArgumentError otherwise.
std::vector<CheckResult> run_suite(const std::string& suite);

/// One "PASS name  detail" / "FAIL name  detail" line per result.
void print_results(std::ostream& out, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace maga::verify
