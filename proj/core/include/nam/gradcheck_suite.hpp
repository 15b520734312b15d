#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nam {

/// Names accepted by run_gradcheck.
const std::vector<std::string>& gradcheck_ops();

/// Finite-difference check of one operator on seeded random inputs. Every
/// differentiable input is checked in turn; the result is the largest
/// relative error seen. Throws ConfigError for an unknown op.
double run_gradcheck(std::string_view op, std::uint64_t seed, double eps = 1e-5);

} // namespace nam
