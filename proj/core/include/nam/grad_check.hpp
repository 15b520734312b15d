#pragma once

#include <functional>

#include "nam/tape.hpp"

namespace nam {

/// A scalar-valued function recorded on the tape of its argument.
using ScalarFunction = std::function<Var(Var)>;

/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
double relative_error(double analytic, double numeric) noexcept;

/// Central-difference gradient of `f` at `x` compared elementwise against
/// the reverse-mode gradient. Returns the largest relative error.
double grad_check(const ScalarFunction& f, const Tensor& x, double eps);

/// Central-difference gradient alone, one fresh tape per evaluation.
Tensor numeric_gradient(const ScalarFunction& f, const Tensor& x, double eps);

} // namespace nam
