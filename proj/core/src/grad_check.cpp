#include "nam/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nam/error.hpp"

namespace nam {
namespace {

double evaluate(const ScalarFunction& f, const Tensor& x) {
    Tape tape;
    Var out = f(tape.constant(x));
    if (out.value().size() != 1) {
        throw ShapeError("grad_check: function must return a scalar, got " + to_string(out.shape()));
    }
    return out.value().item();
}

} // namespace

double relative_error(double analytic, double numeric) noexcept {
    return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

Tensor numeric_gradient(const ScalarFunction& f, const Tensor& x, double eps) {
    if (!(eps > 0)) throw ConfigError("grad_check: eps must be positive");
    std::vector<double> base(x.data().begin(), x.data().end());
    std::vector<double> grad(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        auto probe = base;
        probe[i] = base[i] + eps;
        const double up = evaluate(f, Tensor(x.shape(), probe));
        probe[i] = base[i] - eps;
        const double down = evaluate(f, Tensor(x.shape(), probe));
        grad[i] = (up - down) / (2.0 * eps);
    }
    return Tensor(x.shape(), std::move(grad));
}

double grad_check(const ScalarFunction& f, const Tensor& x, double eps) {
    Tape tape;
    Var input = tape.variable(x);
    Var out = f(input);
    const Tensor analytic = tape.backward(out).grad(input);
    const Tensor numeric = numeric_gradient(f, x, eps);

    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        worst = std::max(worst, relative_error(analytic[i], numeric[i]));
    }
    return worst;
}

} // namespace nam
