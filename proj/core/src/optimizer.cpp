#include "nam/optimizer.hpp"

#include <cmath>
#include <vector>

#include "nam/error.hpp"

namespace nam {

Sgd::Sgd(double learning_rate, double momentum) : lr_(learning_rate), momentum_(momentum) {
    set_learning_rate(learning_rate);
    if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must lie in [0,1)");
}

void Sgd::set_learning_rate(double lr) {
    if (!(lr > 0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
    lr_ = lr;
}

void Sgd::step(const ForwardContext& ctx, const Gradients& grads) {
    for (const auto& b : ctx.bindings()) {
        if (!grads.grad(b.var).all_finite()) {
            throw NumericError("non-finite gradient for parameter '" + b.parameter->name + "'");
        }
    }
    for (const auto& b : ctx.bindings()) step(*b.parameter, grads.grad(b.var));
}

void Sgd::step(Parameter& p, const Tensor& grad) {
    if (grad.shape() != p.value.shape()) {
        throw ShapeError("gradient " + to_string(grad.shape()) + " does not match parameter '" + p.name + "' " +
                         to_string(p.value.shape()));
    }
    if (!grad.all_finite()) throw NumericError("non-finite gradient for parameter '" + p.name + "'");

    auto it = velocity_.find(p.name);
    if (it == velocity_.end()) it = velocity_.emplace(p.name, Tensor::zeros(p.value.shape())).first;

    const auto n = p.value.size();
    std::vector<double> v(n), theta(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = momentum_ * it->second[i] + grad[i];
        theta[i] = p.value[i] - lr_ * v[i];
    }
    it->second = Tensor(p.value.shape(), std::move(v));
    p.value = Tensor(p.value.shape(), std::move(theta));
}

} // namespace nam
