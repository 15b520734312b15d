#pragma once

#include <map>
#include <span>
#include <string>

#include "nam/module.hpp"

namespace nam {

/// SGD with classic momentum: v <- m*v + g, theta <- theta - lr*v.
class Sgd {
  public:
    Sgd(double learning_rate, double momentum);

    double learning_rate() const noexcept { return lr_; }
    void set_learning_rate(double lr);

    /// Updates every parameter bound in `ctx` from `grads`. Throws
    /// NumericError naming the first parameter with a non-finite gradient,
    /// before anything is modified.
    void step(const ForwardContext& ctx, const Gradients& grads);

    /// Single-parameter update with an explicit gradient.
    void step(Parameter& p, const Tensor& grad);

  private:
    double lr_;
    double momentum_;
    std::map<std::string, Tensor> velocity_;
};

} // namespace nam
