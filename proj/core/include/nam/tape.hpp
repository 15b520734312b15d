#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nam/tensor.hpp"

namespace nam {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
};

/// Accumulates input gradients given the output gradient. `input_grads[i]` is
/// null when input i does not need a gradient; otherwise it points at a
/// buffer of the input's size that must be added to, not overwritten.
using BackwardFn = std::function<void(std::span<const double> output_grad,
                                      std::span<double* const> input_grads)>;

struct TapeNode {
    std::string_view op;
    Tensor value;
    std::vector<std::size_t> inputs;
    bool requires_grad = false;
    BackwardFn backward;
};

/// Result of a reverse pass.
class Gradients {
  public:
    /// Gradient of the root with respect to `v`. Zero-filled when `v` is not
    /// reachable from the root.
    Tensor grad(Var v) const;
    bool has(Var v) const;

    /// Node ids in the order the reverse pass visited them.
    const std::vector<std::size_t>& visit_order() const noexcept { return visit_order_; }

  private:
    friend class Tape;
    const Tape* tape_ = nullptr;
    std::vector<std::vector<double>> grads_;
    std::vector<std::size_t> visit_order_;
};

/// Explicit record of operations. Nodes are appended in creation order and
/// every input id is smaller than its consumer id, so reverse id order is a
/// reverse topological order.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf holding `value`; tracks gradients iff value.requires_grad().
    Var leaf(Tensor value);
    Var variable(Tensor value) { return leaf(value.with_requires_grad(true)); }
    Var constant(Tensor value) { return leaf(value.with_requires_grad(false)); }

    /// Records an operation output. The node requires a gradient iff any
    /// input does.
    Var record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

    const TapeNode& node(std::size_t id) const { return nodes_.at(id); }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Exact reverse-mode gradients of the scalar `root`.
    Gradients backward(Var root) const;

  private:
    std::vector<TapeNode> nodes_;
};

} // namespace nam
