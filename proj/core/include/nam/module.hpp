#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nam/tape.hpp"

namespace nam {

enum class Mode { train, eval };

/// A named trainable tensor owned by a module.
struct Parameter {
    std::string name;
    Tensor value;
};

/// One forward pass: the tape it records on, train/eval mode, and the
/// parameters bound as tape leaves so their gradients can be read back.
class ForwardContext {
  public:
    struct Binding {
        Parameter* parameter;
        Var var;
    };

    ForwardContext(Tape& tape, Mode mode) : tape_(&tape), mode_(mode) {}

    Tape& tape() const noexcept { return *tape_; }
    Mode mode() const noexcept { return mode_; }

    /// Leaf for `p` on this tape; repeated calls return the same Var.
    Var bind(Parameter& p) {
        for (const auto& b : bindings_) {
            if (b.parameter == &p) return b.var;
        }
        Var v = tape_->variable(p.value);
        bindings_.push_back({&p, v});
        return v;
    }

    /// Makes `v` stand in for `p` in this pass, e.g. to differentiate with
    /// respect to a parameter from outside. Must precede any bind(p).
    void bind_to(Parameter& p, Var v) {
        for (const auto& b : bindings_) {
            if (b.parameter == &p) throw std::logic_error("parameter '" + p.name + "' already bound");
        }
        if (v.tape != tape_) throw std::logic_error("bind_to: Var from a different tape");
        if (v.shape() != p.value.shape()) throw std::logic_error("bind_to: shape mismatch for '" + p.name + "'");
        bindings_.push_back({&p, v});
    }

    const std::vector<Binding>& bindings() const noexcept { return bindings_; }

  private:
    Tape* tape_;
    Mode mode_;
    std::vector<Binding> bindings_;
};

} // namespace nam
