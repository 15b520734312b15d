#include "nam/tape.hpp"

#include "nam/error.hpp"

namespace nam {

const Tensor& Var::value() const {
    if (tape == nullptr) throw ConfigError("unbound Var");
    return tape->node(id).value;
}

Var Tape::leaf(Tensor value) {
    TapeNode node;
    node.op = "leaf";
    node.requires_grad = value.requires_grad();
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
}

Var Tape::record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
    TapeNode node;
    node.op = op;
    node.value = std::move(value);
    node.inputs.reserve(inputs.size());
    for (const auto& in : inputs) {
        if (in.tape != this) throw ConfigError(std::string(op) + ": input recorded on a different tape");
        node.inputs.push_back(in.id);
        node.requires_grad = node.requires_grad || nodes_[in.id].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
}

Gradients Tape::backward(Var root) const {
    if (root.tape != this) throw ConfigError("backward: root recorded on a different tape");
    const auto& root_node = nodes_.at(root.id);
    if (root_node.value.size() != 1) {
        throw ShapeError("backward: root must be scalar, got shape " + to_string(root_node.value.shape()));
    }

    Gradients out;
    out.tape_ = this;
    out.grads_.resize(nodes_.size());
    if (!root_node.requires_grad) return out;
    out.grads_[root.id].assign(1, 1.0);

    std::vector<double*> sinks;
    for (std::size_t id = root.id + 1; id-- > 0;) {
        const auto& node = nodes_[id];
        if (out.grads_[id].empty() || !node.requires_grad) continue;
        out.visit_order_.push_back(id);
        if (!node.backward) continue;

        sinks.assign(node.inputs.size(), nullptr);
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
            auto in = node.inputs[k];
            if (!nodes_[in].requires_grad) continue;
            auto& g = out.grads_[in];
            if (g.empty()) g.assign(nodes_[in].value.size(), 0.0);
            sinks[k] = g.data();
        }
        node.backward(out.grads_[id], sinks);
    }
    return out;
}

bool Gradients::has(Var v) const { return v.id < grads_.size() && !grads_[v.id].empty(); }

Tensor Gradients::grad(Var v) const {
    if (tape_ == nullptr || v.tape != tape_) throw ConfigError("grad: Var from a different tape");
    const auto& shape = v.value().shape();
    if (!has(v)) return Tensor::zeros(shape);
    return Tensor(shape, grads_[v.id]);
}

} // namespace nam
