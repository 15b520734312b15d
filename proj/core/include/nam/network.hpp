#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nam/attention.hpp"
#include "nam/baselines.hpp"
#include "nam/model_spec.hpp"

namespace nam {

/// Named tensor, used for checkpoints.
struct NamedTensor {
    std::string name;
    Tensor value;
};

/// A group of attention scales (one NAM gamma or lambda vector).
struct ScaleGroup {
    enum class Kind { channel, spatial };
    Kind kind;
    Parameter* parameter;
};

/// Runnable model built from a ModelSpec.
class Network {
  public:
    Network(ModelSpec spec, std::uint64_t seed);

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    const ModelSpec& spec() const noexcept { return spec_; }

    /// input [N,C,H,W] -> logits [N,K], or the last block's features when the
    /// spec has no classifier.
    Var forward(ForwardContext& ctx, Var input);

    std::vector<Parameter*> parameters();
    std::size_t parameter_count();

    /// gamma/lambda of every NAM submodule, in block order.
    std::vector<ScaleGroup> nam_scales();
    /// gamma of every backbone batch norm (not NAM-internal).
    std::vector<Parameter*> backbone_bn_scales();

    /// Parameters and running statistics, plus the architecture record.
    std::vector<NamedTensor> state();
    /// Overwrites parameters and running statistics by name; every entry of
    /// state() must be present with a matching shape.
    void load_state(const std::vector<NamedTensor>& tensors);

    /// Reversible numeric encoding of a ModelSpec, stored in checkpoints.
    static Tensor encode_spec(const ModelSpec& spec);
    static ModelSpec decode_spec(const Tensor& encoded);
    static constexpr const char* spec_record_name = "meta.arch";

    struct Block;

  private:
    template <class OnParameter, class OnBuffer>
    void for_each_tensor(OnParameter&& on_parameter, OnBuffer&& on_buffer);

    ModelSpec spec_;
    std::vector<Block> blocks_;
    std::optional<Parameter> head_weight_;
    std::optional<Parameter> head_bias_;
};

struct Network::Block {
    BlockSpec spec;
    Parameter conv1;
    std::optional<Parameter> conv1_bias;
    std::optional<BatchNormChannel> bn1;
    std::optional<Parameter> conv2;
    std::optional<BatchNormChannel> bn2;
    std::optional<Parameter> skip_conv;
    std::optional<BatchNormChannel> skip_bn;
    std::optional<NamModule> nam;
    std::optional<SeChannelAttention> se;
};

} // namespace nam
