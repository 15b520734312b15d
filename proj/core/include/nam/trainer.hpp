#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nam/config.hpp"
#include "nam/dataset.hpp"
#include "nam/metrics.hpp"
#include "nam/network.hpp"

namespace nam {

struct EvalResult {
    double top1_error = 0.0;
    /// Absent when the model has fewer than five classes.
    std::optional<double> top5_error;
};

/// Number of rows whose label ranks among the k largest logits. Ties go to
/// the lower class index.
std::size_t top_k_correct(const Tensor& logits, std::span<const int> labels, std::size_t k);

/// Eval-mode top-1/top-5 error in percent.
EvalResult evaluate(Network& net, const Dataset& data, std::size_t batch_size = 256);

struct TrainHooks {
    /// Called after every optimizer step with the global step index and the
    /// batch loss computed before the update.
    std::function<void(std::size_t step, double loss)> on_step;
    std::function<void(const MetricsRow&)> on_epoch;
};

/// The model spec for `cfg` on images of the given shape.
ModelSpec model_for(const TrainConfig& cfg, std::size_t channels, std::size_t height, std::size_t width,
                    std::size_t num_classes);

/// Seeded SGD loop; one MetricsRow per epoch, evaluated on data.test (or on
/// data.train when the test split is empty). Same config and seed give a
/// bit-identical sequence.
std::vector<MetricsRow> train(Network& net, const TrainConfig& cfg, const DataSplits& data,
                              const TrainHooks& hooks = {});

} // namespace nam
