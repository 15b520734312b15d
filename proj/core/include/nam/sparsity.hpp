#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nam/tensor.hpp"

namespace nam {

class Network;

struct ScaleStats {
    std::string name;
    bool spatial = false;
    std::size_t count = 0;
    double sum_abs = 0.0;
    double fraction_below = 0.0;
    /// Shannon entropy (nats) of |s| / sum|s|, with 0 ln 0 = 0.
    double entropy = 0.0;
};

struct SparsityReport {
    double tau = 0.01;
    std::vector<ScaleStats> modules;
    double sum_abs_gamma = 0.0;
    double sum_abs_lambda = 0.0;
    /// Share of all NAM scales with |s| < tau.
    double fraction_below = 0.0;
    /// Sum of the per-module entropies.
    double total_entropy = 0.0;
};

ScaleStats scale_stats(const Tensor& scales, double tau);

/// Statistics of every NAM gamma/lambda vector of `net`.
SparsityReport sparsity_report(Network& net, double tau = 0.01);

std::string to_json(const SparsityReport& report);

} // namespace nam
