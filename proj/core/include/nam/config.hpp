#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nam/accounting.hpp"
#include "nam/dataset.hpp"
#include "nam/loss.hpp"
#include "nam/model_spec.hpp"

namespace nam {

/// Desk-scale training protocol. Defaults: 4-block CNN 16/32/64/128 with
/// combined NAM, batch 64, SGD lr 0.05 momentum 0.9, lr x0.1 every 3 epochs.
struct TrainConfig {
    std::uint64_t seed = 1;
    int epochs = 5;
    std::size_t batch_size = 64;
    double learning_rate = 0.05;
    double momentum = 0.9;
    int lr_step_epochs = 3; // 0 disables decay
    double lr_decay = 0.1;
    PenaltyConfig penalty;
    std::string data;
    DataFormat format = DataFormat::idx;
    AttentionKind attention = AttentionKind::nam;
    std::vector<std::size_t> widths = {16, 32, 64, 128};
    std::size_t reduction = 16;
    double tau = 0.01;
    std::size_t train_limit = 0; // 0 = whole split
    std::size_t test_limit = 0;
    std::string out;

    /// Throws ConfigError on invalid values (batch size < 2, p < 0, ...).
    void validate() const;
};

/// Flat "key = value" text, '#' comments. Keys: seed, epochs, batch_size,
/// learning_rate, momentum, lr_step_epochs, lr_decay, penalty,
/// penalty_channel, penalty_spatial, penalty_backbone, data, format,
/// attention, widths (comma separated), reduction, tau, train_limit,
/// test_limit, out. Unknown keys are rejected.
TrainConfig parse_train_config(std::string_view text, TrainConfig base = {});
TrainConfig load_train_config(const std::string& path);

/// Architecture description for `count`: repeated "block = C R H W" lines
/// plus optional "reduction" and "kernel".
struct ArchConfig {
    std::vector<BlockDims> blocks;
    CountOptions options;
};

ArchConfig parse_arch_config(std::string_view text);
ArchConfig load_arch_config(const std::string& path);

/// Reads a whole text file.
std::string read_text_file(const std::string& path);

} // namespace nam
