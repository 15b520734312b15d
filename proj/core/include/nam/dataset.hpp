#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "nam/tensor.hpp"

namespace nam {

/// Labeled images stored as one [count, C, H, W] row-major buffer.
struct Dataset {
    std::size_t channels = 1;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t num_classes = 0;
    std::vector<double> pixels;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t image_size() const noexcept { return channels * height * width; }

    /// [indices.size(), C, H, W] batch in the given order.
    Tensor batch(std::span<const std::size_t> indices) const;
    std::vector<int> batch_labels(std::span<const std::size_t> indices) const;

    /// First `n` samples (or all, if fewer).
    Dataset head(std::size_t n) const;
};

struct DataSplits {
    Dataset train;
    Dataset test;
};

enum class DataFormat { idx, cifar };

DataFormat parse_data_format(std::string_view text);

/// IDX image file (magic 0x00000803, dims N,H,W) and label file (magic
/// 0x00000801). Pixels are scaled to [0,1]. Labels >= num_classes are
/// rejected with their byte offset.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t num_classes = 10);

/// CIFAR binary batch files: records of `label_bytes` label bytes (the last
/// one is used, i.e. the fine label for 2-byte records) and 3072 pixel bytes.
Dataset load_cifar(std::span<const std::filesystem::path> files, std::size_t label_bytes = 1,
                   std::size_t num_classes = 10);

/// Loads a train/test pair from a directory:
///   idx:   train-images-idx3-ubyte, train-labels-idx1-ubyte,
///          t10k-images-idx3-ubyte,  t10k-labels-idx1-ubyte
///   cifar: data_batch_*.bin + test_batch.bin (10 classes, 1 label byte) or
///          train.bin + test.bin (100 fine classes, 2 label bytes)
/// Both splits are standardized per channel with training-split statistics.
DataSplits load_dataset(const std::filesystem::path& dir, DataFormat format);

/// Per-channel mean/std of the training split.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const Dataset& train);
    void apply(Dataset& data) const;
};

/// Writes `data` (pixels assumed in [0,1]) as an IDX image/label pair.
void write_idx(const Dataset& data, const std::filesystem::path& images, const std::filesystem::path& labels);

} // namespace nam
