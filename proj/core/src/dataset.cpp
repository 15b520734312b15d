#include "nam/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "nam/error.hpp"

namespace nam {
namespace {

constexpr std::uint32_t idx_images_magic = 0x00000803;
constexpr std::uint32_t idx_labels_magic = 0x00000801;
constexpr std::size_t cifar_pixels = 3 * 32 * 32;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::filesystem::path& path) {
    if (bytes.size() < offset + 4) {
        throw DataError("'" + path.string() + "' truncated in header: expected at least " + std::to_string(offset + 4) +
                            " bytes, got " + std::to_string(bytes.size()),
                        static_cast<std::int64_t>(bytes.size()));
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void require_size(const std::vector<std::uint8_t>& bytes, std::size_t expected, const std::filesystem::path& path) {
    if (bytes.size() < expected) {
        throw DataError("'" + path.string() + "' truncated: expected " + std::to_string(expected) + " bytes, got " +
                            std::to_string(bytes.size()),
                        static_cast<std::int64_t>(bytes.size()));
    }
    if (bytes.size() > expected) {
        throw DataError("'" + path.string() + "' has " + std::to_string(bytes.size() - expected) +
                            " trailing bytes after the declared records",
                        static_cast<std::int64_t>(expected));
    }
}

int checked_label(std::uint8_t raw, std::size_t num_classes, std::size_t offset, const std::filesystem::path& path) {
    if (raw >= num_classes) {
        throw DataError("'" + path.string() + "': label " + std::to_string(raw) + " outside [0," +
                            std::to_string(num_classes) + ")",
                        static_cast<std::int64_t>(offset));
    }
    return raw;
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                           static_cast<char>(v)};
    out.write(bytes, 4);
}

} // namespace

Tensor Dataset::batch(std::span<const std::size_t> indices) const {
    const auto n = image_size();
    std::vector<double> out(indices.size() * n);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= size()) throw ConfigError("dataset index out of range");
        std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(indices[i] * n), n,
                    out.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
    return Tensor({indices.size(), channels, height, width}, std::move(out));
}

std::vector<int> Dataset::batch_labels(std::span<const std::size_t> indices) const {
    std::vector<int> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(labels.at(i));
    return out;
}

Dataset Dataset::head(std::size_t n) const {
    Dataset out = *this;
    n = std::min(n, size());
    out.labels.resize(n);
    out.pixels.resize(n * image_size());
    return out;
}

DataFormat parse_data_format(std::string_view text) {
    if (text == "idx") return DataFormat::idx;
    if (text == "cifar" || text == "cifar-binary") return DataFormat::cifar;
    throw ConfigError("unknown data format '" + std::string(text) + "' (expected idx or cifar)");
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t num_classes) {
    const auto img = read_file(images);
    if (const auto magic = read_be32(img, 0, images); magic != idx_images_magic) {
        throw DataError("'" + images.string() + "': bad IDX image magic " + std::to_string(magic), 0);
    }
    const std::size_t n = read_be32(img, 4, images);
    const std::size_t h = read_be32(img, 8, images);
    const std::size_t w = read_be32(img, 12, images);
    require_size(img, 16 + n * h * w, images);

    const auto lab = read_file(labels);
    if (const auto magic = read_be32(lab, 0, labels); magic != idx_labels_magic) {
        throw DataError("'" + labels.string() + "': bad IDX label magic " + std::to_string(magic), 0);
    }
    const std::size_t nl = read_be32(lab, 4, labels);
    require_size(lab, 8 + nl, labels);
    if (nl != n) {
        throw DataError("'" + labels.string() + "' holds " + std::to_string(nl) + " labels for " + std::to_string(n) +
                            " images",
                        4);
    }

    Dataset out;
    out.channels = 1;
    out.height = h;
    out.width = w;
    out.num_classes = num_classes;
    out.pixels.resize(n * h * w);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = img[16 + i] / 255.0;
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = checked_label(lab[8 + i], num_classes, 8 + i, labels);
    return out;
}

Dataset load_cifar(std::span<const std::filesystem::path> files, std::size_t label_bytes, std::size_t num_classes) {
    if (label_bytes != 1 && label_bytes != 2) throw ConfigError("CIFAR records carry 1 or 2 label bytes");
    const auto record = label_bytes + cifar_pixels;
    Dataset out;
    out.channels = 3;
    out.height = 32;
    out.width = 32;
    out.num_classes = num_classes;
    for (const auto& path : files) {
        const auto bytes = read_file(path);
        if (bytes.size() % record != 0) {
            const auto start = bytes.size() / record * record;
            throw DataError("'" + path.string() + "': truncated record, expected " + std::to_string(record) +
                                " bytes, got " + std::to_string(bytes.size() - start),
                            static_cast<std::int64_t>(start));
        }
        for (std::size_t off = 0; off < bytes.size(); off += record) {
            const auto label_at = off + label_bytes - 1;
            out.labels.push_back(checked_label(bytes[label_at], num_classes, label_at, path));
            for (std::size_t i = 0; i < cifar_pixels; ++i) out.pixels.push_back(bytes[off + label_bytes + i] / 255.0);
        }
    }
    return out;
}

DataSplits load_dataset(const std::filesystem::path& dir, DataFormat format) {
    DataSplits splits;
    if (format == DataFormat::idx) {
        splits.train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
        splits.test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
    } else if (std::filesystem::exists(dir / "train.bin")) {
        const std::filesystem::path train[] = {dir / "train.bin"};
        const std::filesystem::path test[] = {dir / "test.bin"};
        splits.train = load_cifar(train, 2, 100);
        splits.test = load_cifar(test, 2, 100);
    } else {
        std::vector<std::filesystem::path> train;
        for (int i = 1; i <= 5; ++i) {
            auto p = dir / ("data_batch_" + std::to_string(i) + ".bin");
            if (std::filesystem::exists(p)) train.push_back(p);
        }
        if (train.empty()) throw DataError("no CIFAR batch files in '" + dir.string() + "'");
        const std::filesystem::path test[] = {dir / "test_batch.bin"};
        splits.train = load_cifar(train, 1, 10);
        splits.test = load_cifar(test, 1, 10);
    }
    if (splits.train.size() == 0) throw DataError("training split in '" + dir.string() + "' is empty");
    if (splits.test.image_size() != splits.train.image_size() && splits.test.size() > 0) {
        throw DataError("train and test images differ in size");
    }
    const auto stats = Standardizer::fit(splits.train);
    stats.apply(splits.train);
    stats.apply(splits.test);
    return splits;
}

Standardizer Standardizer::fit(const Dataset& train) {
    Standardizer s;
    s.mean.assign(train.channels, 0.0);
    s.stddev.assign(train.channels, 1.0);
    const auto plane = train.height * train.width;
    const auto count = static_cast<double>(train.size() * plane);
    if (count == 0) return s;
    for (std::size_t c = 0; c < train.channels; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            const auto* p = train.pixels.data() + (i * train.channels + c) * plane;
            for (std::size_t k = 0; k < plane; ++k) sum += p[k];
        }
        const double mean = sum / count;
        double sq = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            const auto* p = train.pixels.data() + (i * train.channels + c) * plane;
            for (std::size_t k = 0; k < plane; ++k) sq += (p[k] - mean) * (p[k] - mean);
        }
        s.mean[c] = mean;
        s.stddev[c] = std::max(std::sqrt(sq / count), 1e-12);
    }
    return s;
}

void Standardizer::apply(Dataset& data) const {
    if (data.channels != mean.size()) throw ShapeError("standardizer channel count mismatch");
    const auto plane = data.height * data.width;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t c = 0; c < data.channels; ++c) {
            auto* p = data.pixels.data() + (i * data.channels + c) * plane;
            for (std::size_t k = 0; k < plane; ++k) p[k] = (p[k] - mean[c]) / stddev[c];
        }
    }
}

void write_idx(const Dataset& data, const std::filesystem::path& images, const std::filesystem::path& labels) {
    if (data.channels != 1) throw ConfigError("IDX image files hold single-channel images");
    std::ofstream img(images, std::ios::binary);
    std::ofstream lab(labels, std::ios::binary);
    if (!img || !lab) throw DataError("cannot write IDX files");
    put_be32(img, idx_images_magic);
    put_be32(img, static_cast<std::uint32_t>(data.size()));
    put_be32(img, static_cast<std::uint32_t>(data.height));
    put_be32(img, static_cast<std::uint32_t>(data.width));
    for (double v : data.pixels) {
        img.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
    put_be32(lab, idx_labels_magic);
    put_be32(lab, static_cast<std::uint32_t>(data.size()));
    for (int y : data.labels) lab.put(static_cast<char>(static_cast<std::uint8_t>(y)));
}

} // namespace nam
