#include "nam/synthetic_digits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "nam/error.hpp"

namespace nam {
namespace {

struct Point {
    double x, y;
};

using Stroke = std::vector<Point>;
using Glyph = std::vector<Stroke>;

Stroke ellipse(double cx, double cy, double rx, double ry, int segments = 16) {
    Stroke s;
    for (int i = 0; i <= segments; ++i) {
        const double t = 2.0 * std::numbers::pi * i / segments;
        s.push_back({cx + rx * std::sin(t), cy - ry * std::cos(t)});
    }
    return s;
}

// Skeletons in the unit square, x to the right and y downwards.
const std::array<Glyph, 10>& glyphs() {
    static const std::array<Glyph, 10> g = {
        Glyph{ellipse(0.5, 0.5, 0.24, 0.38)},
        Glyph{{{0.36, 0.25}, {0.52, 0.1}, {0.52, 0.9}}},
        Glyph{{{0.25, 0.3}, {0.35, 0.15}, {0.5, 0.1}, {0.65, 0.15}, {0.72, 0.3}, {0.65, 0.45}, {0.25, 0.9}, {0.78, 0.9}}},
        Glyph{{{0.25, 0.15}, {0.5, 0.1}, {0.7, 0.2}, {0.7, 0.35}, {0.45, 0.5}, {0.7, 0.62}, {0.72, 0.78}, {0.5, 0.9}, {0.25, 0.85}}},
        Glyph{{{0.62, 0.9}, {0.62, 0.1}, {0.2, 0.65}, {0.8, 0.65}}},
        Glyph{{{0.72, 0.1}, {0.3, 0.1}, {0.27, 0.45}, {0.5, 0.42}, {0.7, 0.55}, {0.7, 0.75}, {0.5, 0.9}, {0.25, 0.85}}},
        Glyph{{{0.65, 0.12}, {0.4, 0.3}, {0.28, 0.6}, {0.35, 0.85}, {0.55, 0.9}, {0.7, 0.75}, {0.6, 0.55}, {0.4, 0.55}, {0.3, 0.65}}},
        Glyph{{{0.25, 0.1}, {0.75, 0.1}, {0.42, 0.9}}},
        Glyph{ellipse(0.5, 0.3, 0.17, 0.18), ellipse(0.5, 0.69, 0.21, 0.21)},
        Glyph{ellipse(0.5, 0.33, 0.2, 0.2), {{0.7, 0.35}, {0.62, 0.9}}},
    };
    return g;
}

double segment_distance(Point p, Point a, Point b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
    return std::sqrt(ex * ex + ey * ey);
}

} // namespace

Dataset synthetic_digits(std::size_t count, std::uint64_t seed, const SyntheticDigitsOptions& options) {
    if (options.size < 8) throw ConfigError("synthetic digits need at least 8x8 pixels");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset out;
    out.channels = 1;
    out.height = options.size;
    out.width = options.size;
    out.num_classes = 10;
    out.labels.resize(count);
    out.pixels.assign(count * options.size * options.size, 0.0);

    std::array<int, 10> order{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const double px = 1.0 / static_cast<double>(options.size);

    for (std::size_t n = 0; n < count; ++n) {
        if (n % 10 == 0) std::shuffle(order.begin(), order.end(), rng);
        const int digit = order[n % 10];
        out.labels[n] = digit;

        const double angle = options.max_rotation * unit(rng);
        const double sx = 0.85 + 0.15 * unit(rng);
        const double sy = 0.85 + 0.15 * unit(rng);
        const double shear = options.max_shear * unit(rng);
        const double tx = options.max_shift * unit(rng);
        const double ty = options.max_shift * unit(rng);
        const double thickness = 0.065 + 0.025 * unit(rng);
        const double ca = std::cos(angle), sa = std::sin(angle);

        auto transform = [&](Point p) {
            double x = (p.x - 0.5) * sx + shear * (p.y - 0.5);
            double y = (p.y - 0.5) * sy;
            return Point{ca * x - sa * y + 0.5 + tx, sa * x + ca * y + 0.5 + ty};
        };

        std::vector<std::pair<Point, Point>> segments;
        for (const auto& stroke : glyphs()[static_cast<std::size_t>(digit)]) {
            Stroke moved;
            for (auto p : stroke) {
                moved.push_back(transform({p.x + options.jitter * unit(rng), p.y + options.jitter * unit(rng)}));
            }
            for (std::size_t i = 0; i + 1 < moved.size(); ++i) segments.emplace_back(moved[i], moved[i + 1]);
        }

        double* image = out.pixels.data() + n * options.size * options.size;
        for (std::size_t r = 0; r < options.size; ++r) {
            for (std::size_t c = 0; c < options.size; ++c) {
                const Point p{(static_cast<double>(c) + 0.5) * px, (static_cast<double>(r) + 0.5) * px};
                double d = 1e9;
                for (const auto& [a, b] : segments) d = std::min(d, segment_distance(p, a, b));
                // one-pixel anti-aliased edge
                double v = std::clamp((thickness - d) / px + 0.5, 0.0, 1.0);
                v += options.noise * gauss(rng);
                image[r * options.size + c] = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return out;
}

void write_synthetic_mnist(const std::filesystem::path& dir, std::size_t train_count, std::size_t test_count,
                           std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    const auto train = synthetic_digits(train_count, seed);
    const auto test = synthetic_digits(test_count, seed ^ 0x9e3779b97f4a7c15ULL);
    write_idx(train, dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    write_idx(test, dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
}

} // namespace nam
