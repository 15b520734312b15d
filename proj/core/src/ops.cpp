#include "nam/ops.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nam/error.hpp"

namespace nam {
namespace {

void require_same_tape(Var a, Var b, const char* op) {
    if (a.tape != b.tape) throw ConfigError(std::string(op) + ": inputs recorded on different tapes");
}

void require_rank(Var v, std::size_t rank, const char* op, const char* what) {
    if (v.value().rank() != rank) {
        throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) +
                         ", got shape " + to_string(v.shape()));
    }
}

struct ConvGeometry {
    std::size_t n, c, h, w;
    std::size_t f, kh, kw;
    std::size_t stride, pad;
    std::size_t oh, ow;

    std::size_t patch() const { return c * kh * kw; }
    std::size_t positions() const { return oh * ow; }
};

// cols[(ci*kh + i)*kw + j][oy*ow + ox] = x[ci, oy*s + i - p, ox*s + j - p]
void im2col(const ConvGeometry& g, const double* image, double* cols) {
    const auto P = g.positions();
    for (std::size_t ci = 0; ci < g.c; ++ci) {
        const double* plane = image + ci * g.h * g.w;
        for (std::size_t i = 0; i < g.kh; ++i) {
            for (std::size_t j = 0; j < g.kw; ++j) {
                double* row = cols + ((ci * g.kh + i) * g.kw + j) * P;
                for (std::size_t oy = 0; oy < g.oh; ++oy) {
                    const auto y = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
                    double* out = row + oy * g.ow;
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.h)) {
                        std::fill(out, out + g.ow, 0.0);
                        continue;
                    }
                    const double* src = plane + static_cast<std::size_t>(y) * g.w;
                    for (std::size_t ox = 0; ox < g.ow; ++ox) {
                        const auto x = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
                        out[ox] = (x < 0 || x >= static_cast<std::ptrdiff_t>(g.w)) ? 0.0 : src[x];
                    }
                }
            }
        }
    }
}

void col2im_add(const ConvGeometry& g, const double* cols, double* image) {
    const auto P = g.positions();
    for (std::size_t ci = 0; ci < g.c; ++ci) {
        double* plane = image + ci * g.h * g.w;
        for (std::size_t i = 0; i < g.kh; ++i) {
            for (std::size_t j = 0; j < g.kw; ++j) {
                const double* row = cols + ((ci * g.kh + i) * g.kw + j) * P;
                for (std::size_t oy = 0; oy < g.oh; ++oy) {
                    const auto y = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.h)) continue;
                    double* dst = plane + static_cast<std::size_t>(y) * g.w;
                    for (std::size_t ox = 0; ox < g.ow; ++ox) {
                        const auto x = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
                        if (x >= 0 && x < static_cast<std::ptrdiff_t>(g.w)) dst[x] += row[oy * g.ow + ox];
                    }
                }
            }
        }
    }
}

// C[m,n] (+)= op(A) * op(B), all row-major.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double beta, double* c) {
    const auto lda = static_cast<int>(trans_a ? m : k);
    const auto ldb = static_cast<int>(trans_b ? k : n);
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), 1.0, a, lda, b, ldb, beta, c,
                static_cast<int>(n));
}

template <class F>
Var unary(Var x, std::string_view op, F&& forward_and_derivative) {
    const auto& in = x.value();
    std::vector<double> out(in.size());
    std::vector<double> deriv(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        auto [y, dy] = forward_and_derivative(in[i]);
        out[i] = y;
        deriv[i] = dy;
    }
    return x.tape->record(op, Tensor(in.shape(), std::move(out)), {x},
                          [deriv = std::move(deriv)](std::span<const double> g, std::span<double* const> sinks) {
                              if (!sinks[0]) return;
                              for (std::size_t i = 0; i < g.size(); ++i) sinks[0][i] += g[i] * deriv[i];
                          });
}

} // namespace

namespace kernels {

double sigmoid(double x) noexcept {
    // Clamped so the result stays strictly inside (0,1) even when exp
    // saturates.
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    double y;
    if (x >= 0) {
        y = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        y = e / (1.0 + e);
    }
    return std::clamp(y, lo, hi);
}

} // namespace kernels

Var conv2d(Var input, Var kernel, std::optional<Var> bias, Conv2dOptions options) {
    require_same_tape(input, kernel, "conv2d");
    require_rank(input, 4, "conv2d", "input");
    require_rank(kernel, 4, "conv2d", "kernel");
    const auto& x = input.value();
    const auto& k = kernel.value();
    if (options.stride == 0) throw ConfigError("conv2d: stride must be positive");

    ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), k.dim(0), k.dim(2), k.dim(3),
                   options.stride, options.padding, 0, 0};
    if (k.dim(1) != g.c) {
        throw ShapeError("conv2d: kernel " + to_string(k.shape()) + " does not match input " +
                         to_string(x.shape()) + " (channel count differs)");
    }
    if (g.h + 2 * g.pad < g.kh || g.w + 2 * g.pad < g.kw) {
        throw ShapeError("conv2d: kernel " + to_string(k.shape()) + " larger than padded input " +
                         to_string(x.shape()));
    }
    g.oh = (g.h + 2 * g.pad - g.kh) / g.stride + 1;
    g.ow = (g.w + 2 * g.pad - g.kw) / g.stride + 1;
    if (bias) {
        require_same_tape(input, *bias, "conv2d");
        if (bias->value().shape() != Shape{g.f}) {
            throw ShapeError("conv2d: bias " + to_string(bias->shape()) + " does not match kernel " +
                             to_string(k.shape()));
        }
    }

    const auto K = g.patch();
    const auto P = g.positions();
    const auto in_plane = g.c * g.h * g.w;
    const auto out_plane = g.f * P;

    std::vector<double> out(g.n * out_plane);
    std::vector<double> cols(K * P);
    for (std::size_t n = 0; n < g.n; ++n) {
        im2col(g, x.data().data() + n * in_plane, cols.data());
        double* dst = out.data() + n * out_plane;
        gemm(false, false, g.f, P, K, k.data().data(), cols.data(), 0.0, dst);
        if (bias) {
            const auto& b = bias->value();
            for (std::size_t f = 0; f < g.f; ++f) {
                for (std::size_t p = 0; p < P; ++p) dst[f * P + p] += b[f];
            }
        }
    }

    std::vector<Var> inputs{input, kernel};
    if (bias) inputs.push_back(*bias);
    return input.tape->record(
        "conv2d", Tensor({g.n, g.f, g.oh, g.ow}, std::move(out)), std::move(inputs),
        [g, x, k](std::span<const double> grad, std::span<double* const> sinks) {
            const auto K = g.patch();
            const auto P = g.positions();
            const auto in_plane = g.c * g.h * g.w;
            const auto out_plane = g.f * P;
            std::vector<double> cols(K * P);
            std::vector<double> dcols(sinks[0] ? K * P : 0);
            for (std::size_t n = 0; n < g.n; ++n) {
                const double* gout = grad.data() + n * out_plane;
                if (sinks[1]) {
                    im2col(g, x.data().data() + n * in_plane, cols.data());
                    gemm(false, true, g.f, K, P, gout, cols.data(), 1.0, sinks[1]);
                }
                if (sinks[0]) {
                    gemm(true, false, K, P, g.f, k.data().data(), gout, 0.0, dcols.data());
                    col2im_add(g, dcols.data(), sinks[0] + n * in_plane);
                }
                if (sinks.size() > 2 && sinks[2]) {
                    for (std::size_t f = 0; f < g.f; ++f) {
                        double s = 0.0;
                        for (std::size_t p = 0; p < P; ++p) s += gout[f * P + p];
                        sinks[2][f] += s;
                    }
                }
            }
        });
}

Var dense(Var x, Var weight, std::optional<Var> bias) {
    require_same_tape(x, weight, "dense");
    require_rank(x, 2, "dense", "x");
    require_rank(weight, 2, "dense", "weight");
    const auto& a = x.value();
    const auto& w = weight.value();
    const auto N = a.dim(0), D = a.dim(1), K = w.dim(1);
    if (w.dim(0) != D) {
        throw ShapeError("dense: x " + to_string(a.shape()) + " and weight " + to_string(w.shape()) +
                         " have mismatched inner dimensions");
    }
    if (bias) {
        require_same_tape(x, *bias, "dense");
        if (bias->value().shape() != Shape{K}) {
            throw ShapeError("dense: bias " + to_string(bias->shape()) + " does not match weight " +
                             to_string(w.shape()));
        }
    }

    std::vector<double> out(N * K);
    gemm(false, false, N, K, D, a.data().data(), w.data().data(), 0.0, out.data());
    if (bias) {
        const auto& b = bias->value();
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < K; ++j) out[i * K + j] += b[j];
        }
    }

    std::vector<Var> inputs{x, weight};
    if (bias) inputs.push_back(*bias);
    return x.tape->record("dense", Tensor({N, K}, std::move(out)), std::move(inputs),
                          [a, w, N, D, K](std::span<const double> g, std::span<double* const> sinks) {
                              if (sinks[0]) gemm(false, true, N, D, K, g.data(), w.data().data(), 1.0, sinks[0]);
                              if (sinks[1]) gemm(true, false, D, K, N, a.data().data(), g.data(), 1.0, sinks[1]);
                              if (sinks.size() > 2 && sinks[2]) {
                                  for (std::size_t i = 0; i < N; ++i) {
                                      for (std::size_t j = 0; j < K; ++j) sinks[2][j] += g[i * K + j];
                                  }
                              }
                          });
}

Var sigmoid(Var x) {
    return unary(x, "sigmoid", [](double v) {
        const double s = kernels::sigmoid(v);
        return std::pair{s, s * (1.0 - s)};
    });
}

Var relu(Var x) {
    return unary(x, "relu", [](double v) { return v > 0 ? std::pair{v, 1.0} : std::pair{0.0, 0.0}; });
}

Var absolute(Var x) {
    // Subgradient 0 at 0.
    return unary(x, "abs", [](double v) {
        const double s = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
        return std::pair{std::abs(v), s};
    });
}

Var global_avg_pool(Var x) {
    require_rank(x, 4, "global_avg_pool", "input");
    const auto& in = x.value();
    const auto N = in.dim(0), C = in.dim(1), HW = in.dim(2) * in.dim(3);
    std::vector<double> out(N * C);
    for (std::size_t i = 0; i < N * C; ++i) {
        double s = 0.0;
        for (std::size_t p = 0; p < HW; ++p) s += in[i * HW + p];
        out[i] = s / static_cast<double>(HW);
    }
    return x.tape->record("global_avg_pool", Tensor({N, C}, std::move(out)), {x},
                          [HW](std::span<const double> g, std::span<double* const> sinks) {
                              if (!sinks[0]) return;
                              const double inv = 1.0 / static_cast<double>(HW);
                              for (std::size_t i = 0; i < g.size(); ++i) {
                                  for (std::size_t p = 0; p < HW; ++p) sinks[0][i * HW + p] += g[i] * inv;
                              }
                          });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
    require_rank(logits, 2, "softmax_cross_entropy", "logits");
    const auto& z = logits.value();
    const auto N = z.dim(0), K = z.dim(1);
    if (labels.size() != N) {
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                         to_string(z.shape()));
    }
    std::vector<int> label_copy(labels.begin(), labels.end());
    std::vector<double> probs(N * K);
    double loss = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= K) {
            throw ConfigError("softmax_cross_entropy: label " + std::to_string(y) + " at row " + std::to_string(i) +
                              " outside [0," + std::to_string(K) + ")");
        }
        const double* row = z.data().data() + i * K;
        const double m = *std::max_element(row, row + K);
        double s = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            probs[i * K + j] = std::exp(row[j] - m);
            s += probs[i * K + j];
        }
        for (std::size_t j = 0; j < K; ++j) probs[i * K + j] /= s;
        loss += std::log(s) + m - row[y];
    }
    loss /= static_cast<double>(N);

    return logits.tape->record(
        "softmax_cross_entropy", Tensor::scalar(loss), {logits},
        [probs = std::move(probs), label_copy = std::move(label_copy), N, K](std::span<const double> g,
                                                                            std::span<double* const> sinks) {
            if (!sinks[0]) return;
            const double scale = g[0] / static_cast<double>(N);
            for (std::size_t i = 0; i < N; ++i) {
                for (std::size_t j = 0; j < K; ++j) {
                    const double onehot = static_cast<std::size_t>(label_copy[i]) == j ? 1.0 : 0.0;
                    sinks[0][i * K + j] += scale * (probs[i * K + j] - onehot);
                }
            }
        });
}

Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().data()) s += v;
    return x.tape->record("sum", Tensor::scalar(s), {x},
                          [n = x.value().size()](std::span<const double> g, std::span<double* const> sinks) {
                              if (!sinks[0]) return;
                              for (std::size_t i = 0; i < n; ++i) sinks[0][i] += g[0];
                          });
}

Var weighted_sum(Var x, const Tensor& weights) {
    if (weights.shape() != x.shape()) {
        throw ShapeError("weighted_sum: weights " + to_string(weights.shape()) + " vs input " +
                         to_string(x.shape()));
    }
    double s = 0.0;
    const auto& v = x.value();
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * weights[i];
    return x.tape->record("weighted_sum", Tensor::scalar(s), {x},
                          [weights](std::span<const double> g, std::span<double* const> sinks) {
                              if (!sinks[0]) return;
                              for (std::size_t i = 0; i < weights.size(); ++i) sinks[0][i] += g[0] * weights[i];
                          });
}

Var add(Var a, Var b) {
    require_same_tape(a, b, "add");
    if (a.shape() != b.shape()) {
        throw ShapeError("add: shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) + " differ");
    }
    const auto& x = a.value();
    const auto& y = b.value();
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    return a.tape->record("add", Tensor(x.shape(), std::move(out)), {a, b},
                          [](std::span<const double> g, std::span<double* const> sinks) {
                              for (auto* s : sinks) {
                                  if (!s) continue;
                                  for (std::size_t i = 0; i < g.size(); ++i) s[i] += g[i];
                              }
                          });
}

Var mul(Var a, Var b) {
    require_same_tape(a, b, "mul");
    if (a.shape() != b.shape()) {
        throw ShapeError("mul: shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) + " differ");
    }
    const auto& x = a.value();
    const auto& y = b.value();
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    return a.tape->record("mul", Tensor(x.shape(), std::move(out)), {a, b},
                          [x, y](std::span<const double> g, std::span<double* const> sinks) {
                              if (sinks[0]) {
                                  for (std::size_t i = 0; i < g.size(); ++i) sinks[0][i] += g[i] * y[i];
                              }
                              if (sinks[1]) {
                                  for (std::size_t i = 0; i < g.size(); ++i) sinks[1][i] += g[i] * x[i];
                              }
                          });
}

Var scale(Var x, double factor) {
    const auto& in = x.value();
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * factor;
    return x.tape->record("scale", Tensor(in.shape(), std::move(out)), {x},
                          [factor](std::span<const double> g, std::span<double* const> sinks) {
                              if (!sinks[0]) return;
                              for (std::size_t i = 0; i < g.size(); ++i) sinks[0][i] += g[i] * factor;
                          });
}

namespace {

// Multiplies x [N,C,H,W] by a broadcast factor; index_of maps a flat index of
// x to the factor index.
template <class IndexOf>
Var broadcast_mul(std::string_view op, Var x, Var w, IndexOf index_of) {
    const auto& a = x.value();
    const auto& b = w.value();
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[index_of(i)];
    return x.tape->record(op, Tensor(a.shape(), std::move(out)), {x, w},
                          [a, b, index_of](std::span<const double> g, std::span<double* const> sinks) {
                              for (std::size_t i = 0; i < g.size(); ++i) {
                                  const auto j = index_of(i);
                                  if (sinks[0]) sinks[0][i] += g[i] * b[j];
                                  if (sinks[1]) sinks[1][j] += g[i] * a[i];
                              }
                          });
}

} // namespace

Var scale_channels(Var x, Var w) {
    require_same_tape(x, w, "scale_channels");
    require_rank(x, 4, "scale_channels", "input");
    const auto C = x.value().dim(1);
    const auto HW = x.value().dim(2) * x.value().dim(3);
    if (w.shape() != Shape{C}) {
        throw ShapeError("scale_channels: weights " + to_string(w.shape()) + " do not match input " +
                         to_string(x.shape()));
    }
    return broadcast_mul("scale_channels", x, w, [C, HW](std::size_t i) { return (i / HW) % C; });
}

Var scale_positions(Var x, Var w) {
    require_same_tape(x, w, "scale_positions");
    require_rank(x, 4, "scale_positions", "input");
    const auto HW = x.value().dim(2) * x.value().dim(3);
    if (w.shape() != Shape{HW}) {
        throw ShapeError("scale_positions: weights " + to_string(w.shape()) + " do not match input " +
                         to_string(x.shape()));
    }
    return broadcast_mul("scale_positions", x, w, [HW](std::size_t i) { return i % HW; });
}

Var gate_channels(Var x, Var g) {
    require_same_tape(x, g, "gate_channels");
    require_rank(x, 4, "gate_channels", "input");
    const auto N = x.value().dim(0), C = x.value().dim(1);
    const auto HW = x.value().dim(2) * x.value().dim(3);
    if (g.shape() != Shape{N, C}) {
        throw ShapeError("gate_channels: gate " + to_string(g.shape()) + " does not match input " +
                         to_string(x.shape()));
    }
    return broadcast_mul("gate_channels", x, g, [HW](std::size_t i) { return i / HW; });
}

} // namespace nam
