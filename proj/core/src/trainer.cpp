#include "nam/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nam/error.hpp"
#include "nam/loss.hpp"
#include "nam/optimizer.hpp"
#include "nam/sparsity.hpp"

namespace nam {
namespace {

void check_compatible(const Network& net, const Dataset& data, const char* split) {
    const auto& spec = net.spec();
    if (data.channels != spec.input_channels || data.height != spec.input_height || data.width != spec.input_width) {
        throw ShapeError(std::string(split) + " images are " + std::to_string(data.channels) + "x" +
                         std::to_string(data.height) + "x" + std::to_string(data.width) + " but the model expects " +
                         std::to_string(spec.input_channels) + "x" + std::to_string(spec.input_height) + "x" +
                         std::to_string(spec.input_width));
    }
    for (int y : data.labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes) {
            throw ShapeError(std::string(split) + " label " + std::to_string(y) + " outside the model's " +
                             std::to_string(spec.num_classes) + " classes");
        }
    }
}

} // namespace

std::size_t top_k_correct(const Tensor& logits, std::span<const int> labels, std::size_t k) {
    const auto N = logits.dim(0), K = logits.dim(1);
    if (labels.size() != N) throw ShapeError("top_k_correct: label count does not match logits");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        if (y >= K) throw ConfigError("top_k_correct: label out of range");
        const double* row = logits.data().data() + i * K;
        std::size_t rank = 0;
        for (std::size_t j = 0; j < K; ++j) {
            if (row[j] > row[y] || (row[j] == row[y] && j < y)) ++rank;
        }
        if (rank < k) ++correct;
    }
    return correct;
}

EvalResult evaluate(Network& net, const Dataset& data, std::size_t batch_size) {
    if (data.size() == 0) throw DataError("evaluate: empty dataset");
    check_compatible(net, data, "evaluation");
    const bool with_top5 = net.spec().num_classes >= 5;
    std::size_t top1 = 0, top5 = 0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        idx.resize(std::min(batch_size, data.size() - start));
        std::iota(idx.begin(), idx.end(), start);
        Tape tape;
        ForwardContext ctx(tape, Mode::eval);
        const auto logits = net.forward(ctx, tape.constant(data.batch(idx))).value();
        const auto labels = data.batch_labels(idx);
        top1 += top_k_correct(logits, labels, 1);
        if (with_top5) top5 += top_k_correct(logits, labels, 5);
    }
    const auto n = static_cast<double>(data.size());
    EvalResult r;
    r.top1_error = 100.0 * static_cast<double>(data.size() - top1) / n;
    if (with_top5) r.top5_error = 100.0 * static_cast<double>(data.size() - top5) / n;
    return r;
}

ModelSpec model_for(const TrainConfig& cfg, std::size_t channels, std::size_t height, std::size_t width,
                    std::size_t num_classes) {
    ModelSpec spec = desk_scale_cnn(AttentionKind::none, cfg.widths, channels, height, width, num_classes);
    return attach_attention(spec, cfg.attention, cfg.reduction);
}

std::vector<MetricsRow> train(Network& net, const TrainConfig& cfg, const DataSplits& data, const TrainHooks& hooks) {
    cfg.validate();
    if (data.train.size() == 0) throw DataError("train: empty training split");
    check_compatible(net, data.train, "training");
    if (data.test.size() > 0) check_compatible(net, data.test, "test");
    const Dataset& eval_split = data.test.size() > 0 ? data.test : data.train;

    std::vector<MetricsRow> rows;
    Sgd sgd(cfg.learning_rate, cfg.momentum);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t step = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.lr_step_epochs > 0) {
            sgd.set_learning_rate(cfg.learning_rate * std::pow(cfg.lr_decay, (epoch - 1) / cfg.lr_step_epochs));
        }
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const auto count = std::min(cfg.batch_size, order.size() - start);
            if (count < 2) break;
            const std::span<const std::size_t> idx(order.data() + start, count);

            Tape tape;
            ForwardContext ctx(tape, Mode::train);
            Var logits = net.forward(ctx, tape.constant(data.train.batch(idx)));
            const auto labels = data.train.batch_labels(idx);
            const auto scales = collect_penalty_scales(ctx, net, cfg.penalty);
            Var loss = total_loss(logits, labels, scales, cfg.penalty);
            const double value = loss.value().item();
            if (!std::isfinite(value)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step));
            }
            sgd.step(ctx, tape.backward(loss));
            if (hooks.on_step) hooks.on_step(step, value);
            loss_sum += value;
            ++batches;
            ++step;
        }

        const auto eval = evaluate(net, eval_split);
        const auto sparsity = sparsity_report(net, cfg.tau);
        double covered = 0.0;
        {
            Tape tape;
            ForwardContext ctx(tape, Mode::eval);
            covered = penalty_sum(collect_penalty_scales(ctx, net, cfg.penalty));
        }

        MetricsRow row;
        row.epoch = epoch;
        row.train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
        row.penalty = cfg.penalty.p * covered;
        row.top1_error = eval.top1_error;
        row.top5_error = eval.top5_error;
        row.sum_abs_gamma = sparsity.sum_abs_gamma;
        row.sum_abs_lambda = sparsity.sum_abs_lambda;
        row.sparsity_fraction = sparsity.fraction_below;
        rows.push_back(row);
        if (hooks.on_epoch) hooks.on_epoch(row);
    }
    return rows;
}

} // namespace nam
