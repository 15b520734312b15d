#include "nam/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "nam/accounting.hpp"
#include "nam/checkpoint.hpp"
#include "nam/config.hpp"
#include "nam/error.hpp"
#include "nam/gradcheck_suite.hpp"
#include "nam/metrics.hpp"
#include "nam/sparsity.hpp"
#include "nam/synthetic_digits.hpp"
#include "nam/trainer.hpp"

namespace nam {
namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

DataSplits load_limited(const TrainConfig& cfg) {
    if (cfg.data.empty()) throw ConfigError("no data directory given (--data or 'data' in the config)");
    DataSplits data = load_dataset(cfg.data, cfg.format);
    if (cfg.train_limit > 0) data.train = data.train.head(cfg.train_limit);
    if (cfg.test_limit > 0) data.test = data.test.head(cfg.test_limit);
    return data;
}

struct TrainArgs {
    std::string config;
    std::optional<std::string> data, format, attention, out;
    std::optional<double> penalty;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::optional<std::size_t> train_limit, test_limit;
};

int run_train(const TrainArgs& a, std::ostream& out) {
    TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
    if (a.data) cfg.data = *a.data;
    if (a.format) cfg.format = parse_data_format(*a.format);
    if (a.attention) cfg.attention = parse_attention_kind(*a.attention);
    if (a.out) cfg.out = *a.out;
    if (a.penalty) cfg.penalty.p = *a.penalty;
    if (a.seed) cfg.seed = *a.seed;
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.train_limit) cfg.train_limit = *a.train_limit;
    if (a.test_limit) cfg.test_limit = *a.test_limit;
    cfg.validate();
    if (cfg.out.empty()) throw ConfigError("no output directory given (--out or 'out' in the config)");

    const DataSplits data = load_limited(cfg);
    Network net(model_for(cfg, data.train.channels, data.train.height, data.train.width, data.train.num_classes),
                cfg.seed);
    out << "model: " << to_string(cfg.attention) << ", " << net.parameter_count() << " parameters, "
        << data.train.size() << " train / " << data.test.size() << " test samples\n";

    TrainHooks hooks;
    hooks.on_epoch = [&out](const MetricsRow& r) {
        out << "epoch " << r.epoch << ": loss " << format_double(r.train_loss) << ", top-1 error "
            << format_double(r.top1_error) << "%, sum|gamma| " << format_double(r.sum_abs_gamma) << ", sum|lambda| "
            << format_double(r.sum_abs_lambda) << '\n';
    };
    const auto rows = train(net, cfg, data, hooks);

    const fs::path dir = cfg.out;
    fs::create_directories(dir);
    write_file(dir / "metrics.csv", metrics_to_csv(rows, cfg.tau));
    write_file(dir / "metrics.json", metrics_to_json(rows));
    write_file(dir / "sparsity.json", to_json(sparsity_report(net, cfg.tau)));
    save_network(dir / "model.namk", net);
    out << "wrote " << (dir / "metrics.csv").string() << ", metrics.json, sparsity.json, model.namk\n";
    return exit_ok;
}

int run_eval(const std::string& model, const std::string& data_dir, const std::string& format,
             std::size_t test_limit, std::ostream& out) {
    Network net = load_network(model);
    DataSplits data = load_dataset(data_dir, parse_data_format(format));
    if (test_limit > 0) data.test = data.test.head(test_limit);
    const auto r = evaluate(net, data.test);
    out << "samples " << data.test.size() << "\n";
    out << "top1_error " << format_double(r.top1_error) << "\n";
    if (r.top5_error) out << "top5_error " << format_double(*r.top5_error) << "\n";
    return exit_ok;
}

struct CountArgs {
    std::string arch;
    std::string attention;
    std::optional<std::size_t> reduction, kernel;
    bool json = false;
};

int run_count(const CountArgs& a, std::ostream& out) {
    ArchConfig arch = load_arch_config(a.arch);
    if (a.reduction) arch.options.reduction = *a.reduction;
    if (a.kernel) arch.options.kernel = *a.kernel;
    const auto report = count_report(arch.blocks, parse_count_attention(a.attention), arch.options);
    out << (a.json ? to_json(report) + "\n" : to_csv(report));
    return exit_ok;
}

struct GradcheckArgs {
    std::string op;
    std::uint64_t seed = 0;
    std::size_t seeds = 1;
    double eps = 1e-5;
    double tolerance = 1e-5;
};

int run_gradcheck_cmd(const GradcheckArgs& a, std::ostream& out) {
    std::vector<std::string> ops;
    if (a.op == "all") {
        ops = gradcheck_ops();
    } else {
        ops.push_back(a.op);
    }
    bool ok = true;
    for (const auto& op : ops) {
        for (std::uint64_t s = a.seed; s < a.seed + a.seeds; ++s) {
            const double e = run_gradcheck(op, s, a.eps);
            const bool pass = e < a.tolerance;
            ok = ok && pass;
            out << op << " seed " << s << " max_rel_error " << format_double(e) << (pass ? " ok" : " FAIL") << "\n";
        }
    }
    return ok ? exit_ok : exit_numeric;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Normalization-based attention: training, evaluation and accounting tools", "namctl"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train the desk-scale CNN and write metrics and a checkpoint");
    train_cmd->add_option("--config", train_args.config, "Key-value config file")->check(CLI::ExistingFile);
    train_cmd->add_option("--data", train_args.data, "Dataset directory");
    train_cmd->add_option("--format", train_args.format, "idx or cifar");
    train_cmd->add_option("--penalty", train_args.penalty, "L1 coefficient p on attention scales");
    train_cmd->add_option("--attention", train_args.attention, "none, nam-ch, nam-sp, nam or se");
    train_cmd->add_option("--seed", train_args.seed, "Seed for initialization and shuffling");
    train_cmd->add_option("--epochs", train_args.epochs, "Number of epochs");
    train_cmd->add_option("--out", train_args.out, "Output directory");
    train_cmd->add_option("--train-limit", train_args.train_limit, "Use only the first N training samples");
    train_cmd->add_option("--test-limit", train_args.test_limit, "Use only the first N test samples");

    std::string model, eval_data, eval_format = "idx";
    std::size_t eval_limit = 0;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset's test split");
    eval_cmd->add_option("--model", model, "Checkpoint file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--data", eval_data, "Dataset directory")->required();
    eval_cmd->add_option("--format", eval_format, "idx or cifar");
    eval_cmd->add_option("--test-limit", eval_limit, "Use only the first N test samples");

    CountArgs count_args;
    auto* count_cmd = app.add_subcommand("count", "Parameter and FLOP overhead of attention modules");
    count_cmd->add_option("--arch-config", count_args.arch, "Block dimensions file")->required()->check(
        CLI::ExistingFile);
    count_cmd->add_option("--attention", count_args.attention,
                          "cbam-channel, cbam-spatial, cbam, nam-ch, nam-sp, nam or se")
        ->required();
    count_cmd->add_option("--reduction", count_args.reduction, "MLP reduction ratio r");
    count_cmd->add_option("--kernel", count_args.kernel, "CBAM spatial kernel size");
    count_cmd->add_flag("--json", count_args.json, "Emit JSON instead of CSV");

    GradcheckArgs gc;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check of one operator");
    gc_cmd->add_option("--op", gc.op, "Operator name, or 'all'")->required();
    gc_cmd->add_option("--seed", gc.seed, "First seed");
    gc_cmd->add_option("--seeds", gc.seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);
    gc_cmd->add_option("--eps", gc.eps, "Central-difference step")->check(CLI::PositiveNumber);
    gc_cmd->add_option("--tolerance", gc.tolerance, "Largest accepted relative error");

    std::string synth_out;
    std::size_t synth_train = 10000, synth_test = 2000;
    std::uint64_t synth_seed = 1;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic MNIST-format digit dataset");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--train", synth_train, "Training images");
    synth_cmd->add_option("--test", synth_test, "Test images");
    synth_cmd->add_option("--seed", synth_seed, "Generator seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*train_cmd) return run_train(train_args, out);
        if (*eval_cmd) return run_eval(model, eval_data, eval_format, eval_limit, out);
        if (*count_cmd) return run_count(count_args, out);
        if (*gc_cmd) return run_gradcheck_cmd(gc, out);
        if (*synth_cmd) {
            write_synthetic_mnist(synth_out, synth_train, synth_test, synth_seed);
            out << "wrote " << synth_train << " train / " << synth_test << " test images to " << synth_out << "\n";
            return exit_ok;
        }
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const ShapeError& e) {
        err << "shape error: " << e.what() << "\n";
        return exit_data;
    } catch (const fs::filesystem_error& e) {
        err << "file error: " << e.what() << "\n";
        return exit_data;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}

} // namespace nam
