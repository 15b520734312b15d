#include "nam/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nam/error.hpp"

namespace nam {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Line {
    std::size_t number;
    std::string key;
    std::string value;
};

std::vector<Line> parse_lines(std::string_view text) {
    std::vector<Line> out;
    std::size_t number = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++number;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
        }
        out.push_back({number, std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))});
    }
    return out;
}

template <class T>
T parse_number(const Line& l) {
    T v{};
    const auto* end = l.value.data() + l.value.size();
    const auto [ptr, ec] = std::from_chars(l.value.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config line " + std::to_string(l.number) + ": '" + l.value + "' is not a valid value for " +
                          l.key);
    }
    return v;
}

bool parse_bool(const Line& l) {
    if (l.value == "true" || l.value == "1") return true;
    if (l.value == "false" || l.value == "0") return false;
    throw ConfigError("config line " + std::to_string(l.number) + ": " + l.key + " expects true or false");
}

std::vector<std::size_t> parse_list(const Line& l) {
    std::vector<std::size_t> out;
    std::string_view rest = l.value;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        Line item{l.number, l.key, std::string(trim(rest.substr(0, comma)))};
        out.push_back(parse_number<std::size_t>(item));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (batch normalization needs two samples)");
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
    if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must lie in [0,1)");
    if (lr_step_epochs < 0) throw ConfigError("lr_step_epochs must be >= 0");
    if (!(lr_decay > 0)) throw ConfigError("lr_decay must be positive");
    if (!(penalty.p >= 0) || !std::isfinite(penalty.p)) throw ConfigError("penalty must be a finite value >= 0");
    if (!(tau > 0)) throw ConfigError("tau must be positive");
    if (widths.empty()) throw ConfigError("widths must list at least one block");
}

TrainConfig parse_train_config(std::string_view text, TrainConfig cfg) {
    const std::map<std::string, std::function<void(const Line&)>> setters = {
        {"seed", [&](const Line& l) { cfg.seed = parse_number<std::uint64_t>(l); }},
        {"epochs", [&](const Line& l) { cfg.epochs = parse_number<int>(l); }},
        {"batch_size", [&](const Line& l) { cfg.batch_size = parse_number<std::size_t>(l); }},
        {"learning_rate", [&](const Line& l) { cfg.learning_rate = parse_number<double>(l); }},
        {"momentum", [&](const Line& l) { cfg.momentum = parse_number<double>(l); }},
        {"lr_step_epochs", [&](const Line& l) { cfg.lr_step_epochs = parse_number<int>(l); }},
        {"lr_decay", [&](const Line& l) { cfg.lr_decay = parse_number<double>(l); }},
        {"penalty", [&](const Line& l) { cfg.penalty.p = parse_number<double>(l); }},
        {"penalty_channel", [&](const Line& l) { cfg.penalty.include_channel = parse_bool(l); }},
        {"penalty_spatial", [&](const Line& l) { cfg.penalty.include_spatial = parse_bool(l); }},
        {"penalty_backbone", [&](const Line& l) { cfg.penalty.include_backbone = parse_bool(l); }},
        {"data", [&](const Line& l) { cfg.data = l.value; }},
        {"format", [&](const Line& l) { cfg.format = parse_data_format(l.value); }},
        {"attention", [&](const Line& l) { cfg.attention = parse_attention_kind(l.value); }},
        {"widths", [&](const Line& l) { cfg.widths = parse_list(l); }},
        {"reduction", [&](const Line& l) { cfg.reduction = parse_number<std::size_t>(l); }},
        {"tau", [&](const Line& l) { cfg.tau = parse_number<double>(l); }},
        {"train_limit", [&](const Line& l) { cfg.train_limit = parse_number<std::size_t>(l); }},
        {"test_limit", [&](const Line& l) { cfg.test_limit = parse_number<std::size_t>(l); }},
        {"out", [&](const Line& l) { cfg.out = l.value; }},
    };
    for (const auto& line : parse_lines(text)) {
        const auto it = setters.find(line.key);
        if (it == setters.end()) {
            throw ConfigError("config line " + std::to_string(line.number) + ": unknown key '" + line.key + "'");
        }
        it->second(line);
    }
    cfg.validate();
    return cfg;
}

ArchConfig parse_arch_config(std::string_view text) {
    ArchConfig arch;
    for (const auto& line : parse_lines(text)) {
        if (line.key == "block") {
            std::istringstream in(line.value);
            BlockDims d;
            std::string extra;
            if (!(in >> d.base_channels >> d.expansion >> d.height >> d.width) || (in >> extra)) {
                throw ConfigError("config line " + std::to_string(line.number) + ": block expects 'C R H W'");
            }
            arch.blocks.push_back(d);
        } else if (line.key == "reduction") {
            arch.options.reduction = parse_number<std::size_t>(line);
        } else if (line.key == "kernel") {
            arch.options.kernel = parse_number<std::size_t>(line);
        } else {
            throw ConfigError("config line " + std::to_string(line.number) + ": unknown key '" + line.key + "'");
        }
    }
    if (arch.blocks.empty()) throw ConfigError("architecture config lists no blocks");
    return arch;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

TrainConfig load_train_config(const std::string& path) { return parse_train_config(read_text_file(path)); }

ArchConfig load_arch_config(const std::string& path) { return parse_arch_config(read_text_file(path)); }

} // namespace nam
