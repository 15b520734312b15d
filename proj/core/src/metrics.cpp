#include "nam/metrics.hpp"

#include <charconv>
#include <sstream>

#include "json.hpp"
#include "nam/error.hpp"

namespace nam {
namespace {

constexpr std::string_view csv_columns =
    "epoch,train_loss,penalty,top1_error,top5_error,sum_abs_gamma,sum_abs_lambda,sparsity_fraction";

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw DataError("metrics CSV line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("format_double failed");
    return std::string(buf, ptr);
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows, double tau) {
    std::ostringstream os;
    os << "# tau=" << format_double(tau) << '\n' << csv_columns << '\n';
    for (const auto& r : rows) {
        os << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.penalty) << ','
           << format_double(r.top1_error) << ',' << (r.top5_error ? format_double(*r.top5_error) : "") << ','
           << format_double(r.sum_abs_gamma) << ',' << format_double(r.sum_abs_lambda) << ','
           << format_double(r.sparsity_fraction) << '\n';
    }
    return os.str();
}

std::vector<MetricsRow> metrics_from_csv(std::string_view text) {
    std::vector<MetricsRow> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != csv_columns) throw DataError("metrics CSV: unexpected header '" + std::string(line) + "'");
            header_seen = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 8) throw DataError("metrics CSV line " + std::to_string(line_no) + ": expected 8 fields");
        MetricsRow r;
        r.epoch = static_cast<int>(parse_double(f[0], line_no));
        r.train_loss = parse_double(f[1], line_no);
        r.penalty = parse_double(f[2], line_no);
        r.top1_error = parse_double(f[3], line_no);
        if (!f[4].empty()) r.top5_error = parse_double(f[4], line_no);
        r.sum_abs_gamma = parse_double(f[5], line_no);
        r.sum_abs_lambda = parse_double(f[6], line_no);
        r.sparsity_fraction = parse_double(f[7], line_no);
        rows.push_back(r);
    }
    return rows;
}

std::string metrics_to_json(const std::vector<MetricsRow>& rows) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["epoch"] = r.epoch;
        j["train_loss"] = r.train_loss;
        j["penalty"] = r.penalty;
        j["top1_error"] = r.top1_error;
        j["top5_error"] = r.top5_error ? nlohmann::ordered_json(*r.top5_error) : nlohmann::ordered_json(nullptr);
        j["sum_abs_gamma"] = r.sum_abs_gamma;
        j["sum_abs_lambda"] = r.sum_abs_lambda;
        j["sparsity_fraction"] = r.sparsity_fraction;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<MetricsRow> metrics_from_json(std::string_view text) {
    std::vector<MetricsRow> rows;
    try {
        const auto arr = nlohmann::json::parse(text);
        for (const auto& j : arr) {
            MetricsRow r;
            r.epoch = j.at("epoch").get<int>();
            r.train_loss = j.at("train_loss").get<double>();
            r.penalty = j.at("penalty").get<double>();
            r.top1_error = j.at("top1_error").get<double>();
            if (!j.at("top5_error").is_null()) r.top5_error = j.at("top5_error").get<double>();
            r.sum_abs_gamma = j.at("sum_abs_gamma").get<double>();
            r.sum_abs_lambda = j.at("sum_abs_lambda").get<double>();
            r.sparsity_fraction = j.at("sparsity_fraction").get<double>();
            rows.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("metrics JSON: ") + e.what());
    }
    return rows;
}

} // namespace nam
