#include "nam/sparsity.hpp"

#include <cmath>

#include "json.hpp"
#include "nam/error.hpp"
#include "nam/network.hpp"

namespace nam {

ScaleStats scale_stats(const Tensor& scales, double tau) {
    if (!(tau > 0)) throw ConfigError("tau must be positive");
    ScaleStats s;
    s.count = scales.size();
    std::size_t below = 0;
    for (double v : scales.data()) {
        s.sum_abs += std::abs(v);
        if (std::abs(v) < tau) ++below;
    }
    s.fraction_below = static_cast<double>(below) / static_cast<double>(s.count);
    if (s.sum_abs > 0) {
        for (double v : scales.data()) {
            const double w = std::abs(v) / s.sum_abs;
            if (w > 0) s.entropy -= w * std::log(w);
        }
    }
    return s;
}

SparsityReport sparsity_report(Network& net, double tau) {
    SparsityReport r;
    r.tau = tau;
    std::size_t below = 0, total = 0;
    for (const auto& group : net.nam_scales()) {
        auto s = scale_stats(group.parameter->value, tau);
        s.name = group.parameter->name;
        s.spatial = group.kind == ScaleGroup::Kind::spatial;
        (s.spatial ? r.sum_abs_lambda : r.sum_abs_gamma) += s.sum_abs;
        for (double v : group.parameter->value.data()) below += std::abs(v) < tau ? 1 : 0;
        total += s.count;
        r.total_entropy += s.entropy;
        r.modules.push_back(std::move(s));
    }
    r.fraction_below = total ? static_cast<double>(below) / static_cast<double>(total) : 0.0;
    return r;
}

std::string to_json(const SparsityReport& report) {
    nlohmann::ordered_json j;
    j["tau"] = report.tau;
    auto modules = nlohmann::ordered_json::array();
    for (const auto& m : report.modules) {
        modules.push_back({{"name", m.name},
                           {"kind", m.spatial ? "spatial" : "channel"},
                           {"count", m.count},
                           {"sum_abs", m.sum_abs},
                           {"fraction_below", m.fraction_below},
                           {"entropy", m.entropy}});
    }
    j["modules"] = std::move(modules);
    j["sum_abs_gamma"] = report.sum_abs_gamma;
    j["sum_abs_lambda"] = report.sum_abs_lambda;
    j["fraction_below"] = report.fraction_below;
    j["total_entropy"] = report.total_entropy;
    return j.dump(2) + "\n";
}

} // namespace nam
