#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nam {

/// One epoch of training. top5_error is absent when the task has fewer than
/// five classes.
struct MetricsRow {
    int epoch = 0;
    double train_loss = 0.0;
    double penalty = 0.0;
    double top1_error = 0.0;
    std::optional<double> top5_error;
    double sum_abs_gamma = 0.0;
    double sum_abs_lambda = 0.0;
    double sparsity_fraction = 0.0;

    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Header comment with tau, a column header row, then one line per row.
std::string metrics_to_csv(const std::vector<MetricsRow>& rows, double tau);
std::vector<MetricsRow> metrics_from_csv(std::string_view text);

/// JSON array of row objects.
std::string metrics_to_json(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> metrics_from_json(std::string_view text);

} // namespace nam
