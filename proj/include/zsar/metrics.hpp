#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "zsar/dataset.hpp"

namespace zsar {

using Json = nlohmann::ordered_json;

/// Mean over classes of per-class recall. Classes with no rows in `truth`
/// are left out of the mean.
double mean_class_accuracy(std::span<const ClassId> predicted, std::span<const ClassId> truth,
                           std::span<const ClassId> classes);

/// Fraction of rows predicted correctly.
double instance_accuracy(std::span<const ClassId> predicted, std::span<const ClassId> truth);

/// 2su / (s + u), 0 when both are 0.
double harmonic_mean_gzsl(double seen_acc, double unseen_acc);

struct GzslAccuracy {
    double seen = 0.0;
    double unseen = 0.0;
    double harmonic = 0.0;
};

/// Scores a pooled seen+unseen test set. A row counts toward the seen (or
/// unseen) accuracy according to the role of its true class.
GzslAccuracy gzsl_accuracy(std::span<const ClassId> predicted, std::span<const ClassId> truth,
                           std::span<const ClassId> seen_classes, std::span<const ClassId> unseen_classes);

struct SplitResult {
    int split_id = 0;
    std::optional<double> seen_acc;
    double unseen_acc = 0.0;
    std::optional<double> harmonic_mean;
    std::optional<int> em_iterations;
    // Secondary metrics in insertion order (per-instance accuracy, few-shot columns).
    std::vector<std::pair<std::string, double>> extra;

    /// Every numeric metric, in serialization order.
    std::vector<std::pair<std::string, double>> metrics() const;
};

struct MetricSummary {
    std::string name;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single split
};

struct ExperimentReport {
    std::string regime;
    std::uint64_t seed = 0;
    Json config_echo = Json::object();
    std::vector<SplitResult> per_split;
    std::vector<MetricSummary> aggregate;
};

/// Mean and sample std (n - 1) of every metric across splits. All splits must
/// report the same metric names.
ExperimentReport aggregate_reports(std::vector<SplitResult> per_split);

Json to_json(const ExperimentReport& report);

/// Long-format rows: split_id,metric,value.
std::string per_split_csv(const ExperimentReport& report);

}  // namespace zsar
