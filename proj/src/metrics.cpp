#include "zsar/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "zsar/errors.hpp"

namespace zsar {

double mean_class_accuracy(std::span<const ClassId> predicted, std::span<const ClassId> truth,
                           std::span<const ClassId> classes) {
    if (classes.empty()) throw ConfigError("mean_class_accuracy: empty class list");
    if (predicted.size() != truth.size()) throw DimensionError("mean_class_accuracy: length mismatch");
    if (truth.empty()) throw DataValidationError("mean_class_accuracy: no examples");

    std::map<ClassId, std::size_t> slot;
    for (std::size_t i = 0; i < classes.size(); ++i) slot.emplace(classes[i], i);
    std::vector<std::size_t> total(classes.size(), 0);
    std::vector<std::size_t> correct(classes.size(), 0);
    for (std::size_t n = 0; n < truth.size(); ++n) {
        const auto it = slot.find(truth[n]);
        if (it == slot.end()) {
            throw DataValidationError("mean_class_accuracy: truth label " + std::to_string(truth[n]) +
                                      " is not in the class list");
        }
        ++total[it->second];
        if (predicted[n] == truth[n]) ++correct[it->second];
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (total[i] == 0) continue;
        sum += static_cast<double>(correct[i]) / static_cast<double>(total[i]);
        ++present;
    }
    return sum / static_cast<double>(present);
}

double instance_accuracy(std::span<const ClassId> predicted, std::span<const ClassId> truth) {
    if (predicted.size() != truth.size()) throw DimensionError("instance_accuracy: length mismatch");
    if (truth.empty()) throw DataValidationError("instance_accuracy: no examples");
    std::size_t correct = 0;
    for (std::size_t n = 0; n < truth.size(); ++n) correct += predicted[n] == truth[n];
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double harmonic_mean_gzsl(double seen_acc, double unseen_acc) {
    const double sum = seen_acc + unseen_acc;
    return sum == 0.0 ? 0.0 : 2.0 * seen_acc * unseen_acc / sum;
}

GzslAccuracy gzsl_accuracy(std::span<const ClassId> predicted, std::span<const ClassId> truth,
                           std::span<const ClassId> seen_classes, std::span<const ClassId> unseen_classes) {
    if (predicted.size() != truth.size()) throw DimensionError("gzsl_accuracy: length mismatch");
    const std::set<ClassId> seen(seen_classes.begin(), seen_classes.end());
    std::vector<ClassId> pred_s, truth_s, pred_u, truth_u;
    for (std::size_t n = 0; n < truth.size(); ++n) {
        if (seen.count(truth[n]) != 0) {
            pred_s.push_back(predicted[n]);
            truth_s.push_back(truth[n]);
        } else {
            pred_u.push_back(predicted[n]);
            truth_u.push_back(truth[n]);
        }
    }
    GzslAccuracy acc;
    acc.seen = mean_class_accuracy(pred_s, truth_s, seen_classes);
    acc.unseen = mean_class_accuracy(pred_u, truth_u, unseen_classes);
    acc.harmonic = harmonic_mean_gzsl(acc.seen, acc.unseen);
    return acc;
}

std::vector<std::pair<std::string, double>> SplitResult::metrics() const {
    std::vector<std::pair<std::string, double>> out;
    if (seen_acc) out.emplace_back("seen_acc", *seen_acc);
    out.emplace_back("unseen_acc", unseen_acc);
    if (harmonic_mean) out.emplace_back("harmonic_mean", *harmonic_mean);
    if (em_iterations) out.emplace_back("em_iterations", static_cast<double>(*em_iterations));
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

ExperimentReport aggregate_reports(std::vector<SplitResult> per_split) {
    if (per_split.empty()) throw ConfigError("aggregate_reports: no split results");
    for (const auto& split : per_split) {
        if (split.seen_acc.has_value() != split.harmonic_mean.has_value()) {
            throw DataValidationError("harmonic_mean must be present exactly when seen_acc is");
        }
    }

    const auto reference = per_split.front().metrics();
    std::vector<double> sums(reference.size(), 0.0);
    for (const auto& split : per_split) {
        const auto metrics = split.metrics();
        if (metrics.size() != reference.size()) {
            throw DataValidationError("split " + std::to_string(split.split_id) + " reports a different metric set");
        }
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            if (metrics[m].first != reference[m].first) {
                throw DataValidationError("split " + std::to_string(split.split_id) + " reports '" +
                                          metrics[m].first + "' where '" + reference[m].first + "' was expected");
            }
            sums[m] += metrics[m].second;
        }
    }

    const double n = static_cast<double>(per_split.size());
    ExperimentReport report;
    for (std::size_t m = 0; m < reference.size(); ++m) {
        const double mean = sums[m] / n;
        double sq = 0.0;
        for (const auto& split : per_split) {
            const double dev = split.metrics()[m].second - mean;
            sq += dev * dev;
        }
        report.aggregate.push_back({reference[m].first, mean, per_split.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0});
    }
    report.per_split = std::move(per_split);
    return report;
}

Json to_json(const ExperimentReport& report) {
    Json out;
    out["regime"] = report.regime;
    out["seed"] = report.seed;
    out["config"] = report.config_echo;
    Json splits = Json::array();
    for (const auto& split : report.per_split) {
        Json row;
        row["split_id"] = split.split_id;
        for (const auto& [name, value] : split.metrics()) {
            if (name == "em_iterations") {
                row[name] = *split.em_iterations;
            } else {
                row[name] = value;
            }
        }
        splits.push_back(std::move(row));
    }
    out["per_split"] = std::move(splits);
    Json aggregate = Json::object();
    for (const auto& summary : report.aggregate) {
        aggregate[summary.name] = Json{{"mean", summary.mean}, {"std", summary.std}};
    }
    out["aggregate"] = std::move(aggregate);
    return out;
}

std::string per_split_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "split_id,metric,value\n" << std::setprecision(17);
    for (const auto& split : report.per_split) {
        for (const auto& [name, value] : split.metrics()) {
            out << split.split_id << ',' << name << ',' << value << '\n';
        }
    }
    return out.str();
}

}  // namespace zsar
