#include "zsar/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "zsar/errors.hpp"
#include "zsar/rng.hpp"

namespace zsar {

namespace {

Matrix gather_rows(const Matrix& m, std::span<const Eigen::Index> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

Matrix gather_attrs(const Dataset& data, std::span<const ClassId> classes) {
    Matrix out(static_cast<Eigen::Index>(classes.size()), data.attributes.cols());
    for (std::size_t i = 0; i < classes.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data.attributes.row(classes[i]);
    return out;
}

std::vector<std::vector<Eigen::Index>> rows_by_class(const Dataset& data, std::span<const ClassId> classes) {
    std::map<ClassId, std::size_t> slot;
    for (std::size_t i = 0; i < classes.size(); ++i) slot.emplace(classes[i], i);
    std::vector<std::vector<Eigen::Index>> rows(classes.size());
    for (std::size_t n = 0; n < data.labels.size(); ++n) {
        const auto it = slot.find(data.labels[n]);
        if (it != slot.end()) rows[it->second].push_back(static_cast<Eigen::Index>(n));
    }
    return rows;
}

void check_split(const Dataset& data, const Split& split) {
    split.validate(data.n_classes());
    if (split.seen_classes.size() < 2) {
        throw ConfigError("split " + std::to_string(split.split_id) + " needs at least two seen classes");
    }
}

void require_rows(const std::vector<std::vector<Eigen::Index>>& rows, std::span<const ClassId> classes,
                  std::size_t minimum, const std::string& what) {
    std::string offending;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (rows[i].size() < minimum) {
            if (!offending.empty()) offending += ", ";
            offending += std::to_string(classes[i]) + " (" + std::to_string(rows[i].size()) + ")";
        }
    }
    if (!offending.empty()) {
        throw DataValidationError(what + " need at least " + std::to_string(minimum) +
                                  " examples; offending classes: " + offending);
    }
}

std::vector<Eigen::Index> flatten(const std::vector<std::vector<Eigen::Index>>& rows) {
    std::vector<Eigen::Index> out;
    for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::vector<ClassId> labels_of(const Dataset& data, std::span<const Eigen::Index> rows) {
    std::vector<ClassId> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(data.labels[static_cast<std::size_t>(r)]);
    return out;
}

// Scores unseen-only predictions; labels are read here and nowhere else.
SplitResult score_unseen(const Dataset& data, const Split& split, std::span<const Eigen::Index> test_rows,
                         std::span<const ClassId> predictions) {
    const auto truth = labels_of(data, test_rows);
    SplitResult result;
    result.split_id = split.split_id;
    result.unseen_acc = mean_class_accuracy(predictions, truth, split.unseen_classes);
    result.extra.emplace_back("unseen_instance_acc", instance_accuracy(predictions, truth));
    return result;
}

// Per seen class: shuffled rows with the first 20% (at least one) held out for testing.
struct SeenPartition {
    std::vector<std::vector<Eigen::Index>> train;
    std::vector<Eigen::Index> test;
};

SeenPartition partition_seen(const Dataset& data, const Split& split, std::uint64_t seed) {
    auto rows = rows_by_class(data, split.seen_classes);
    require_rows(rows, split.seen_classes, 5, "GZSL seen classes");
    SeenPartition part;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(split.seen_classes[i])));
        auto shuffled = rows[i];
        rng.shuffle(shuffled);
        const std::size_t n_test = std::max<std::size_t>(1, shuffled.size() / 5);
        std::vector<Eigen::Index> test(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_test));
        std::vector<Eigen::Index> train(shuffled.begin() + static_cast<std::ptrdiff_t>(n_test), shuffled.end());
        std::sort(test.begin(), test.end());
        std::sort(train.begin(), train.end());
        part.test.insert(part.test.end(), test.begin(), test.end());
        part.train.push_back(std::move(train));
    }
    return part;
}

GzslOutcome score_gzsl(const Dataset& data, const Split& split, const GzslClassifier& clf,
                       std::vector<Eigen::Index> seen_test, const std::vector<Eigen::Index>& unseen_rows) {
    GzslOutcome out;
    out.test_rows = std::move(seen_test);
    out.test_rows.insert(out.test_rows.end(), unseen_rows.begin(), unseen_rows.end());
    out.predictions = clf.predict(gather_rows(data.features, out.test_rows));
    const auto truth = labels_of(data, out.test_rows);
    const GzslAccuracy acc = gzsl_accuracy(out.predictions, truth, split.seen_classes, split.unseen_classes);
    out.result.split_id = split.split_id;
    out.result.seen_acc = acc.seen;
    out.result.unseen_acc = acc.unseen;
    out.result.harmonic_mean = acc.harmonic;
    out.result.extra.emplace_back("instance_acc", instance_accuracy(out.predictions, truth));
    return out;
}

// Classifier over seen-train rows plus optional pseudo-examples (already in position space).
GzslClassifier train_gzsl_classifier(const Dataset& data, const Split& split,
                                     const std::vector<std::vector<Eigen::Index>>& seen_train,
                                     const std::vector<Matrix>& pseudo, double lambda, bool balanced) {
    Eigen::Index total = 0;
    for (const auto& r : seen_train) total += static_cast<Eigen::Index>(r.size());
    for (const auto& p : pseudo) total += p.rows();

    Matrix features(total, data.features.cols());
    std::vector<ClassId> positions;
    positions.reserve(static_cast<std::size_t>(total));
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < seen_train.size(); ++i) {
        for (auto r : seen_train[i]) {
            features.row(row++) = data.features.row(r);
            positions.push_back(static_cast<ClassId>(i));
        }
    }
    for (std::size_t u = 0; u < pseudo.size(); ++u) {
        features.middleRows(row, pseudo[u].rows()) = pseudo[u];
        row += pseudo[u].rows();
        positions.insert(positions.end(), static_cast<std::size_t>(pseudo[u].rows()),
                         static_cast<ClassId>(seen_train.size() + u));
    }
    const int n_classes = static_cast<int>(seen_train.size() + pseudo.size());
    GzslClassifier clf = train_linear_ovr(features, positions, n_classes, lambda, balanced);
    clf.class_order = split.seen_classes;
    if (!pseudo.empty()) {
        clf.class_order.insert(clf.class_order.end(), split.unseen_classes.begin(), split.unseen_classes.end());
    }
    return clf;
}

}  // namespace

KernelSpec MapConfig::resolve(const Matrix& seen_attrs) const {
    if (kernel == KernelKind::Linear) return KernelSpec::linear();
    return KernelSpec::rbf(bandwidth ? *bandwidth : median_bandwidth(seen_attrs));
}

std::vector<ClassId> zsl_classify(const Matrix& test_features, std::span<const ClassGaussian> gaussians,
                                  std::span<const ClassId> class_ids) {
    if (gaussians.empty()) throw ConfigError("zsl_classify: no classes");
    if (gaussians.size() != class_ids.size()) throw DimensionError("zsl_classify: gaussians and ids differ in length");
    Matrix logp(test_features.rows(), static_cast<Eigen::Index>(gaussians.size()));
    for (std::size_t c = 0; c < gaussians.size(); ++c) {
        logp.col(static_cast<Eigen::Index>(c)) = log_density_rows(test_features, gaussians[c]);
    }
    std::vector<ClassId> labels(static_cast<std::size_t>(test_features.rows()));
    for (Eigen::Index n = 0; n < logp.rows(); ++n) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logp.cols(); ++c) {
            if (logp(n, c) > logp(n, best)) best = c;
        }
        labels[static_cast<std::size_t>(n)] = class_ids[static_cast<std::size_t>(best)];
    }
    return labels;
}

InductiveModel fit_inductive_model(const Dataset& data, const Split& split,
                                   const std::vector<std::vector<Eigen::Index>>& seen_rows, const MapConfig& map_cfg,
                                   const HyperParams& hyper) {
    require_rows(seen_rows, split.seen_classes, 1, "seen classes");
    InductiveModel model;
    for (const auto& rows : seen_rows) model.seen.push_back(fit_mle(gather_rows(data.features, rows)));
    const Matrix seen_attrs = gather_attrs(data, split.seen_classes);
    if (map_cfg.basis == MapBasis::Attributes) {
        model.map = fit_param_map_linear(model.seen, seen_attrs, hyper);
    } else {
        model.map = fit_param_map(model.seen, seen_attrs, map_cfg.resolve(seen_attrs), hyper);
    }
    model.unseen = predict_unseen(model.map, gather_attrs(data, split.unseen_classes));
    return model;
}

ZslOutcome run_inductive(const Dataset& data, const Split& split, const MapConfig& map_cfg,
                         const HyperParams& hyper) {
    check_split(data, split);
    const auto model = fit_inductive_model(data, split, rows_by_class(data, split.seen_classes), map_cfg, hyper);
    ZslOutcome out;
    out.test_rows = flatten(rows_by_class(data, split.unseen_classes));
    if (out.test_rows.empty()) throw DataValidationError("no test rows for the unseen classes");
    out.predictions = zsl_classify(gather_rows(data.features, out.test_rows), model.unseen, split.unseen_classes);
    out.unseen_gaussians = model.unseen;
    out.result = score_unseen(data, split, out.test_rows, out.predictions);
    return out;
}

ZslOutcome run_transductive(const Dataset& data, const Split& split, const MapConfig& map_cfg,
                            const HyperParams& hyper, const EmConfig& em_cfg) {
    check_split(data, split);
    em_cfg.validate();
    const auto model = fit_inductive_model(data, split, rows_by_class(data, split.seen_classes), map_cfg, hyper);
    ZslOutcome out;
    out.test_rows = flatten(rows_by_class(data, split.unseen_classes));
    const Matrix unlabeled = gather_rows(data.features, out.test_rows);
    const EmResult em = em_refine(unlabeled, model.unseen, em_cfg);
    out.predictions = zsl_classify(unlabeled, em.gaussians, split.unseen_classes);
    out.unseen_gaussians = em.gaussians;
    out.em_log_likelihoods = em.log_likelihoods;
    out.result = score_unseen(data, split, out.test_rows, out.predictions);
    out.result.em_iterations = em.iterations_run;
    return out;
}

Matrix GzslClassifier::scores(const Matrix& features) const {
    if (features.cols() + 1 != weights.cols()) {
        throw DimensionError("GzslClassifier: feature dimension mismatch");
    }
    return (features * weights.leftCols(weights.cols() - 1).transpose()).rowwise() +
           weights.col(weights.cols() - 1).transpose();
}

std::vector<ClassId> GzslClassifier::predict(const Matrix& features) const {
    const Matrix s = scores(features);
    std::vector<ClassId> out(static_cast<std::size_t>(s.rows()));
    for (Eigen::Index n = 0; n < s.rows(); ++n) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < s.cols(); ++c) {
            if (s(n, c) > s(n, best)) best = c;
        }
        out[static_cast<std::size_t>(n)] = class_order[static_cast<std::size_t>(best)];
    }
    return out;
}

GzslClassifier train_linear_ovr(const Matrix& features, std::span<const ClassId> labels, int n_classes,
                                double lambda, bool balanced) {
    if (!(lambda > 0.0)) throw ConfigError("train_linear_ovr: lambda must be positive");
    if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
        throw DimensionError("train_linear_ovr: one label per feature row required");
    }
    std::vector<int> counts(static_cast<std::size_t>(std::max(n_classes, 0)), 0);
    for (ClassId y : labels) {
        if (y < 0 || y >= n_classes) throw DataValidationError("train_linear_ovr: label out of range");
        ++counts[static_cast<std::size_t>(y)];
    }
    if (n_classes < 2) throw DataValidationError("train_linear_ovr: need at least two classes");
    for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw DataValidationError("train_linear_ovr: class " + std::to_string(c) + " has no examples");
        }
    }
    // inputs: (D + 1) x N with a trailing row of ones; targets: C x N of +-1.
    Matrix inputs(features.cols() + 1, features.rows());
    inputs.topRows(features.cols()) = features.transpose();
    inputs.bottomRows(1).setOnes();
    Matrix targets = Matrix::Constant(n_classes, features.rows(), -1.0);
    for (std::size_t n = 0; n < labels.size(); ++n) targets(labels[n], static_cast<Eigen::Index>(n)) = 1.0;
    if (balanced) {
        // Weighted least squares via sqrt(weight) column scaling.
        const double total = static_cast<double>(labels.size());
        for (std::size_t n = 0; n < labels.size(); ++n) {
            const double w = total / (n_classes * static_cast<double>(counts[static_cast<std::size_t>(labels[n])]));
            const auto col = static_cast<Eigen::Index>(n);
            inputs.col(col) *= std::sqrt(w);
            targets.col(col) *= std::sqrt(w);
        }
    }

    GzslClassifier clf;
    clf.weights = ridge_solve(targets, inputs, lambda);
    clf.class_order.resize(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) clf.class_order[static_cast<std::size_t>(c)] = c;
    return clf;
}

GzslOutcome run_gzsl(const Dataset& data, const Split& split, const MapConfig& map_cfg, const HyperParams& hyper,
                     const GzslConfig& cfg) {
    if (cfg.synth_count < 1) throw ConfigError("synth_count must be >= 1, got " + std::to_string(cfg.synth_count));
    check_split(data, split);
    const SeenPartition part = partition_seen(data, split, cfg.seed);
    const auto model = fit_inductive_model(data, split, part.train, map_cfg, hyper);
    const auto unseen_rows = flatten(rows_by_class(data, split.unseen_classes));
    if (unseen_rows.empty()) throw DataValidationError("no test rows for the unseen classes");

    std::vector<ClassGaussian> unseen = model.unseen;
    std::optional<int> em_iterations;
    if (cfg.mode == GzslMode::Transductive) {
        const EmResult em = em_refine(gather_rows(data.features, unseen_rows), unseen, cfg.em);
        unseen = em.gaussians;
        em_iterations = em.iterations_run;
    }
    std::vector<Matrix> pseudo;
    for (std::size_t u = 0; u < unseen.size(); ++u) {
        const auto stream = 0x5EED0000ULL + static_cast<std::uint64_t>(split.unseen_classes[u]);
        pseudo.push_back(sample(unseen[u], static_cast<std::size_t>(cfg.synth_count), derive_seed(cfg.seed, stream)));
    }
    const GzslClassifier clf = train_gzsl_classifier(data, split, part.train, pseudo, cfg.classifier_lambda, cfg.balanced_classes);
    GzslOutcome out = score_gzsl(data, split, clf, part.test, unseen_rows);
    out.result.em_iterations = em_iterations;
    return out;
}

GzslOutcome run_gzsl_seen_only(const Dataset& data, const Split& split, double classifier_lambda,
                               std::uint64_t seed, bool balanced_classes) {
    check_split(data, split);
    const SeenPartition part = partition_seen(data, split, seed);
    const auto unseen_rows = flatten(rows_by_class(data, split.unseen_classes));
    if (unseen_rows.empty()) throw DataValidationError("no test rows for the unseen classes");
    const GzslClassifier clf = train_gzsl_classifier(data, split, part.train, {}, classifier_lambda, balanced_classes);
    return score_gzsl(data, split, clf, part.test, unseen_rows);
}

ZslOutcome run_few_shot(const Dataset& data, const Split& split, const MapConfig& map_cfg, const HyperParams& hyper,
                        int shots, std::uint64_t seed, int reserve) {
    check_split(data, split);
    if (shots < 1) throw ConfigError("shots_per_class must be >= 1");
    const auto withheld = static_cast<std::size_t>(std::max(shots, reserve));
    auto unseen_rows = rows_by_class(data, split.unseen_classes);
    require_rows(unseen_rows, split.unseen_classes, withheld + 1, "few-shot unseen classes");

    const auto model = fit_inductive_model(data, split, rows_by_class(data, split.seen_classes), map_cfg, hyper);
    std::vector<ClassGaussian> updated;
    ZslOutcome out;
    for (std::size_t u = 0; u < unseen_rows.size(); ++u) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(split.unseen_classes[u])));
        auto order = unseen_rows[u];
        rng.shuffle(order);
        const std::vector<Eigen::Index> support(order.begin(), order.begin() + shots);
        updated.push_back(few_shot_update(model.unseen[u], gather_rows(data.features, support)));
        std::vector<Eigen::Index> rest(order.begin() + static_cast<std::ptrdiff_t>(withheld), order.end());
        std::sort(rest.begin(), rest.end());
        out.test_rows.insert(out.test_rows.end(), rest.begin(), rest.end());
    }
    out.predictions = zsl_classify(gather_rows(data.features, out.test_rows), updated, split.unseen_classes);
    out.unseen_gaussians = std::move(updated);
    out.result = score_unseen(data, split, out.test_rows, out.predictions);
    return out;
}

std::vector<Split> cross_validation_partitions(const Split& split, int n_trials, std::uint64_t seed) {
    const std::size_t s = split.seen_classes.size();
    if (s < 4) throw ConfigError("cross-validation needs at least 4 seen classes, got " + std::to_string(s));
    if (n_trials < 1) throw ConfigError("cross-validation needs at least one trial");
    const std::size_t held = (s + 3) / 4;
    std::vector<Split> out;
    for (int t = 0; t < n_trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        auto order = split.seen_classes;
        rng.shuffle(order);
        Split trial;
        trial.split_id = t;
        trial.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        trial.unseen_classes.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
        trial.seen_classes.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
        std::sort(trial.seen_classes.begin(), trial.seen_classes.end());
        std::sort(trial.unseen_classes.begin(), trial.unseen_classes.end());
        out.push_back(std::move(trial));
    }
    return out;
}

CrossValidationResult cross_validate(const Dataset& data, const Split& split, const MapConfig& map_cfg,
                                     std::span<const HyperParams> grid, int n_trials, std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("cross-validation grid is empty");
    check_split(data, split);
    const auto trials = cross_validation_partitions(split, n_trials, seed);
    CrossValidationResult result;
    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double total = 0.0;
        for (const auto& trial : trials) total += run_inductive(data, trial, map_cfg, grid[g]).result.unseen_acc;
        result.scores.push_back(total / static_cast<double>(trials.size()));
        if (result.scores[g] > result.scores[best]) best = g;
    }
    result.best = grid[best];
    return result;
}

}  // namespace zsar
