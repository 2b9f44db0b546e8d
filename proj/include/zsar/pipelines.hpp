#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zsar/dataset.hpp"
#include "zsar/em.hpp"
#include "zsar/metrics.hpp"
#include "zsar/regression.hpp"

namespace zsar {

// How attributes are mapped to distribution parameters.
struct MapConfig {
    KernelKind kernel = KernelKind::Rbf;
    std::optional<double> bandwidth;    // unset: median heuristic over the seen attributes
    MapBasis basis = MapBasis::Kernel;  // Attributes selects the linear-regression variant

    KernelSpec resolve(const Matrix& seen_attrs) const;
};

/// argmax_c log p(x | g_c) per row; ties go to the lowest position.
std::vector<ClassId> zsl_classify(const Matrix& test_features, std::span<const ClassGaussian> gaussians,
                                  std::span<const ClassId> class_ids);

/// What the inductive model learned from the seen classes, plus its unseen-class predictions.
struct InductiveModel {
    std::vector<ClassGaussian> seen;
    ParamMap map;
    std::vector<ClassGaussian> unseen;
};

/// Fits on the given rows only. `seen_rows[i]` are the training rows of split.seen_classes[i].
InductiveModel fit_inductive_model(const Dataset& data, const Split& split,
                                   const std::vector<std::vector<Eigen::Index>>& seen_rows, const MapConfig& map_cfg,
                                   const HyperParams& hyper);

struct ZslOutcome {
    SplitResult result;
    std::vector<Eigen::Index> test_rows;
    std::vector<ClassId> predictions;  // aligned with test_rows
    std::vector<ClassGaussian> unseen_gaussians;
    std::vector<double> em_log_likelihoods;  // transductive only
};

/// All seen-class rows train; all unseen-class rows are the test pool.
ZslOutcome run_inductive(const Dataset& data, const Split& split, const MapConfig& map_cfg, const HyperParams& hyper);

/// run_inductive's unseen predictions refined by EM over the (unlabeled) unseen test rows.
ZslOutcome run_transductive(const Dataset& data, const Split& split, const MapConfig& map_cfg,
                            const HyperParams& hyper, const EmConfig& em_cfg);

// ---- generalized ZSL ---------------------------------------------------------------

/// One-vs-rest regularized least-squares scores with a bias column.
struct GzslClassifier {
    Matrix weights;                   // C x (D + 1)
    std::vector<ClassId> class_order;

    Matrix scores(const Matrix& features) const;
    /// Class ids from class_order; ties go to the lowest position.
    std::vector<ClassId> predict(const Matrix& features) const;
};

/// Per class, ridge regression of +1/-1 targets on [x, 1]. `labels` are
/// positions in [0, n_classes); class_order is set to 0..n_classes-1.
///
/// With `balanced` every example is weighted by N / (C * n_y) so each class
/// carries the same total weight in the squared loss. Unweighted least
/// squares favours whichever classes have the most rows.
GzslClassifier train_linear_ovr(const Matrix& features, std::span<const ClassId> labels, int n_classes,
                                double lambda, bool balanced = false);

enum class GzslMode { Inductive, Transductive };

struct GzslConfig {
    int synth_count = 200;
    double classifier_lambda = 1.0;
    std::uint64_t seed = 0;
    GzslMode mode = GzslMode::Transductive;
    bool balanced_classes = true;
    EmConfig em;
};

struct GzslOutcome {
    SplitResult result;
    std::vector<Eigen::Index> test_rows;  // seen-test rows followed by unseen rows
    std::vector<ClassId> predictions;
};

/// Seen data is split 80/20 per class (seeded); the classifier trains on the
/// 80% portion plus synth_count pseudo-examples per unseen class and is scored
/// on the 20% portion together with every unseen-class row.
GzslOutcome run_gzsl(const Dataset& data, const Split& split, const MapConfig& map_cfg, const HyperParams& hyper,
                     const GzslConfig& cfg);

/// Same split and classifier, trained on seen data only.
GzslOutcome run_gzsl_seen_only(const Dataset& data, const Split& split, double classifier_lambda,
                               std::uint64_t seed, bool balanced_classes = true);

// ---- few-shot ----------------------------------------------------------------------

/// Inductive unseen gaussians updated with `shots` labeled rows per unseen
/// class. Rows are drawn in a seeded per-class order, so smaller shot counts
/// use a prefix of larger ones. The first max(shots, reserve) rows of each
/// class are withheld from evaluation, which lets a sweep share one pool.
ZslOutcome run_few_shot(const Dataset& data, const Split& split, const MapConfig& map_cfg, const HyperParams& hyper,
                        int shots, std::uint64_t seed, int reserve = 0);

// ---- model selection -----------------------------------------------------------------

struct CrossValidationResult {
    HyperParams best;
    std::vector<double> scores;  // mean validation accuracy per grid point
};

/// Each trial holds out ceil(S/4) seen classes as pseudo-unseen and scores
/// every grid point with run_inductive. Ties keep the earliest grid point.
CrossValidationResult cross_validate(const Dataset& data, const Split& split, const MapConfig& map_cfg,
                                     std::span<const HyperParams> grid, int n_trials, std::uint64_t seed);

/// The validation partitions cross_validate uses, exposed for inspection.
std::vector<Split> cross_validation_partitions(const Split& split, int n_trials, std::uint64_t seed);

}  // namespace zsar
