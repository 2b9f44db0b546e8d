// Command-line front end: one subcommand per workflow (see --help).
//
// Exit codes: 0 success, 2 input or configuration problem, 3 numerical failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "zsar/dataset.hpp"
#include "zsar/errors.hpp"
#include "zsar/metrics.hpp"
#include "zsar/param_map_io.hpp"
#include "zsar/pipelines.hpp"
#include "zsar/rng.hpp"

namespace fs = std::filesystem;
using namespace zsar;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

// Everything a run depends on. Defaults here are the documented defaults;
// a --config file overrides them and explicit flags override the file.
struct RunConfig {
    std::string kernel = "auto";  // auto | rbf | linear
    std::optional<double> bandwidth;
    std::string basis = "kernel";  // kernel | attributes
    HyperParams hyper;
    std::vector<HyperParams> grid;  // non-empty: cross-validate per split
    int cv_trials = 5;
    EmConfig em;
    int synth_count = 200;
    double classifier_lambda = 1.0;
    std::vector<int> shots{2, 3, 4, 5};
    int n_splits = 30;
    std::optional<int> n_seen;
    std::uint64_t seed = 7;
    std::string mode = "transductive";  // gzsl pseudo-example source

    MapConfig map_config() const {
        MapConfig cfg;
        if (kernel == "linear") cfg.kernel = KernelKind::Linear;
        cfg.bandwidth = bandwidth;
        cfg.basis = basis == "attributes" ? MapBasis::Attributes : MapBasis::Kernel;
        return cfg;
    }

    void validate() const {
        if (kernel != "auto" && kernel != "rbf" && kernel != "linear") {
            throw ConfigError("kernel must be auto, rbf or linear, got '" + kernel + "'");
        }
        if (kernel == "auto" && bandwidth) throw ConfigError("--bandwidth needs --kernel rbf");
        if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
        if (basis != "kernel" && basis != "attributes") throw ConfigError("basis must be kernel or attributes");
        hyper.validate();
        for (const auto& h : grid) h.validate();
        if (cv_trials < 1) throw ConfigError("cv_trials must be >= 1");
        em.validate();
        if (synth_count < 1) throw ConfigError("synth_count must be >= 1");
        if (!(classifier_lambda > 0.0)) throw ConfigError("classifier_lambda must be positive");
        if (shots.empty()) throw ConfigError("shots list is empty");
        for (int s : shots) {
            if (s < 1) throw ConfigError("shot counts must be >= 1");
        }
        if (n_splits < 1) throw ConfigError("n_splits must be >= 1");
        if (n_seen && *n_seen < 1) throw ConfigError("n_seen must be >= 1");
        if (mode != "transductive" && mode != "inductive") {
            throw ConfigError("mode must be inductive or transductive, got '" + mode + "'");
        }
    }

    Json echo() const {
        Json j;
        j["kernel"] = kernel == "auto" ? "rbf" : kernel;
        j["bandwidth"] = bandwidth ? Json(*bandwidth) : Json("median");
        j["basis"] = basis;
        j["hyper"] = to_json(hyper);
        if (!grid.empty()) {
            Json g = Json::array();
            for (const auto& h : grid) g.push_back(to_json(h));
            j["hyper_grid"] = g;
            j["cv_trials"] = cv_trials;
        }
        j["em"] = Json{{"max_iters", em.max_iters}, {"rel_tol", em.rel_tol}, {"variance_floor", em.variance_floor}};
        j["synth_count"] = synth_count;
        j["classifier_lambda"] = classifier_lambda;
        j["shots"] = shots;
        j["n_splits"] = n_splits;
        j["n_seen"] = n_seen ? Json(*n_seen) : Json(nullptr);
        j["seed"] = seed;
        j["mode"] = mode;
        return j;
    }
};

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse '" + item + "' as an integer");
        }
    }
    return out;
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path.string(), 0, "cannot open file");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(path.string(), static_cast<long long>(e.byte), e.what());
    }
}

// Unknown keys are rejected so that typos do not silently fall back to defaults.
void apply_config_file(RunConfig& cfg, const Json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "kernel") cfg.kernel = value.get<std::string>();
        else if (key == "bandwidth") {
            if (value.is_string() && value == "median") cfg.bandwidth.reset();
            else cfg.bandwidth = value.get<double>();
        }
        else if (key == "basis") cfg.basis = value.get<std::string>();
        else if (key == "hyper") cfg.hyper = hyper_from_json(value);
        else if (key == "hyper_grid") {
            cfg.grid.clear();
            for (const auto& h : value) cfg.grid.push_back(hyper_from_json(h));
            if (cfg.grid.empty()) throw ConfigError("hyper_grid is empty");
        }
        else if (key == "cv_trials") cfg.cv_trials = value.get<int>();
        else if (key == "em") {
            for (const auto& [k, v] : value.items()) {
                if (k == "max_iters") cfg.em.max_iters = v.get<int>();
                else if (k == "rel_tol") cfg.em.rel_tol = v.get<double>();
                else if (k == "variance_floor") cfg.em.variance_floor = v.get<double>();
                else throw ConfigError("unknown em setting '" + k + "'");
            }
        }
        else if (key == "synth_count") cfg.synth_count = value.get<int>();
        else if (key == "classifier_lambda") cfg.classifier_lambda = value.get<double>();
        else if (key == "shots") cfg.shots = value.get<std::vector<int>>();
        else if (key == "n_splits") cfg.n_splits = value.get<int>();
        else if (key == "n_seen") cfg.n_seen = value.get<int>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "mode") cfg.mode = value.get<std::string>();
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

// Raw flag values; only the ones the user actually passed are applied.
struct FlagValues {
    std::string config_path;
    std::string kernel;
    double bandwidth = 0.0;
    std::string basis;
    double lambda_mu = 0, lambda_1 = 0, lambda_sigma = 0, lambda_2 = 0;
    int em_max_iters = 0;
    double em_rel_tol = 0;
    int synth_count = 0;
    double classifier_lambda = 0;
    std::string shots;
    int n_splits = 0;
    int n_seen = 0;
    std::uint64_t seed = 0;
    std::string mode;
};

struct DataPaths {
    std::string features;
    std::string labels;
    std::string attributes;
    std::string splits;

    void require_exist() const {
        for (const auto& [what, path] : {std::pair{"features", &features}, std::pair{"labels", &labels},
                                         std::pair{"attributes", &attributes}}) {
            if (!fs::exists(*path)) throw ConfigError(std::string(what) + " file not found: " + *path);
        }
        if (!splits.empty() && !fs::exists(splits)) throw ConfigError("splits file not found: " + splits);
    }

    Json echo() const {
        return Json{{"features", features}, {"labels", labels}, {"attributes", attributes},
                    {"splits", splits.empty() ? Json(nullptr) : Json(splits)}};
    }
};

void add_data_options(CLI::App* cmd, DataPaths& paths) {
    cmd->add_option("--features", paths.features, "Feature matrix (.zsm binary or CSV), one row per example")
        ->required();
    cmd->add_option("--labels", paths.labels, "Label CSV, one class id per line")->required();
    cmd->add_option("--attributes", paths.attributes, "Class attribute matrix (.zsm or CSV), one row per class")
        ->required();
    cmd->add_option("--splits", paths.splits, "Split CSV (split_id,class_id,role)");
}

void add_model_options(CLI::App* cmd, FlagValues& f) {
    cmd->add_option("--config", f.config_path, "JSON config; flags given explicitly take precedence");
    cmd->add_option("--kernel", f.kernel, "auto (rbf, median bandwidth), rbf or linear");
    cmd->add_option("--bandwidth", f.bandwidth, "RBF bandwidth (default: median pairwise attribute distance)");
    cmd->add_option("--basis", f.basis, "kernel (default) or attributes for the linear-regression variant");
    cmd->add_option("--lambda-mu", f.lambda_mu, "Ridge penalty of the mean map");
    cmd->add_option("--lambda-1", f.lambda_1, "Reconstruction weight of the mean map");
    cmd->add_option("--lambda-sigma", f.lambda_sigma, "Ridge penalty of the log-variance map");
    cmd->add_option("--lambda-2", f.lambda_2, "Reconstruction weight of the log-variance map");
    cmd->add_option("--seed", f.seed, "Base seed");
}

RunConfig resolve_config(const CLI::App* cmd, const FlagValues& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) apply_config_file(cfg, read_json_file(f.config_path));
    const auto given = [cmd](const char* name) {
        const auto* opt = cmd->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--kernel")) cfg.kernel = f.kernel;
    if (given("--bandwidth")) cfg.bandwidth = f.bandwidth;
    if (given("--basis")) cfg.basis = f.basis;
    if (given("--lambda-mu")) cfg.hyper.lambda_mu = f.lambda_mu;
    if (given("--lambda-1")) cfg.hyper.lambda_1 = f.lambda_1;
    if (given("--lambda-sigma")) cfg.hyper.lambda_sigma = f.lambda_sigma;
    if (given("--lambda-2")) cfg.hyper.lambda_2 = f.lambda_2;
    if (given("--em-max-iters")) cfg.em.max_iters = f.em_max_iters;
    if (given("--em-rel-tol")) cfg.em.rel_tol = f.em_rel_tol;
    if (given("--synth-count")) cfg.synth_count = f.synth_count;
    if (given("--classifier-lambda")) cfg.classifier_lambda = f.classifier_lambda;
    if (given("--shots")) cfg.shots = parse_int_list(f.shots);
    if (given("--n-splits")) cfg.n_splits = f.n_splits;
    if (given("--n-seen")) cfg.n_seen = f.n_seen;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--mode")) cfg.mode = f.mode;
    if (cfg.kernel == "linear" && cfg.bandwidth) throw ConfigError("--bandwidth only applies to the rbf kernel");
    cfg.validate();
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError(path.string(), 0, "cannot open file for writing");
    out << text;
    if (!out) throw LoadError(path.string(), 0, "write failed");
}

Dataset load(const DataPaths& paths) {
    paths.require_exist();
    Dataset data = load_dataset(paths.features, paths.labels, paths.attributes);
    data.validate();
    return data;
}

std::vector<Split> resolve_splits(const DataPaths& paths, const RunConfig& cfg, const Dataset& data) {
    if (!paths.splits.empty()) {
        auto splits = read_splits_csv(paths.splits);
        if (splits.empty()) throw ConfigError("splits file " + paths.splits + " holds no splits");
        for (const auto& s : splits) s.validate(data.n_classes());
        return splits;
    }
    const int n_classes = static_cast<int>(data.n_classes());
    const int n_seen = cfg.n_seen.value_or((n_classes + 1) / 2);
    if (n_seen >= n_classes) {
        throw ConfigError("n_seen = " + std::to_string(n_seen) + " leaves no unseen classes out of " +
                          std::to_string(n_classes));
    }
    return generate_splits(n_classes, n_seen, cfg.n_splits, cfg.seed);
}

// Runs `fn(i)` for i in [0, n) on up to `threads` workers. Results are stored by
// index, so the outcome does not depend on scheduling. The lowest-index
// exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

HyperParams pick_hyper(const Dataset& data, const Split& split, const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.grid.empty()) return cfg.hyper;
    return cross_validate(data, split, cfg.map_config(), cfg.grid, cfg.cv_trials, seed).best;
}

void note_selection(SplitResult& r, const RunConfig& cfg, const HyperParams& h) {
    if (cfg.grid.empty()) return;
    r.extra.emplace_back("selected_lambda_mu", h.lambda_mu);
    r.extra.emplace_back("selected_lambda_1", h.lambda_1);
    r.extra.emplace_back("selected_lambda_sigma", h.lambda_sigma);
    r.extra.emplace_back("selected_lambda_2", h.lambda_2);
}

SplitResult eval_split(const std::string& regime, const Dataset& data, const Split& split, const RunConfig& cfg) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(split.split_id);
    const MapConfig mc = cfg.map_config();
    const HyperParams hyper = pick_hyper(data, split, cfg, seed);
    SplitResult r;
    if (regime == "zsl") {
        r = run_inductive(data, split, mc, hyper).result;
    } else if (regime == "zsl-transductive") {
        r = run_transductive(data, split, mc, hyper, cfg.em).result;
    } else if (regime == "gzsl") {
        GzslConfig g;
        g.synth_count = cfg.synth_count;
        g.classifier_lambda = cfg.classifier_lambda;
        g.seed = seed;
        g.mode = cfg.mode == "inductive" ? GzslMode::Inductive : GzslMode::Transductive;
        g.em = cfg.em;
        r = run_gzsl(data, split, mc, hyper, g).result;
    } else {
        // Every shot count is scored on the same pool: the rows beyond the largest count.
        const int reserve = *std::max_element(cfg.shots.begin(), cfg.shots.end());
        std::vector<std::pair<std::string, double>> columns;
        for (int shots : cfg.shots) {
            const auto out = run_few_shot(data, split, mc, hyper, shots, seed, reserve);
            columns.emplace_back("unseen_acc_shots_" + std::to_string(shots), out.result.unseen_acc);
            r.unseen_acc = out.result.unseen_acc;  // headline: the last entry of the sweep
        }
        r.extra = std::move(columns);
    }
    r.split_id = split.split_id;
    note_selection(r, cfg, hyper);
    return r;
}

int cmd_eval(const CLI::App* cmd, const FlagValues& f, const DataPaths& paths, const std::string& regime,
             const std::string& out_dir, unsigned threads) {
    const RunConfig cfg = resolve_config(cmd, f);
    const Dataset data = load(paths);
    const auto splits = resolve_splits(paths, cfg, data);

    std::vector<SplitResult> results(splits.size());
    parallel_for(splits.size(), threads, [&](std::size_t i) { results[i] = eval_split(regime, data, splits[i], cfg); });

    ExperimentReport report = aggregate_reports(std::move(results));
    report.regime = regime;
    report.seed = cfg.seed;
    report.config_echo = cfg.echo();
    report.config_echo["data"] = paths.echo();
    report.config_echo["n_splits_run"] = splits.size();

    const fs::path dir(out_dir);
    write_text(dir / "report.json", to_json(report).dump(2) + "\n");
    write_text(dir / "per_split.csv", per_split_csv(report));
    for (const auto& m : report.aggregate) {
        std::cout << m.name << " " << m.mean << " +- " << m.std << "\n";
    }
    return 0;
}

int cmd_fit(const CLI::App* cmd, const FlagValues& f, const DataPaths& paths, int split_id, const std::string& out_dir) {
    const RunConfig cfg = resolve_config(cmd, f);
    const Dataset data = load(paths);

    Split split;
    if (!paths.splits.empty()) {
        const auto splits = read_splits_csv(paths.splits);
        const auto it = std::find_if(splits.begin(), splits.end(), [&](const Split& s) { return s.split_id == split_id; });
        if (it == splits.end()) throw ConfigError("split " + std::to_string(split_id) + " not found in " + paths.splits);
        split = *it;
        split.validate(data.n_classes());
    } else {
        // Without a split file every class counts as seen.
        for (ClassId c = 0; c < data.n_classes(); ++c) split.seen_classes.push_back(c);
    }

    HyperParams hyper = cfg.hyper;
    std::vector<double> cv_scores;
    if (!cfg.grid.empty()) {
        const auto cv = cross_validate(data, split, cfg.map_config(), cfg.grid, cfg.cv_trials, cfg.seed);
        hyper = cv.best;
        cv_scores = cv.scores;
    }

    std::vector<ClassGaussian> seen;
    Matrix seen_attrs(static_cast<Eigen::Index>(split.seen_classes.size()), data.attributes.cols());
    for (std::size_t i = 0; i < split.seen_classes.size(); ++i) {
        const ClassId c = split.seen_classes[i];
        const auto rows = data.rows_of(c);
        if (rows.empty()) throw DataValidationError("seen class " + std::to_string(c) + " has no examples");
        Matrix x(static_cast<Eigen::Index>(rows.size()), data.features.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = data.features.row(rows[r]);
        seen.push_back(fit_mle(x));
        seen_attrs.row(static_cast<Eigen::Index>(i)) = data.attributes.row(c);
    }
    const MapConfig mc = cfg.map_config();
    const ParamMap map = mc.basis == MapBasis::Attributes ? fit_param_map_linear(seen, seen_attrs, hyper)
                                                          : fit_param_map(seen, seen_attrs, mc.resolve(seen_attrs), hyper);
    save_param_map(out_dir, map);

    const auto res = stationarity_residuals(map, seen);
    Json summary;
    summary["residuals"] = Json{{"mean_map", res.mean_map}, {"log_var_map", res.log_var_map}};
    summary["hyper"] = to_json(map.hyper);
    summary["kernel"] = Json{{"kind", to_string(map.kernel.kind)}, {"bandwidth", map.kernel.bandwidth}};
    summary["seen_classes"] = split.seen_classes;
    if (!cv_scores.empty()) summary["cv_scores"] = cv_scores;
    summary["config"] = cfg.echo();
    summary["config"]["data"] = paths.echo();
    write_text(fs::path(out_dir) / "fit_summary.json", summary.dump(2) + "\n");
    std::cout << "residuals " << res.mean_map << " " << res.log_var_map << "\n";
    return 0;
}

Json vector_json(const Vector& v) {
    return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

SyntheticWorldSpec spec_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("world spec must be a JSON object");
    SyntheticWorldSpec spec;
    double w_scale = 2.0;
    std::optional<Matrix> w_true;
    for (const auto& [key, value] : j.items()) {
        if (key == "n_classes") spec.n_classes = value.get<int>();
        else if (key == "dim_d") spec.dim_d = value.get<int>();
        else if (key == "dim_k") spec.dim_k = value.get<int>();
        else if (key == "noise_scale") spec.noise_scale = value.get<double>();
        else if (key == "examples_per_class") spec.examples_per_class = value.get<int>();
        else if (key == "attribute_scheme") spec.attribute_scheme = parse_attribute_scheme(value.get<std::string>());
        else if (key == "seed") spec.seed = value.get<std::uint64_t>();
        else if (key == "w_scale") w_scale = value.get<double>();
        else if (key == "w_true") {
            const auto rows = value.get<std::vector<std::vector<double>>>();
            if (rows.empty()) throw ConfigError("w_true is empty");
            Matrix w(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != rows[0].size()) throw ConfigError("w_true rows differ in length");
                for (std::size_t c = 0; c < rows[r].size(); ++c) {
                    w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
                }
            }
            w_true = std::move(w);
        }
        else throw ConfigError("unknown world spec key '" + key + "'");
    }
    if (!(w_scale >= 0.0) || !std::isfinite(w_scale)) throw ConfigError("w_scale must be a finite non-negative number");
    if (spec.dim_d < 1 || spec.dim_k < 1) throw ConfigError("dim_d and dim_k must be >= 1");
    if (w_true) {
        spec.w_true = std::move(*w_true);
    } else {
        SyntheticWorldSpec planted = SyntheticWorldSpec::planted(spec.seed);
        spec.w_true = w_scale == 2.0 && spec.dim_d == planted.dim_d && spec.dim_k == planted.dim_k
                          ? planted.w_true
                          : random_weight_matrix(spec.dim_d, spec.dim_k, w_scale, derive_seed(spec.seed, 0xA11CE));
    }
    spec.validate();
    return spec;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    const SyntheticWorldSpec spec =
        spec_path.empty() ? SyntheticWorldSpec::planted(7) : spec_from_json(read_json_file(spec_path));
    const auto [data, truth] = generate_synthetic(spec);
    save_dataset(out_dir, data);

    Json gt;
    gt["seed"] = spec.seed;
    gt["n_classes"] = spec.n_classes;
    gt["dim_d"] = spec.dim_d;
    gt["dim_k"] = spec.dim_k;
    gt["noise_scale"] = spec.noise_scale;
    gt["examples_per_class"] = spec.examples_per_class;
    gt["attribute_scheme"] = to_string(spec.attribute_scheme);
    Json w = Json::array();
    for (Eigen::Index r = 0; r < spec.w_true.rows(); ++r) w.push_back(vector_json(spec.w_true.row(r).transpose()));
    gt["w_true"] = w;
    Json classes = Json::array();
    for (std::size_t c = 0; c < truth.size(); ++c) {
        classes.push_back(Json{{"class_id", c}, {"mean", vector_json(truth[c].mean())},
                               {"variance", vector_json(truth[c].variance())}});
    }
    gt["gaussians"] = classes;
    write_text(fs::path(out_dir) / "ground_truth.json", gt.dump(2) + "\n");
    std::cout << "wrote " << data.features.rows() << " rows, " << spec.n_classes << " classes to " << out_dir << "\n";
    return 0;
}

int report_error(const std::exception& e, int code, bool as_json) {
    if (as_json) {
        Json j{{"error", {{"exit_code", code}, {"category", code == kExitNumerical ? "numerical" : "input"},
                          {"message", e.what()}}}};
        if (const auto* le = dynamic_cast<const LoadError*>(&e)) {
            j["error"]["file"] = le->file();
            j["error"]["offset"] = le->offset();
        }
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << "error: " << e.what() << "\n";
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot action recognition with attribute-predicted Gaussian class models"};
    app.require_subcommand(1);
    bool error_json = false;
    app.add_flag("--error-json", error_json, "Print errors as a JSON object on stderr");

    FlagValues f;
    DataPaths paths;
    std::string out;

    auto* fit = app.add_subcommand("fit", "Fit the attribute-to-parameter maps on the seen classes");
    add_data_options(fit, paths);
    add_model_options(fit, f);
    int split_id = 0;
    fit->add_option("--split-id", split_id, "Split whose seen classes are used (with --splits)");
    fit->add_option("--out", out, "Output directory for the parameter map and fit_summary.json")->required();

    auto* eval = app.add_subcommand("eval", "Run an evaluation regime over every split");
    add_data_options(eval, paths);
    add_model_options(eval, f);
    std::string regime;
    eval->add_option("--regime", regime, "zsl, zsl-transductive, gzsl or few-shot")
        ->required()
        ->check(CLI::IsMember({"zsl", "zsl-transductive", "gzsl", "few-shot"}));
    eval->add_option("--n-splits", f.n_splits, "Number of generated splits when --splits is absent (default 30)");
    eval->add_option("--n-seen", f.n_seen, "Seen classes per generated split (default: half, rounded up)");
    eval->add_option("--synth-count", f.synth_count, "Pseudo-examples per unseen class for gzsl (default 200)");
    eval->add_option("--classifier-lambda", f.classifier_lambda, "Ridge penalty of the gzsl classifier (default 1)");
    eval->add_option("--shots", f.shots, "Comma-separated shot counts for few-shot (default 2,3,4,5)");
    eval->add_option("--em-max-iters", f.em_max_iters, "EM iteration cap (default 100)");
    eval->add_option("--em-rel-tol", f.em_rel_tol, "EM relative log-likelihood tolerance (default 1e-6)");
    eval->add_option("--mode", f.mode, "gzsl pseudo-example source: transductive (default) or inductive");
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    eval->add_option("--threads", threads, "Worker threads across splits (does not change results)");
    eval->add_option("--out", out, "Output directory for report.json and per_split.csv")->required();

    auto* synth = app.add_subcommand("synth-data", "Write a planted synthetic dataset and its ground truth");
    std::string spec_path;
    synth->add_option("--spec", spec_path, "World spec JSON (default: the planted 25-class world, seed 7)");
    synth->add_option("--out", out, "Output directory")->required();

    for (auto* sub : {fit, eval, synth}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*fit) return cmd_fit(fit, f, paths, split_id, out);
        if (*eval) return cmd_eval(eval, f, paths, regime, out, threads);
        return cmd_synth(spec_path, out);
    } catch (const Error& e) {
        return report_error(e, e.category() == Error::Category::Numerical ? kExitNumerical : kExitInput, error_json);
    } catch (const nlohmann::json::exception& e) {
        return report_error(e, kExitInput, error_json);
    } catch (const fs::filesystem_error& e) {
        return report_error(e, kExitInput, error_json);
    } catch (const std::exception& e) {
        return report_error(e, kExitNumerical, error_json);
    }
}
