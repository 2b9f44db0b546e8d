// Drives the built zsar executable end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "zsar/dataset.hpp"
#include "zsar/param_map_io.hpp"
#include "zsar/pipelines.hpp"

#ifndef ZSAR_CLI_PATH
#error "ZSAR_CLI_PATH must point at the zsar executable"
#endif

namespace fs = std::filesystem;
using zsar::Json;

namespace {

struct Run {
    int code;
    std::string err;
};

// Runs the CLI with stdout discarded and stderr captured.
Run run_cli(const std::string& args, const fs::path& work) {
    const fs::path err = work / "stderr.txt";
    const std::string cmd = std::string("'") + ZSAR_CLI_PATH + "' " + args + " >/dev/null 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

std::string data_flags(const fs::path& world) {
    return "--features '" + (world / "features.zsm").string() + "' --labels '" + (world / "labels.csv").string() +
           "' --attributes '" + (world / "attributes.zsm").string() + "'";
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// The default planted world, written once per process.
const fs::path& planted_world() {
    static const fs::path dir = [] {
        const auto d = testing::scratch_dir("cli_planted");
        REQUIRE(run_cli("synth-data --out '" + (d / "world").string() + "'", d).code == 0);
        return d / "world";
    }();
    return dir;
}

}  // namespace

TEST_SUITE("cli synth-data") {
    TEST_CASE("the default world loads back with its ground truth") {
        const auto data = zsar::load_dataset(planted_world() / "features.zsm", planted_world() / "labels.csv",
                                             planted_world() / "attributes.zsm");
        CHECK(data.features.rows() == 25 * 600);
        CHECK(data.features.cols() == 16);
        CHECK(data.attributes.rows() == 25);
        const Json gt = read_json(planted_world() / "ground_truth.json");
        CHECK(gt.contains("w_true"));
    }

    TEST_CASE("repeat runs write identical bytes") {
        const auto d = testing::scratch_dir("cli_synth_repeat");
        REQUIRE(run_cli("synth-data --out '" + (d / "a").string() + "'", d).code == 0);
        REQUIRE(run_cli("synth-data --out '" + (d / "b").string() + "'", d).code == 0);
        for (const char* f : {"features.zsm", "labels.csv", "attributes.zsm", "ground_truth.json"}) {
            CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
        }
    }

    TEST_CASE("one-hot attributes with tiny noise are classified perfectly") {
        const auto d = testing::scratch_dir("cli_onehot");
        write_file(d / "spec.json",
                   R"({"n_classes": 10, "dim_d": 12, "dim_k": 10, "noise_scale": 1e-6, "examples_per_class": 20,)"
                   R"( "attribute_scheme": "one_hot", "seed": 3})");
        REQUIRE(run_cli("synth-data --spec '" + (d / "spec.json").string() + "' --out '" + (d / "w").string() + "'", d).code == 0);
        const auto data = zsar::load_dataset(d / "w" / "features.zsm", d / "w" / "labels.csv", d / "w" / "attributes.zsm");
        // One-hot attributes share nothing across classes, so the maps are fit on every class
        // and asked to reproduce each class from its own attribute row.
        zsar::Split split;
        std::vector<std::vector<Eigen::Index>> rows;
        for (int c = 0; c < 10; ++c) {
            split.seen_classes.push_back(c);
            rows.push_back(data.rows_of(c));
        }
        zsar::MapConfig cfg;
        cfg.basis = zsar::MapBasis::Attributes;
        const auto model = zsar::fit_inductive_model(data, split, rows, cfg, zsar::HyperParams{});
        const auto pred = zsar::zsl_classify(data.features, zsar::predict_unseen(model.map, data.attributes),
                                             split.seen_classes);
        CHECK(zsar::instance_accuracy(pred, data.labels) == 1.0);
    }

    TEST_CASE("bad spec keys are input errors") {
        const auto d = testing::scratch_dir("cli_badspec");
        write_file(d / "spec.json", R"({"n_clases": 10})");
        CHECK(run_cli("synth-data --spec '" + (d / "spec.json").string() + "' --out '" + (d / "w").string() + "'", d).code == 2);
    }
}

TEST_SUITE("cli fit") {
    TEST_CASE("residuals are tiny and refits are byte-identical") {
        const auto d = testing::scratch_dir("cli_fit");
        REQUIRE(run_cli("fit " + data_flags(planted_world()) + " --out '" + (d / "a").string() + "'", d).code == 0);
        REQUIRE(run_cli("fit " + data_flags(planted_world()) + " --out '" + (d / "b").string() + "'", d).code == 0);
        const Json summary = read_json(d / "a" / "fit_summary.json");
        CHECK(summary["residuals"]["mean_map"].get<double>() <= 1e-8);
        CHECK(summary["residuals"]["log_var_map"].get<double>() <= 1e-8);
        for (const auto& entry : fs::directory_iterator(d / "a")) {
            CHECK(slurp(entry.path()) == slurp(d / "b" / entry.path().filename()));
        }
        const auto map = zsar::load_param_map(d / "a");
        CHECK(map.w_mu.rows() == 16);
    }

    TEST_CASE("a missing input file exits 2 and names the path") {
        const auto d = testing::scratch_dir("cli_missing");
        const std::string missing = (d / "nope.zsm").string();
        const auto run = run_cli("--error-json fit --features '" + (planted_world() / "features.zsm").string() +
                                  "' --labels '" + (planted_world() / "labels.csv").string() + "' --attributes '" +
                                  missing + "' --out '" + (d / "o").string() + "'",
                              d);
        CHECK(run.code == 2);
        CHECK(run.err.find(missing) != std::string::npos);
        const Json err = Json::parse(run.err);
        CHECK(err["error"]["exit_code"] == 2);
    }

    TEST_CASE("unknown flags are usage errors") {
        const auto d = testing::scratch_dir("cli_usage");
        CHECK(run_cli("fit --bogus", d).code == 2);
        CHECK(run_cli("--help", d).code == 0);
    }
}

TEST_SUITE("cli eval") {
    TEST_CASE("few-shot sweep reports one column per shot count") {
        const auto d = testing::scratch_dir("cli_fewshot");
        REQUIRE(run_cli("eval " + data_flags(planted_world()) + " --regime few-shot --shots 2,3,4,5 --n-splits 2 --out '" +
                         (d / "o").string() + "'",
                     d).code == 0);
        const Json report = read_json(d / "o" / "report.json");
        const Json& row = report["per_split"][0];
        for (int s : {2, 3, 4, 5}) CHECK(row.contains("unseen_acc_shots_" + std::to_string(s)));
        CHECK(report["per_split"].size() == 2);
    }

    TEST_CASE("gzsl rows carry seen, unseen and harmonic accuracy") {
        const auto d = testing::scratch_dir("cli_gzsl");
        REQUIRE(run_cli("eval " + data_flags(planted_world()) + " --regime gzsl --n-splits 1 --synth-count 50 --out '" +
                         (d / "o").string() + "'",
                     d).code == 0);
        const Json row = read_json(d / "o" / "report.json")["per_split"][0];
        for (const char* k : {"seen_acc", "unseen_acc", "harmonic_mean"}) CHECK(row.contains(k));
        CHECK(slurp(d / "o" / "per_split.csv").rfind("split_id,metric,value\n", 0) == 0);
    }

    TEST_CASE("a 16-class 8/8 world over 30 splits gives 30 rows") {
        const auto d = testing::scratch_dir("cli_olympic");
        write_file(d / "spec.json", R"({"n_classes": 16, "examples_per_class": 40, "seed": 5})");
        REQUIRE(run_cli("synth-data --spec '" + (d / "spec.json").string() + "' --out '" + (d / "w").string() + "'", d).code == 0);
        REQUIRE(run_cli("eval " + data_flags(d / "w") + " --regime zsl --n-splits 30 --n-seen 8 --out '" + (d / "o").string() + "'",
                     d).code == 0);
        const Json report = read_json(d / "o" / "report.json");
        CHECK(report["per_split"].size() == 30);
        CHECK(report["aggregate"].contains("unseen_acc"));
    }

    TEST_CASE("thread count does not change the report") {
        const auto d = testing::scratch_dir("cli_threads");
        const std::string base = "eval " + data_flags(planted_world()) + " --regime zsl-transductive --n-splits 4 ";
        REQUIRE(run_cli(base + "--threads 1 --out '" + (d / "a").string() + "'", d).code == 0);
        REQUIRE(run_cli(base + "--threads 4 --out '" + (d / "b").string() + "'", d).code == 0);
        CHECK(slurp(d / "a" / "report.json") == slurp(d / "b" / "report.json"));
    }

    TEST_CASE("bad regime and bad labels exit 2") {
        const auto d = testing::scratch_dir("cli_eval_bad");
        CHECK(run_cli("eval " + data_flags(planted_world()) + " --regime nope --out '" + (d / "o").string() + "'", d).code == 2);
        write_file(d / "labels.csv", "0\n1\n");
        CHECK(run_cli("eval --features '" + (planted_world() / "features.zsm").string() + "' --labels '" +
                       (d / "labels.csv").string() + "' --attributes '" + (planted_world() / "attributes.zsm").string() +
                       "' --regime zsl --out '" + (d / "o").string() + "'",
                   d).code == 2);
    }

    TEST_CASE("unknown config keys are rejected") {
        const auto d = testing::scratch_dir("cli_config");
        write_file(d / "cfg.json", R"({"lambda_muu": 1})");
        CHECK(run_cli("eval " + data_flags(planted_world()) + " --regime zsl --config '" + (d / "cfg.json").string() +
                       "' --out '" + (d / "o").string() + "'",
                   d).code == 2);
    }
}
