#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "zsar/dataset.hpp"
#include "zsar/em.hpp"
#include "zsar/errors.hpp"
#include "zsar/metrics.hpp"
#include "zsar/param_map_io.hpp"
#include "zsar/pipelines.hpp"
#include "zsar/regression.hpp"

namespace py = pybind11;
using namespace zsar;

namespace {

py::dict outcome_dict(const ZslOutcome& out) {
    py::dict d;
    d["unseen_acc"] = out.result.unseen_acc;
    d["test_rows"] = out.test_rows;
    d["predictions"] = out.predictions;
    d["unseen_gaussians"] = out.unseen_gaussians;
    d["em_log_likelihoods"] = out.em_log_likelihoods;
    return d;
}

}  // namespace

PYBIND11_MODULE(_zsar, m) {
    m.doc() = "Zero-shot action recognition with attribute-predicted Gaussian class models";

    // Input-side failures read naturally as ValueError in Python.
    auto error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    py::register_exception<SingularPencilError>(m, "SingularPencilError", error.ptr());
    py::register_exception<LoadError>(m, "LoadError", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
    py::register_exception<DataValidationError>(m, "DataValidationError", error.ptr());

    m.attr("VARIANCE_FLOOR") = kVarianceFloor;

    // linear algebra
    m.def("solve_sylvester", &solve_sylvester, py::arg("a"), py::arg("b"), py::arg("c"),
          "W with a W + W b = c for symmetric a (PSD) and b (PD)");
    py::enum_<KernelKind>(m, "KernelKind").value("RBF", KernelKind::Rbf).value("LINEAR", KernelKind::Linear);
    py::class_<KernelSpec>(m, "KernelSpec")
        .def_static("rbf", &KernelSpec::rbf, py::arg("bandwidth"))
        .def_static("linear", &KernelSpec::linear)
        .def_readonly("kind", &KernelSpec::kind)
        .def_readonly("bandwidth", &KernelSpec::bandwidth);
    m.def("kernel_matrix", &kernel_matrix, py::arg("rows_attrs"), py::arg("cols_attrs"), py::arg("spec"));
    m.def("median_bandwidth", &median_bandwidth, py::arg("attrs"));
    m.def("ridge_solve", &ridge_solve, py::arg("targets"), py::arg("inputs"), py::arg("lam"));

    // gaussians
    py::class_<ClassGaussian>(m, "ClassGaussian")
        .def(py::init<Vector, Vector>(), py::arg("mean"), py::arg("log_var"))
        .def_static("from_variance", [](Vector mean, const Vector& var) { return ClassGaussian::from_variance(std::move(mean), var); },
                    py::arg("mean"), py::arg("variance"))
        .def_property_readonly("mean", &ClassGaussian::mean)
        .def_property_readonly("log_var", &ClassGaussian::log_var)
        .def_property_readonly("variance", &ClassGaussian::variance)
        .def("__repr__", [](const ClassGaussian& g) { return "<ClassGaussian dim=" + std::to_string(g.dim()) + ">"; });
    m.def("fit_mle", [](const Matrix& x) { return fit_mle(x); }, py::arg("examples"));
    m.def("log_density_rows", &log_density_rows, py::arg("xs"), py::arg("g"));
    m.def("sample", &sample, py::arg("g"), py::arg("n"), py::arg("seed"));
    m.def("few_shot_update", [](const ClassGaussian& g, const Matrix& x) { return few_shot_update(g, x); },
          py::arg("prior"), py::arg("new_examples"));

    // regression
    py::class_<HyperParams>(m, "HyperParams")
        .def(py::init([](double lm, double l1, double ls, double l2) { return HyperParams{lm, l1, ls, l2}; }),
             py::arg("lambda_mu") = HyperParams{}.lambda_mu, py::arg("lambda_1") = HyperParams{}.lambda_1,
             py::arg("lambda_sigma") = HyperParams{}.lambda_sigma, py::arg("lambda_2") = HyperParams{}.lambda_2)
        .def_readwrite("lambda_mu", &HyperParams::lambda_mu)
        .def_readwrite("lambda_1", &HyperParams::lambda_1)
        .def_readwrite("lambda_sigma", &HyperParams::lambda_sigma)
        .def_readwrite("lambda_2", &HyperParams::lambda_2);
    py::class_<ParamMap>(m, "ParamMap")
        .def_readonly("w_mu", &ParamMap::w_mu)
        .def_readonly("w_sigma", &ParamMap::w_sigma)
        .def_readonly("kernel", &ParamMap::kernel)
        .def_readonly("hyper", &ParamMap::hyper)
        .def("save", [](const ParamMap& map, const std::filesystem::path& dir) { save_param_map(dir, map); })
        .def_static("load", &load_param_map, py::arg("dir"));
    m.def("fit_param_map",
          [](const std::vector<ClassGaussian>& seen, const Matrix& attrs, const KernelSpec& k, const HyperParams& h) {
              return fit_param_map(seen, attrs, k, h);
          },
          py::arg("seen"), py::arg("seen_attrs"), py::arg("kernel"), py::arg("hyper") = HyperParams{});
    m.def("predict_unseen", &predict_unseen, py::arg("map"), py::arg("unseen_attrs"));

    // transductive refinement
    m.def("em_refine",
          [](const Matrix& x, const std::vector<ClassGaussian>& init, int max_iters, double rel_tol) {
              EmConfig cfg;
              cfg.max_iters = max_iters;
              cfg.rel_tol = rel_tol;
              const EmResult r = em_refine(x, init, cfg);
              py::dict d;
              d["gaussians"] = r.gaussians;
              d["responsibilities"] = r.responsibilities;
              d["log_likelihoods"] = r.log_likelihoods;
              d["iterations_run"] = r.iterations_run;
              return d;
          },
          py::arg("unlabeled"), py::arg("init"), py::arg("max_iters") = 100, py::arg("rel_tol") = 1e-6);

    // data
    py::class_<Dataset>(m, "Dataset")
        .def_readonly("features", &Dataset::features)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("attributes", &Dataset::attributes)
        .def_property_readonly("n_classes", &Dataset::n_classes);
    py::class_<Split>(m, "Split")
        .def(py::init([](std::vector<ClassId> seen, std::vector<ClassId> unseen, int id) {
                 Split s;
                 s.seen_classes = std::move(seen);
                 s.unseen_classes = std::move(unseen);
                 s.split_id = id;
                 return s;
             }),
             py::arg("seen_classes"), py::arg("unseen_classes"), py::arg("split_id") = 0)
        .def_readonly("split_id", &Split::split_id)
        .def_readonly("seen_classes", &Split::seen_classes)
        .def_readonly("unseen_classes", &Split::unseen_classes);
    m.def("load_dataset", &load_dataset, py::arg("features"), py::arg("labels"), py::arg("attributes"));
    m.def("read_matrix", &read_matrix, py::arg("path"));
    m.def("write_matrix", &write_matrix, py::arg("path"), py::arg("matrix"));
    m.def("generate_splits", &generate_splits, py::arg("n_classes"), py::arg("n_seen"), py::arg("n_splits"), py::arg("seed"));
    m.def("planted_world",
          [](std::uint64_t seed) {
              auto [data, truth] = generate_synthetic(SyntheticWorldSpec::planted(seed));
              return py::make_tuple(std::move(data), std::move(truth));
          },
          py::arg("seed") = 7, "The 25-class planted world and its true class gaussians");

    // metrics
    m.def("mean_class_accuracy",
          [](const std::vector<ClassId>& p, const std::vector<ClassId>& t, const std::vector<ClassId>& c) {
              return mean_class_accuracy(p, t, c);
          },
          py::arg("predictions"), py::arg("truth"), py::arg("classes"));
    m.def("harmonic_mean_gzsl", &harmonic_mean_gzsl, py::arg("seen_acc"), py::arg("unseen_acc"));

    // pipelines, default rbf kernel with the median bandwidth
    m.def("run_inductive",
          [](const Dataset& d, const Split& s, const HyperParams& h) { return outcome_dict(run_inductive(d, s, MapConfig{}, h)); },
          py::arg("dataset"), py::arg("split"), py::arg("hyper") = HyperParams{});
    m.def("run_transductive",
          [](const Dataset& d, const Split& s, const HyperParams& h) {
              return outcome_dict(run_transductive(d, s, MapConfig{}, h, EmConfig{}));
          },
          py::arg("dataset"), py::arg("split"), py::arg("hyper") = HyperParams{});
    m.def("run_few_shot",
          [](const Dataset& d, const Split& s, int shots, std::uint64_t seed, int reserve, const HyperParams& h) {
              return outcome_dict(run_few_shot(d, s, MapConfig{}, h, shots, seed, reserve));
          },
          py::arg("dataset"), py::arg("split"), py::arg("shots"), py::arg("seed"), py::arg("reserve") = 0,
          py::arg("hyper") = HyperParams{});
    m.def("run_gzsl",
          [](const Dataset& d, const Split& s, int synth_count, std::uint64_t seed, const HyperParams& h) {
              GzslConfig cfg;
              cfg.synth_count = synth_count;
              cfg.seed = seed;
              const auto r = run_gzsl(d, s, MapConfig{}, h, cfg).result;
              py::dict out;
              out["seen_acc"] = *r.seen_acc;
              out["unseen_acc"] = r.unseen_acc;
              out["harmonic_mean"] = *r.harmonic_mean;
              return out;
          },
          py::arg("dataset"), py::arg("split"), py::arg("synth_count") = 200, py::arg("seed") = 0,
          py::arg("hyper") = HyperParams{});
}
