#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdwd/benchmark.hpp"
#include "fdwd/cli.hpp"
#include "fdwd/datagen.hpp"
#include "fdwd/errors.hpp"
#include "fdwd/loss.hpp"
#include "fdwd/model.hpp"
#include "fdwd/sobolev.hpp"
#include "fdwd/tuning.hpp"

namespace py = pybind11;
using namespace fdwd;

namespace {

GridPtr to_grid(const std::vector<double>& points) { return make_grid(rescale_to_unit(points)); }

LabeledDataset to_dataset(const std::vector<double>& grid, const Eigen::MatrixXd& curves,
                          const Eigen::VectorXd& labels, const std::optional<Eigen::MatrixXd>& scalars) {
    return {to_grid(grid), curves, labels, scalars.value_or(Eigen::MatrixXd())};
}

TruncationReading truncation_from(const std::string& s) {
    if (s == "parent") return TruncationReading::ParentMoments;
    if (s == "truncated") return TruncationReading::TruncatedMoments;
    throw ValidationError("truncation must be 'parent' or 'truncated'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Functional distance-weighted discrimination";

    static py::exception<Error> base_exc(m, "FdwdError");
    static py::exception<IoError> io_exc(m, "IoError", base_exc.ptr());
    static py::exception<ValidationError> val_exc(m, "ValidationError", base_exc.ptr());
    static py::exception<SolverSingular> solver_exc(m, "SolverError", base_exc.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const IoError& e) {
            py::set_error(io_exc, e.what());
        } catch (const ValidationError& e) {
            py::set_error(val_exc, e.what());
        } catch (const SolverSingular& e) {
            py::set_error(solver_exc, e.what());
        } catch (const Error& e) {
            py::set_error(base_exc, e.what());
        }
    });

    m.def("vq", [](double u, double q) { return vq(u, LossParam(q)); }, py::arg("u"), py::arg("q"));
    m.def("vq_grad", [](double u, double q) { return vq_grad(u, LossParam(q)); }, py::arg("u"), py::arg("q"));
    m.def("hinge", &hinge, py::arg("u"));
    m.def("kernel", &kernel, py::arg("s"), py::arg("t"));
    m.def("gram", [](const std::vector<double>& grid, const Eigen::MatrixXd& curves) {
        return compute_R(GridKernel(to_grid(grid)), curves);
    }, py::arg("grid"), py::arg("curves"));

    py::class_<DwdModel>(m, "Model")
        .def_property_readonly("q", &DwdModel::q)
        .def_property_readonly("lam", &DwdModel::lambda)
        .def_property_readonly("alpha", &DwdModel::alpha)
        .def_property_readonly("d", [](const DwdModel& md) { return Eigen::VectorXd(md.d()); })
        .def_property_readonly("gamma", &DwdModel::gamma)
        .def_property_readonly("c", &DwdModel::c)
        .def_property_readonly("iterations", [](const DwdModel& md) { return md.diagnostics().iterations; })
        .def_property_readonly("objective", [](const DwdModel& md) { return md.diagnostics().objective; })
        .def_property_readonly("converged", [](const DwdModel& md) { return md.diagnostics().converged; })
        .def("beta", &DwdModel::beta_eval, py::arg("t"))
        .def("decision_scores",
             [](const DwdModel& md, const std::vector<double>& grid, const Eigen::MatrixXd& curves,
                const std::optional<Eigen::MatrixXd>& scalars) {
                 return md.decision_scores(to_grid(grid), curves, scalars.value_or(Eigen::MatrixXd()));
             },
             py::arg("grid"), py::arg("curves"), py::arg("scalars") = py::none())
        .def("save", [](const DwdModel& md, const std::string& path) { save_file(md, path); }, py::arg("path"))
        .def("to_json", [](const DwdModel& md) {
            std::ostringstream os;
            save(md, os);
            return os.str();
        })
        .def_static("load", &load_file, py::arg("path"));

    m.def("fit",
          [](const std::vector<double>& grid, const Eigen::MatrixXd& curves, const Eigen::VectorXd& labels, double q,
             double lam, const std::optional<Eigen::MatrixXd>& scalars, int max_iter, double tol) {
              FitOptions opts;
              opts.max_iter = max_iter;
              opts.tol = tol;
              return fit(to_dataset(grid, curves, labels, scalars), q, lam, opts);
          },
          py::arg("grid"), py::arg("curves"), py::arg("labels"), py::arg("q") = 1.0, py::arg("lam") = 1e-4,
          py::arg("scalars") = py::none(), py::arg("max_iter") = 2000, py::arg("tol") = 1e-8);

    m.def("cross_validate",
          [](const std::vector<double>& grid, const Eigen::MatrixXd& curves, const Eigen::VectorXd& labels,
             std::uint64_t seed, const std::optional<Eigen::MatrixXd>& scalars,
             const std::optional<std::vector<double>>& q_values,
             const std::optional<std::vector<double>>& lambda_values, int folds) {
              TuningGrid tg;
              if (q_values) tg.q_values = *q_values;
              if (lambda_values) tg.lambda_values = *lambda_values;
              tg.folds = folds;
              const CvResult cv = cross_validate(to_dataset(grid, curves, labels, scalars), tg, SolverConfig{}, seed);
              py::dict out;
              out["q_values"] = cv.q_values;
              out["lambda_values"] = cv.lambda_values;
              out["error_surface"] = cv.error_surface;
              out["best_q"] = cv.best_q;
              out["best_lambda"] = cv.best_lambda;
              out["best_error"] = cv.best_error;
              return out;
          },
          py::arg("grid"), py::arg("curves"), py::arg("labels"), py::arg("seed"), py::arg("scalars") = py::none(),
          py::arg("q_values") = py::none(), py::arg("lambda_values") = py::none(), py::arg("folds") = 5);

    m.def("simulate",
          [](int scenario, Eigen::Index n, std::uint64_t seed, bool with_scalars, std::size_t grid_points,
             const std::string& truncation) {
              ScenarioSpec spec;
              spec.scenario = scenario;
              spec.n = n;
              spec.seed = seed;
              spec.with_scalars = with_scalars;
              spec.grid_points = grid_points;
              spec.truncation = truncation_from(truncation);
              const GeneratedData g = generate(spec);
              py::dict out;
              out["grid"] = g.data.grid()->points();
              out["curves"] = g.data.curves();
              out["labels"] = g.data.labels();
              out["scalars"] = g.data.scalars();
              out["discriminant"] = g.discriminant;
              return out;
          },
          py::arg("scenario"), py::arg("n"), py::arg("seed"), py::arg("with_scalars") = false,
          py::arg("grid_points") = 50, py::arg("truncation") = "parent");

    m.def("bayes_error",
          [](int scenario, bool with_scalars, std::size_t samples, std::uint64_t seed, const std::string& truncation) {
              ScenarioSpec spec;
              spec.scenario = scenario;
              spec.with_scalars = with_scalars;
              spec.seed = seed;
              spec.truncation = truncation_from(truncation);
              const BayesErrorEstimate b = bayes_error(spec, samples);
              return py::make_tuple(b.value, b.standard_error);
          },
          py::arg("scenario"), py::arg("with_scalars"), py::arg("samples") = 1'000'000, py::arg("seed") = 0,
          py::arg("truncation") = "parent");

    m.def("benchmark_json",
          [](int scenario, bool with_scalars, std::uint64_t seed, int replications, Eigen::Index n_train,
             Eigen::Index n_test, std::size_t bayes_samples, const std::optional<std::vector<double>>& q_values,
             const std::optional<std::vector<double>>& lambda_values, int folds, int jobs) {
              BenchmarkConfig cfg;
              cfg.scenario = scenario;
              cfg.with_scalars = with_scalars;
              cfg.seed = seed;
              cfg.replications = replications;
              cfg.n_train = n_train;
              cfg.n_test = n_test;
              cfg.bayes_mc_samples = bayes_samples;
              if (q_values) cfg.grid.q_values = *q_values;
              if (lambda_values) cfg.grid.lambda_values = *lambda_values;
              cfg.grid.folds = folds;
              cfg.jobs = jobs;
              BenchmarkReport report;
              {
                  py::gil_scoped_release release;
                  report = run_benchmark(cfg);
              }
              return report_to_json(report);
          },
          py::arg("scenario"), py::arg("with_scalars"), py::arg("seed"), py::arg("replications") = 50,
          py::arg("n_train") = 100, py::arg("n_test") = 500, py::arg("bayes_samples") = 1'000'000,
          py::arg("q_values") = py::none(), py::arg("lambda_values") = py::none(), py::arg("folds") = 5,
          py::arg("jobs") = 1);

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"fdwd"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));
}
