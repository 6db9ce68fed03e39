#include "fdwd/cli.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fdwd/benchmark.hpp"
#include "fdwd/datagen.hpp"
#include "fdwd/errors.hpp"
#include "fdwd/io.hpp"
#include "fdwd/loss.hpp"
#include "fdwd/model.hpp"
#include "fdwd/tuning.hpp"
#include "fdwd/util.hpp"

namespace fdwd::cli {

namespace {

struct InputFiles {
    std::string curves;
    std::string labels;
    std::string scalars;
};

LabeledDataset load_dataset(const InputFiles& in) {
    CurveTable table = read_curves_csv(in.curves);
    Eigen::VectorXd y = read_labels_csv(in.labels);
    if (y.size() != table.values.rows()) {
        throw InvalidData(in.labels + ": " + std::to_string(y.size()) + " labels for " +
                          std::to_string(table.values.rows()) + " curves");
    }
    Eigen::MatrixXd z;
    if (!in.scalars.empty()) {
        z = read_scalars_csv(in.scalars);
        if (z.rows() != table.values.rows()) {
            throw InvalidData(in.scalars + ": " + std::to_string(z.rows()) + " rows for " +
                              std::to_string(table.values.rows()) + " curves");
        }
    }
    return {table.grid, std::move(table.values), std::move(y), std::move(z)};
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        atomic_write(path, content);
    }
}

int training_errors(const DwdModel& model, const LabeledDataset& data) {
    const Eigen::VectorXd s = model.decision_scores(data.grid(), data.curves(), data.scalars());
    int wrong = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) wrong += (s[i] >= 0.0 ? 1.0 : -1.0) != data.labels()[i] ? 1 : 0;
    return wrong;
}

std::string surface_csv(const CvResult& cv) {
    std::string s = "q\\lambda";
    for (double l : cv.lambda_values) s += "," + format_double(l);
    s += '\n';
    for (std::size_t qi = 0; qi < cv.q_values.size(); ++qi) {
        s += format_double(cv.q_values[qi]);
        for (std::size_t li = 0; li < cv.lambda_values.size(); ++li) {
            s += "," + format_double(cv.error_surface(static_cast<Eigen::Index>(qi), static_cast<Eigen::Index>(li)));
        }
        s += '\n';
    }
    return s;
}

TruncationReading parse_truncation(const std::string& s) {
    return s == "truncated" ? TruncationReading::TruncatedMoments : TruncationReading::ParentMoments;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Functional distance-weighted discrimination"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // fit
    InputFiles fit_in;
    double fit_q = 1.0;
    double fit_lambda = 1e-4;
    std::string fit_out;
    int fit_max_iter = 2000;
    double fit_tol = 1e-8;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a classifier at fixed (q, lambda)");
    fit_cmd->add_option("--curves", fit_in.curves, "Curves CSV")->required();
    fit_cmd->add_option("--labels", fit_in.labels, "Labels CSV")->required();
    fit_cmd->add_option("--scalars", fit_in.scalars, "Scalar covariates CSV");
    fit_cmd->add_option("--q", fit_q, "Loss exponent q")->required();
    fit_cmd->add_option("--lambda", fit_lambda, "Penalty weight lambda")->required();
    fit_cmd->add_option("--out", fit_out, "Model file to write")->required();
    fit_cmd->add_option("--max-iter", fit_max_iter, "Maximum MM iterations");
    fit_cmd->add_option("--tol", fit_tol, "Relative objective change threshold");

    // predict
    std::string pred_model;
    InputFiles pred_in;
    std::string pred_out;
    auto* pred_cmd = app.add_subcommand("predict", "Score curves with a saved model");
    pred_cmd->add_option("--model", pred_model, "Model file")->required();
    pred_cmd->add_option("--curves", pred_in.curves, "Curves CSV")->required();
    pred_cmd->add_option("--scalars", pred_in.scalars, "Scalar covariates CSV");
    pred_cmd->add_option("--out", pred_out, "Predictions CSV")->required();

    // cv
    InputFiles cv_in;
    TuningGrid cv_grid;
    std::uint64_t cv_seed = 0;
    std::string cv_out;
    auto* cv_cmd = app.add_subcommand("cv", "Cross-validate (q, lambda)");
    cv_cmd->add_option("--curves", cv_in.curves, "Curves CSV")->required();
    cv_cmd->add_option("--labels", cv_in.labels, "Labels CSV")->required();
    cv_cmd->add_option("--scalars", cv_in.scalars, "Scalar covariates CSV");
    cv_cmd->add_option("--q-values", cv_grid.q_values, "Comma-separated q grid")->delimiter(',');
    cv_cmd->add_option("--lambda-values", cv_grid.lambda_values, "Comma-separated lambda grid")->delimiter(',');
    cv_cmd->add_option("--folds", cv_grid.folds, "Number of folds");
    cv_cmd->add_option("--seed", cv_seed, "Fold shuffle seed")->required();
    cv_cmd->add_option("--out", cv_out, "Error surface CSV (stdout if omitted)");

    // simulate
    ScenarioSpec sim;
    std::string sim_trunc = "parent";
    std::string sim_out;
    std::size_t sim_n = 100;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scenario");
    sim_cmd->add_option("--scenario", sim.scenario, "Scenario 1 or 2")->check(CLI::IsMember({1, 2}));
    sim_cmd->add_option("--n", sim_n, "Number of subjects");
    sim_cmd->add_flag("--with-scalars", sim.with_scalars, "Discriminant depends on two scalar covariates");
    sim_cmd->add_option("--grid-points", sim.grid_points, "Observation points on [0,1]");
    sim_cmd->add_option("--truncation", sim_trunc, "Truncated-normal reading: parent | truncated")
        ->check(CLI::IsMember({"parent", "truncated"}));
    sim_cmd->add_option("--seed", sim.seed, "Generator seed")->required();
    sim_cmd->add_option("--out", sim_out, "Output directory")->required();

    // benchmark
    BenchmarkConfig bench;
    std::string bench_method;
    std::string bench_trunc = "parent";
    std::string bench_out;
    bool bench_timing = false;
    auto* bench_cmd = app.add_subcommand("benchmark", "Repeated train/test simulation study");
    bench_cmd->add_option("--scenario", bench.scenario, "Scenario 1 or 2")->check(CLI::IsMember({1, 2}));
    bench_cmd->add_flag("--with-scalars", bench.with_scalars, "Discriminant depends on scalar covariates");
    bench_cmd->add_option("--method", bench_method, "fdwd | plfdwd (default: plfdwd iff --with-scalars)")
        ->check(CLI::IsMember({"fdwd", "plfdwd"}));
    bench_cmd->add_option("--n-train", bench.n_train, "Training sample size");
    bench_cmd->add_option("--n-test", bench.n_test, "Test sample size");
    bench_cmd->add_option("--replications", bench.replications, "Number of replications");
    bench_cmd->add_option("--q-values", bench.grid.q_values, "Comma-separated q grid")->delimiter(',');
    bench_cmd->add_option("--lambda-values", bench.grid.lambda_values, "Comma-separated lambda grid")->delimiter(',');
    bench_cmd->add_option("--folds", bench.grid.folds, "Number of folds");
    bench_cmd->add_option("--bayes-samples", bench.bayes_mc_samples, "Monte Carlo draws for the Bayes error");
    bench_cmd->add_option("--truncation", bench_trunc, "parent | truncated")->check(CLI::IsMember({"parent", "truncated"}));
    bench_cmd->add_option("--seed", bench.seed, "Master seed")->required();
    bench_cmd->add_option("--jobs", bench.jobs, "Worker threads");
    bench_cmd->add_option("--out", bench_out, "JSON report path (stdout if omitted)");
    bench_cmd->add_flag("--timing", bench_timing, "Include wall-clock fields in the JSON report");

    // plot-loss
    std::vector<double> loss_q{1.0};
    double u_min = -1.0;
    double u_max = 2.0;
    std::size_t u_points = 301;
    std::string loss_out;
    auto* loss_cmd = app.add_subcommand("plot-loss", "Tabulate V_q and the hinge loss");
    loss_cmd->add_option("--q", loss_q, "Comma-separated q values")->delimiter(',');
    loss_cmd->add_option("--u-min", u_min, "Smallest margin");
    loss_cmd->add_option("--u-max", u_max, "Largest margin");
    loss_cmd->add_option("--points", u_points, "Number of margins")->check(CLI::Range(2, 1000000));
    loss_cmd->add_option("--out", loss_out, "CSV path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "fdwd: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (fit_cmd->parsed()) {
            const LabeledDataset data = load_dataset(fit_in);
            FitOptions opts;
            opts.max_iter = fit_max_iter;
            opts.tol = fit_tol;
            const DwdModel model = fit(data, fit_q, fit_lambda, opts);
            if (!model.diagnostics().converged) log_warning("MM iterations reached --max-iter before converging");
            const int wrong = training_errors(model, data);
            save_file(model, fit_out);
            out << "n=" << data.size() << "\n"
                << "p=" << data.num_scalars() << "\n"
                << "iterations=" << model.diagnostics().iterations << "\n"
                << "converged=" << (model.diagnostics().converged ? "true" : "false") << "\n"
                << "objective=" << format_double(model.diagnostics().objective) << "\n"
                << "training_errors=" << wrong << "\n"
                << "training_error_rate=" << format_double(static_cast<double>(wrong) / static_cast<double>(data.size()))
                << "\n";
        } else if (pred_cmd->parsed()) {
            const DwdModel model = load_file(pred_model);
            const CurveTable table = read_curves_csv(pred_in.curves);
            Eigen::MatrixXd z;
            if (!pred_in.scalars.empty()) {
                z = read_scalars_csv(pred_in.scalars);
                if (z.rows() != table.values.rows()) {
                    throw CovariateMismatch(pred_in.scalars + ": " + std::to_string(z.rows()) + " rows for " +
                                            std::to_string(table.values.rows()) + " curves");
                }
            }
            const Eigen::VectorXd scores = model.decision_scores(table.grid, table.values, z);
            std::string csv = "index,score,label\n";
            for (Eigen::Index i = 0; i < scores.size(); ++i) {
                csv += std::to_string(i) + "," + format_double(scores[i]) + "," +
                       model.label_map().decode(scores[i] >= 0.0 ? 1 : -1) + "\n";
            }
            atomic_write(pred_out, csv);
        } else if (cv_cmd->parsed()) {
            const LabeledDataset data = load_dataset(cv_in);
            const CvResult cv = cross_validate(data, cv_grid, SolverConfig{}, cv_seed);
            emit(cv_out, surface_csv(cv), out);
            (cv_out.empty() || cv_out == "-" ? err : out)
                << "best_q=" << format_double(cv.best_q) << "\n"
                << "best_lambda=" << format_double(cv.best_lambda) << "\n"
                << "cv_error=" << format_double(cv.best_error) << "\n";
        } else if (sim_cmd->parsed()) {
            sim.n = static_cast<Eigen::Index>(sim_n);
            sim.truncation = parse_truncation(sim_trunc);
            const GeneratedData g = generate(sim);
            std::error_code ec;
            std::filesystem::create_directories(sim_out, ec);
            if (ec) throw IoError("cannot create output directory '" + sim_out + "'");
            const std::filesystem::path dir(sim_out);
            std::string truth = "index,discriminant\n";
            for (Eigen::Index i = 0; i < g.discriminant.size(); ++i) {
                truth += std::to_string(i) + "," + format_double(g.discriminant[i]) + "\n";
            }
            atomic_write((dir / "curves.csv").string(), curves_to_csv(*g.data.grid(), g.data.curves()));
            atomic_write((dir / "labels.csv").string(), labels_to_csv(g.data.labels()));
            if (sim.with_scalars) atomic_write((dir / "scalars.csv").string(), matrix_to_csv(g.data.scalars()));
            atomic_write((dir / "truth.csv").string(), truth);
            out << "wrote " << g.data.size() << " subjects to " << sim_out << "\n";
        } else if (bench_cmd->parsed()) {
            if (!bench_method.empty()) bench.use_scalars = bench_method == "plfdwd";
            bench.truncation = parse_truncation(bench_trunc);
            const BenchmarkReport report = run_benchmark(bench);
            const std::string js = report_to_json(report, bench_timing);
            if (bench_out.empty() || bench_out == "-") {
                out << js;
                err << report_to_table(report);
            } else {
                atomic_write(bench_out, js);
                out << report_to_table(report);
            }
        } else if (loss_cmd->parsed()) {
            std::vector<LossParam> params;
            for (double q : loss_q) params.emplace_back(q);
            const double span = static_cast<double>(u_points - 1);
            std::vector<double> us(u_points);
            for (std::size_t i = 0; i < u_points; ++i) {
                const auto k = static_cast<double>(i);
                us[i] = (u_min * (span - k) + u_max * k) / span;
            }
            std::string csv = "u";
            for (double q : loss_q) csv += ",V_q=" + format_double(q);
            csv += ",hinge\n";
            std::vector<std::vector<std::pair<double, double>>> cols;
            for (const auto& p : params) cols.push_back(loss_curve_samples(p, us));
            for (std::size_t i = 0; i < us.size(); ++i) {
                csv += format_double(us[i]);
                for (const auto& col : cols) csv += "," + format_double(col[i].second);
                csv += "," + format_double(hinge(us[i])) + "\n";
            }
            emit(loss_out, csv, out);
        }
    } catch (const IoError& e) {
        err << "fdwd: I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const ValidationError& e) {
        err << "fdwd: invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const SolverSingular& e) {
        err << "fdwd: solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const Error& e) {
        err << "fdwd: " << e.what() << '\n';
        return kValidation;
    }
    return kOk;
}

}  // namespace fdwd::cli
