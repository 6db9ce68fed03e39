#include "fdwd/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "json.hpp"

#include "fdwd/errors.hpp"
#include "fdwd/model.hpp"
#include "fdwd/util.hpp"

namespace fdwd {

using nlohmann::json;

void BenchmarkConfig::validate() const {
    if (scenario != 1 && scenario != 2) throw ValidationError("scenario must be 1 or 2");
    if (replications < 1) throw ValidationError("replications must be at least 1");
    if (n_test < 1) throw ValidationError("n_test must be at least 1");
    if (n_train < 2) throw ValidationError("n_train must be at least 2");
    if (jobs < 1) throw ValidationError("jobs must be at least 1");
    if (bayes_mc_samples < 10000) throw ValidationError("bayes_mc_samples must be at least 10^4");
    if (uses_scalars() && !with_scalars) throw ValidationError("cannot use scalar covariates that are not generated");
    grid.validate(n_train);
}

ReplicationResult run_replication(const BenchmarkConfig& cfg, int index) {
    const auto start = std::chrono::steady_clock::now();
    const auto rep = static_cast<std::uint64_t>(index);

    ScenarioSpec spec;
    spec.scenario = cfg.scenario;
    spec.with_scalars = cfg.with_scalars;
    spec.truncation = cfg.truncation;
    spec.n = cfg.n_train;
    spec.seed = derive_seed(cfg.seed, rep, 1);
    const GeneratedData train = generate(spec);
    spec.n = cfg.n_test;
    spec.seed = derive_seed(cfg.seed, rep, 2);
    const GeneratedData test = generate(spec);

    const LabeledDataset train_data = cfg.uses_scalars() ? train.data : train.data.without_scalars();
    SolverConfig base;
    base.max_iter = cfg.max_iter;
    base.tol = cfg.tol;
    const CvResult cv = cross_validate(train_data, cfg.grid, base, derive_seed(cfg.seed, rep, 3));

    FitOptions opts;
    opts.max_iter = cfg.max_iter;
    opts.tol = cfg.tol;
    const DwdModel model = fit(train_data, cv.best_q, cv.best_lambda, opts);
    const Eigen::MatrixXd test_z = cfg.uses_scalars() ? test.data.scalars() : Eigen::MatrixXd();
    const Eigen::VectorXd scores = model.decision_scores(test.data.grid(), test.data.curves(), test_z);

    ReplicationResult r;
    r.index = index;
    const Eigen::Index nt = scores.size();
    int wrong = 0;
    double risk = 0.0;
    double bayes = 0.0;
    for (Eigen::Index i = 0; i < nt; ++i) {
        const double pred = scores[i] >= 0.0 ? 1.0 : -1.0;
        wrong += pred != test.data.labels()[i] ? 1 : 0;
        const double eta = logistic(test.discriminant[i]);
        risk += pred > 0 ? 1.0 - eta : eta;
        bayes += std::min(eta, 1.0 - eta);
    }
    r.test_error = static_cast<double>(wrong) / static_cast<double>(nt);
    r.conditional_risk = risk / static_cast<double>(nt);
    r.test_bayes_risk = bayes / static_cast<double>(nt);
    r.best_q = cv.best_q;
    r.best_lambda = cv.best_lambda;
    r.cv_error = cv.best_error;
    r.iterations = model.diagnostics().iterations;
    r.converged = model.diagnostics().converged;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    BenchmarkReport report;
    report.config = cfg;
    report.replications.resize(static_cast<std::size_t>(cfg.replications));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        while (!failed.load()) {
            const int k = next.fetch_add(1);
            if (k >= cfg.replications) return;
            auto& slot = report.replications[static_cast<std::size_t>(k)];
            try {
                slot = run_replication(cfg, k);
            } catch (const SolverSingular& e) {
                slot = ReplicationResult{};
                slot.index = k;
                slot.failed = true;
                slot.failure = e.what();
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    const int workers = std::min(cfg.jobs, cfg.replications);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> errors;
    for (const auto& r : report.replications) {
        if (r.failed) {
            ++report.failed_replications;
        } else {
            errors.push_back(r.test_error);
        }
    }
    if (errors.empty()) throw SolverSingular("every benchmark replication failed");
    const auto b = static_cast<double>(errors.size());
    double sum = 0.0;
    for (double e : errors) sum += e;
    report.mean_error = sum / b;
    double ss = 0.0;
    for (double e : errors) ss += (e - report.mean_error) * (e - report.mean_error);
    report.sd_error = errors.size() > 1 ? std::sqrt(ss / (b - 1.0)) : 0.0;
    report.se_mean = report.sd_error / std::sqrt(b);

    ScenarioSpec spec;
    spec.scenario = cfg.scenario;
    spec.with_scalars = cfg.with_scalars;
    spec.truncation = cfg.truncation;
    spec.seed = derive_seed(cfg.seed, 0xba7e5);
    report.bayes = bayes_error(spec, cfg.bayes_mc_samples);
    report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_to_json(const BenchmarkReport& report, bool include_timing) {
    const BenchmarkConfig& c = report.config;
    json j;
    j["format"] = "fdwd-benchmark-report";
    j["format_version"] = 1;
    j["config"] = {
        {"scenario", c.scenario},
        {"with_scalars", c.with_scalars},
        {"use_scalars", c.uses_scalars()},
        {"method", c.method()},
        {"n_train", c.n_train},
        {"n_test", c.n_test},
        {"replications", c.replications},
        {"seed", c.seed},
        {"bayes_mc_samples", c.bayes_mc_samples},
        {"truncation", c.truncation == TruncationReading::ParentMoments ? "parent" : "truncated"},
        {"max_iter", c.max_iter},
        {"tol", c.tol},
        {"grid", {{"q_values", c.grid.q_values}, {"lambda_values", c.grid.lambda_values}, {"folds", c.grid.folds}}},
    };
    json reps = json::array();
    for (const auto& r : report.replications) {
        json e = {{"index", r.index},
                  {"test_error", r.test_error},
                  {"conditional_risk", r.conditional_risk},
                  {"test_bayes_risk", r.test_bayes_risk},
                  {"best_q", r.best_q},
                  {"best_lambda", r.best_lambda},
                  {"cv_error", r.cv_error},
                  {"iterations", r.iterations},
                  {"converged", r.converged},
                  {"failed", r.failed}};
        if (r.failed) e["failure"] = r.failure;
        if (include_timing) e["seconds"] = r.seconds;
        reps.push_back(std::move(e));
    }
    j["replications"] = std::move(reps);
    j["summary"] = {{"mean_error", report.mean_error},
                    {"sd_across_replications", report.sd_error},
                    {"se_of_mean", report.se_mean},
                    {"failed_replications", report.failed_replications},
                    {"bayes_error", report.bayes.value},
                    {"bayes_error_se", report.bayes.standard_error}};
    if (include_timing) {
        double mean_rep = 0.0;
        for (const auto& r : report.replications) mean_rep += r.seconds;
        mean_rep /= static_cast<double>(std::max<std::size_t>(1, report.replications.size()));
        j["timing"] = {{"total_seconds", report.total_seconds}, {"mean_replication_seconds", mean_rep}};
    }
    return j.dump(2) + "\n";
}

std::string report_to_table(const BenchmarkReport& report) {
    const BenchmarkConfig& c = report.config;
    char line[256];
    std::string out;
    std::snprintf(line, sizeof line, "Scenario %d, %s, B = %d replications, n_test = %ld\n", c.scenario,
                  c.method().c_str(), c.replications, static_cast<long>(c.n_test));
    out += line;
    out += "  n    z     method   error%  (sd%)   se%    bayes%\n";
    std::snprintf(line, sizeof line, "  %-4ld %-5s %-8s %6.1f (%4.1f)  %5.2f  %6.1f\n", static_cast<long>(c.n_train),
                  c.with_scalars ? "Yes" : "No", c.method().c_str(), 100.0 * report.mean_error,
                  100.0 * report.sd_error, 100.0 * report.se_mean, 100.0 * report.bayes.value);
    out += line;
    return out;
}

}  // namespace fdwd
