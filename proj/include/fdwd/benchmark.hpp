#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdwd/datagen.hpp"
#include "fdwd/tuning.hpp"

namespace fdwd {

struct BenchmarkConfig {
    int scenario = 2;
    // Whether the true discriminant depends on the scalar covariates.
    bool with_scalars = false;
    // Whether the classifier sees them (PLfDWD); defaults to with_scalars.
    std::optional<bool> use_scalars;
    Eigen::Index n_train = 100;
    Eigen::Index n_test = 500;
    int replications = 50;
    TuningGrid grid;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::size_t bayes_mc_samples = 1'000'000;
    TruncationReading truncation = TruncationReading::ParentMoments;
    int max_iter = 2000;
    double tol = 1e-8;

    bool uses_scalars() const noexcept { return use_scalars.value_or(with_scalars); }
    std::string method() const { return uses_scalars() ? "PLfDWD" : "fDWD"; }
    void validate() const;
};

struct ReplicationResult {
    int index = 0;
    double test_error = 0.0;
    // Expected test error of the fitted rule given the test covariates, from the true eta.
    double conditional_risk = 0.0;
    // Bayes risk on the same test covariates.
    double test_bayes_risk = 0.0;
    double best_q = 0.0;
    double best_lambda = 0.0;
    double cv_error = 0.0;
    int iterations = 0;
    bool converged = false;
    // Set when fitting raised a solver error; the replication is excluded from the summary.
    bool failed = false;
    std::string failure;
    double seconds = 0.0;
};

struct BenchmarkReport {
    BenchmarkConfig config;
    std::vector<ReplicationResult> replications;
    double mean_error = 0.0;
    // Sample SD of the per-replication errors, and SD / sqrt(B).
    double sd_error = 0.0;
    double se_mean = 0.0;
    int failed_replications = 0;
    BayesErrorEstimate bayes;
    double total_seconds = 0.0;
};

ReplicationResult run_replication(const BenchmarkConfig& cfg, int index);
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg);

// Deterministic unless include_timing is set.
std::string report_to_json(const BenchmarkReport& report, bool include_timing = false);
std::string report_to_table(const BenchmarkReport& report);

}  // namespace fdwd
