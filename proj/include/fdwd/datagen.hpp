#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "fdwd/curves.hpp"

namespace fdwd {

// How "truncated normal on (-2,2) with mean 0 and variance 1" is read.
enum class TruncationReading {
    ParentMoments,     // N(0,1) restricted to (-2,2)
    TruncatedMoments,  // parent scale chosen so the truncated variable has variance 1
};

inline constexpr int kBasisTerms = 50;
inline constexpr int kScalarCount = 2;

struct ScenarioSpec {
    int scenario = 1;
    Eigen::Index n = 100;
    bool with_scalars = false;
    std::size_t grid_points = 50;
    std::uint64_t seed = 0;
    TruncationReading truncation = TruncationReading::ParentMoments;

    // Overrides of the generating model, for degenerate/oracle checks.
    std::optional<double> alpha0_override;
    bool zero_beta = false;
    bool zero_gamma = false;

    void validate() const;
};

// phi_1 = 1, phi_j = sqrt(2) cos((j-1) pi t); j is 1-based.
double basis_function(int j, double t) noexcept;
// zeta_j = (-1)^(j+1) / j
double basis_scale(int j) noexcept;

// Coefficients of the generating model: f = alpha0 + sum_j xi_j zeta_j b_j + z^T gamma.
struct ScenarioTruth {
    double alpha0 = 0.1;
    Eigen::VectorXd beta_coef;  // b_j = ∫ beta phi_j, j = 1..50
    Eigen::Vector2d gamma = Eigen::Vector2d::Zero();
};

ScenarioTruth scenario_truth(const ScenarioSpec& spec);

// Projections of exp(-t) on phi_1..phi_50 by trapezoid quadrature at 10^4
// resolution (computed once).
const Eigen::VectorXd& exp_slope_coefficients();

double true_discriminant(const ScenarioTruth& truth, const Eigen::Ref<const Eigen::VectorXd>& xi,
                         const Eigen::Ref<const Eigen::VectorXd>& z);

inline double logistic(double f) noexcept { return 1.0 / (1.0 + std::exp(-f)); }

// Parent standard deviation used for the scalar covariates.
double truncated_parent_sd(TruncationReading reading);

double draw_truncated_normal(std::mt19937_64& rng, double parent_sd);
double draw_label(std::mt19937_64& rng, double discriminant);

struct GeneratedData {
    LabeledDataset data;             // scalars present iff spec.with_scalars
    Eigen::VectorXd discriminant;    // true f(X_i, z_i)
    Eigen::MatrixXd xi;              // n x 50 basis scores
    Eigen::MatrixXd z;               // n x 2 (zeros when without scalars)
};

GeneratedData generate(const ScenarioSpec& spec);

struct BayesErrorEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

// Monte Carlo E[min(eta, 1 - eta)], eta = logistic(f).
BayesErrorEstimate bayes_error(const ScenarioSpec& spec, std::size_t mc_samples);

}  // namespace fdwd
