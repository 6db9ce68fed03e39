#include "fdwd/datagen.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fdwd/errors.hpp"
#include "fdwd/util.hpp"

namespace fdwd {

namespace {

constexpr double kTruncBound = 2.0;

double sqrt3() { return std::sqrt(3.0); }

// Variance of N(0, sd^2) restricted to (-b, b).
double truncated_variance(double sd, double b) {
    const double a = b / sd;
    const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
    const double mass = std::erf(a / std::numbers::sqrt2);
    return sd * sd * (1.0 - 2.0 * a * pdf / mass);
}

void draw_subject(std::mt19937_64& rng, double parent_sd, bool with_scalars, Eigen::Ref<Eigen::VectorXd> xi,
                  Eigen::Ref<Eigen::VectorXd> z) {
    std::uniform_real_distribution<double> unif(-sqrt3(), sqrt3());
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi[j] = unif(rng);
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = with_scalars ? draw_truncated_normal(rng, parent_sd) : 0.0;
}

}  // namespace

void ScenarioSpec::validate() const {
    if (scenario != 1 && scenario != 2) throw ValidationError("scenario must be 1 or 2");
    if (n < 1) throw ValidationError("scenario sample size must be at least 1");
    if (grid_points < 3) throw ValidationError("need at least 3 grid points");
}

double basis_function(int j, double t) noexcept {
    if (j == 1) return 1.0;
    return std::numbers::sqrt2 * std::cos(static_cast<double>(j - 1) * std::numbers::pi * t);
}

double basis_scale(int j) noexcept { return (j % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(j); }

const Eigen::VectorXd& exp_slope_coefficients() {
    static const Eigen::VectorXd coef = [] {
        const GridPtr fine = uniform_grid(10001);
        const auto& pts = fine->points();
        const auto& w = fine->weights();
        Eigen::VectorXd b(kBasisTerms);
        for (int j = 1; j <= kBasisTerms; ++j) {
            double acc = 0.0;
            for (std::size_t a = 0; a < pts.size(); ++a) acc += w[a] * std::exp(-pts[a]) * basis_function(j, pts[a]);
            b[j - 1] = acc;
        }
        return b;
    }();
    return coef;
}

ScenarioTruth scenario_truth(const ScenarioSpec& spec) {
    spec.validate();
    ScenarioTruth t;
    if (spec.scenario == 1) {
        t.beta_coef = exp_slope_coefficients();
        if (spec.with_scalars) t.gamma = Eigen::Vector2d(-0.5, 1.0);
    } else {
        t.beta_coef.resize(kBasisTerms);
        for (int j = 1; j <= kBasisTerms; ++j) {
            t.beta_coef[j - 1] = 4.0 * (j % 2 == 1 ? 1.0 : -1.0) / (static_cast<double>(j) * j);
        }
        if (spec.with_scalars) t.gamma = Eigen::Vector2d(-2.0, 3.0);
    }
    if (spec.alpha0_override) t.alpha0 = *spec.alpha0_override;
    if (spec.zero_beta) t.beta_coef.setZero();
    if (spec.zero_gamma) t.gamma.setZero();
    return t;
}

double true_discriminant(const ScenarioTruth& truth, const Eigen::Ref<const Eigen::VectorXd>& xi,
                         const Eigen::Ref<const Eigen::VectorXd>& z) {
    double f = truth.alpha0;
    for (Eigen::Index j = 0; j < xi.size(); ++j) {
        f += xi[j] * basis_scale(static_cast<int>(j) + 1) * truth.beta_coef[j];
    }
    if (z.size() > 0) f += z.dot(truth.gamma);
    return f;
}

double truncated_parent_sd(TruncationReading reading) {
    if (reading == TruncationReading::ParentMoments) return 1.0;
    static const double sd = [] {
        double lo = 1.0;
        double hi = 50.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (truncated_variance(mid, kTruncBound) < 1.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }();
    return sd;
}

double draw_truncated_normal(std::mt19937_64& rng, double parent_sd) {
    std::normal_distribution<double> normal(0.0, parent_sd);
    while (true) {
        const double v = normal(rng);
        if (v > -kTruncBound && v < kTruncBound) return v;
    }
}

double draw_label(std::mt19937_64& rng, double discriminant) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < logistic(discriminant) ? 1.0 : -1.0;
}

GeneratedData generate(const ScenarioSpec& spec) {
    const ScenarioTruth truth = scenario_truth(spec);
    const GridPtr grid = uniform_grid(spec.grid_points);
    const auto m = static_cast<Eigen::Index>(grid->size());
    const double parent_sd = truncated_parent_sd(spec.truncation);

    // column j holds zeta_j phi_j on the grid
    Eigen::MatrixXd basis(m, kBasisTerms);
    for (Eigen::Index a = 0; a < m; ++a) {
        const double t = grid->points()[static_cast<std::size_t>(a)];
        for (int j = 1; j <= kBasisTerms; ++j) basis(a, j - 1) = basis_scale(j) * basis_function(j, t);
    }

    Eigen::MatrixXd xi(spec.n, kBasisTerms);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(spec.n, kScalarCount);
    Eigen::VectorXd f(spec.n);
    Eigen::VectorXd y(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
        Eigen::VectorXd xi_i(kBasisTerms);
        Eigen::VectorXd z_i(kScalarCount);
        draw_subject(rng, parent_sd, spec.with_scalars, xi_i, z_i);
        xi.row(i) = xi_i.transpose();
        z.row(i) = z_i.transpose();
        f[i] = true_discriminant(truth, xi_i, z_i);
        y[i] = draw_label(rng, f[i]);
    }
    Eigen::MatrixXd curves = xi * basis.transpose();
    Eigen::MatrixXd scalars = spec.with_scalars ? z : Eigen::MatrixXd();
    return {LabeledDataset(grid, std::move(curves), std::move(y), std::move(scalars)), std::move(f), std::move(xi),
            std::move(z)};
}

BayesErrorEstimate bayes_error(const ScenarioSpec& spec, std::size_t mc_samples) {
    if (mc_samples < 10000) throw ValidationError("bayes_error needs at least 10^4 Monte Carlo samples");
    const ScenarioTruth truth = scenario_truth(spec);
    const double parent_sd = truncated_parent_sd(spec.truncation);
    std::mt19937_64 rng(derive_seed(spec.seed, 0xbae5));
    Eigen::VectorXd xi(kBasisTerms);
    Eigen::VectorXd z(kScalarCount);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < mc_samples; ++s) {
        draw_subject(rng, parent_sd, spec.with_scalars, xi, z);
        const double eta = logistic(true_discriminant(truth, xi, z));
        const double loss = std::min(eta, 1.0 - eta);
        sum += loss;
        sum_sq += loss * loss;
    }
    const auto n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

}  // namespace fdwd
