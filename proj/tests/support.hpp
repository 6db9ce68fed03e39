#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fdwd/curves.hpp"

namespace fdwd::support {

// Smooth random curves: a few random Fourier terms plus a linear trend.
inline Eigen::MatrixXd smooth_curves(const Grid& grid, Eigen::Index n, std::mt19937_64& rng, int terms = 4) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> a(static_cast<std::size_t>(2 * terms + 2));
        for (auto& v : a) v = nd(rng);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double t = grid.points()[k];
            double v = a[0] + a[1] * t;
            for (int j = 1; j <= terms; ++j) {
                v += (a[static_cast<std::size_t>(2 * j)] * std::sin(j * M_PI * t) +
                      a[static_cast<std::size_t>(2 * j + 1)] * std::cos(j * M_PI * t)) / j;
            }
            x(i, static_cast<Eigen::Index>(k)) = v;
        }
    }
    return x;
}

inline Eigen::VectorXd random_labels(Eigen::Index n, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(0.5);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = coin(rng) ? 1.0 : -1.0;
    y[0] = 1.0;
    if (n > 1) y[1] = -1.0;
    return y;
}

inline Eigen::MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd z(rows, cols);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = nd(rng);
    return z;
}

// Labels that depend on the curves through a smooth linear functional, so the
// problem has signal.
inline LabeledDataset random_dataset(Eigen::Index n, std::size_t m, Eigen::Index p, std::uint64_t seed,
                                     double noise = 1.0) {
    std::mt19937_64 rng(seed);
    GridPtr grid = uniform_grid(m);
    Eigen::MatrixXd x = smooth_curves(*grid, n, rng);
    Eigen::MatrixXd z = random_normal(n, p, rng);
    std::normal_distribution<double> nd;
    Eigen::VectorXd y(n);
    const auto w = grid->weights_vec();
    for (Eigen::Index i = 0; i < n; ++i) {
        double f = 0.0;
        for (Eigen::Index k = 0; k < x.cols(); ++k) f += w[k] * x(i, k) * std::sin(M_PI * grid->points()[static_cast<std::size_t>(k)]);
        for (Eigen::Index j = 0; j < p; ++j) f += 0.5 * z(i, j);
        y[i] = f + noise * nd(rng) >= 0.0 ? 1.0 : -1.0;
    }
    y[0] = 1.0;
    y[1] = -1.0;
    return {grid, std::move(x), std::move(y), std::move(z)};
}

}  // namespace fdwd::support
