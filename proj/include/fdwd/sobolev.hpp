#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "fdwd/curves.hpp"

namespace fdwd {

// Basis of the penalty null space {h : h'' = 0} of W^2_2[0,1].
struct NullSpaceBasis {
    static constexpr int dim = 2;
    static double psi1(double) noexcept { return 1.0; }
    static double psi2(double t) noexcept { return t - 0.5; }
};

// Scaled Bernoulli polynomials k2 = B2/2, k4 = B4/24 on [0,1].
double k2(double s) noexcept;
double k4(double s) noexcept;

// Reproducing kernel of the penalized component H1:
//   K(s,t) = k2(s) k2(t) - k4(|s - t|)
double kernel(double s, double t) noexcept;

// K evaluated once on every pair of grid points.
class GridKernel {
public:
    explicit GridKernel(GridPtr grid);

    const GridPtr& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& matrix() const noexcept { return k_; }

    // w ∘ x for each row of curves.
    Eigen::MatrixXd weighted(const Eigen::MatrixXd& curves) const;

private:
    GridPtr grid_;
    Eigen::MatrixXd k_;
};

// (Kf)(t) = ∫ K(t,s) f(s) ds by quadrature on f's grid.
std::function<double(double)> apply_kernel_operator(const SampledCurve& f);

Eigen::MatrixXd compute_S(const LabeledDataset& data);
Eigen::MatrixXd compute_S(const Grid& grid, const Eigen::MatrixXd& curves);

Eigen::MatrixXd compute_R(const LabeledDataset& data);
Eigen::MatrixXd compute_R(const GridKernel& kernel, const Eigen::MatrixXd& curves);

// r̃_j = ∬ x̃(t) K(t,s) x_j(s) ds dt against every stored training curve.
// new_curve is resampled onto the kernel grid when its grid differs.
Eigen::VectorXd cross_gram(const GridKernel& kernel, const Eigen::MatrixXd& train_curves,
                           const SampledCurve& new_curve);

struct SymmetricEigen {
    Eigen::MatrixXd vectors;  // columns, orthonormal
    Eigen::VectorXd values;   // descending
};

// Throws NotSymmetric when max|R - R^T| exceeds 1e-10 max|R|.
SymmetricEigen eigendecompose(const Eigen::MatrixXd& r);

// Number of eigendecompose calls made by this process.
std::size_t eigendecomposition_count() noexcept;

inline constexpr double kDefaultRankTol = 1e-12;

// S, R and the spectral factorization of R for one training sample.
struct KernelSystem {
    Eigen::MatrixXd S;
    Eigen::MatrixXd R;
    Eigen::MatrixXd Q;
    Eigen::VectorXd eigvals;
    double rank_tol = kDefaultRankTol;

    static KernelSystem build(const LabeledDataset& data, double rank_tol = kDefaultRankTol);
    static KernelSystem from_matrices(Eigen::MatrixXd s, Eigen::MatrixXd r, double rank_tol = kDefaultRankTol);

    // Sub-system on a subset of subjects; entries of S and R are per-subject
    // integrals, so they are copied rather than recomputed.
    KernelSystem subset(std::span<const Eigen::Index> rows) const;

    Eigen::Index size() const noexcept { return R.rows(); }
    double zero_threshold() const noexcept;
    Eigen::Index rank() const noexcept;
};

}  // namespace fdwd
