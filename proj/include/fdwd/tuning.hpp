#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fdwd/curves.hpp"
#include "fdwd/mm_solver.hpp"
#include "fdwd/sobolev.hpp"

namespace fdwd {

struct TuningGrid {
    std::vector<double> q_values{0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> lambda_values{1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
    int folds = 5;

    void validate(Eigen::Index n) const;
};

// Everything in the block form of A_{q,lambda} that does not depend on
// (q, lambda):
//   A = [ B  C^T ]    B = U^T U,  C = R U,  U = (1 | S | Z)
//       [ C  D   ]    D = RR + kappa R = Q (Lambda^2 + kappa Lambda) Q^T
struct FastFactors {
    Eigen::MatrixXd U;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd Q;
    Eigen::VectorXd eigvals;
    // Q^T C, the coupling block in eigen-coordinates.
    Eigen::MatrixXd QtC;
    bool B_singular = false;
    // Kept for the dense fallback when B is singular.
    std::shared_ptr<const KernelSystem> sys;
    Eigen::MatrixXd Z;

    Eigen::Index n() const noexcept { return C.rows(); }
    Eigen::Index head() const noexcept { return B.rows(); }
};

FastFactors build_factors(const KernelSystem& sys, const Eigen::MatrixXd& z);

// Diagonal Pi_{q,lambda} = Lambda^2 + (2nq lambda/(q+1)^2) Lambda.
Eigen::VectorXd pi_diagonal(const FastFactors& factors, double q, double lambda);

// A_{q,lambda}^{-1} by the block inverse, with the Schur complement of B
// expanded by Sherman-Morrison-Woodbury and D^{-1} = Q Pi^{-1} Q^T. Zero
// eigenvalues of R are dropped (pseudo-inverse on range(R)). The same
// diagonal ridge as the dense solve is applied, so on range(R) both invert
// the identical matrix.
class FastInverse final : public StepSolver {
public:
    FastInverse(const FastFactors& factors, double q, double lambda, double ridge_scale = 1e-10);
    Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override;
    Eigen::VectorXd apply_inverse_extended(const VectorXld& v) const override;

    const Eigen::VectorXd& pi() const noexcept { return pi_; }
    double ridge() const noexcept { return ridge_; }
    bool used_dense_fallback() const noexcept { return dense_ != nullptr; }

private:
    const FastFactors* f_;
    Eigen::VectorXd pi_;
    double ridge_ = 0.0;
    Eigen::LDLT<Eigen::MatrixXd> b_ldlt_;
    Eigen::VectorXd pi_pinv_;
    Eigen::MatrixXd g_;  // Pi^+ Q^T C
    Eigen::LDLT<Eigen::MatrixXd> woodbury_;
    std::unique_ptr<DenseStepSolver> dense_;
};

Eigen::VectorXd fast_apply_inverse(const FastFactors& factors, double q, double lambda, const Eigen::VectorXd& v);

// Stratified k-fold partition from a seeded shuffle of each class.
std::vector<std::vector<Eigen::Index>> stratified_folds(const Eigen::VectorXd& labels, int folds,
                                                        std::uint64_t seed);

struct CvResult {
    std::vector<double> q_values;
    std::vector<double> lambda_values;
    Eigen::MatrixXd error_surface;            // rows q, cols lambda
    std::vector<Eigen::MatrixXd> fold_errors;  // one surface per fold
    std::vector<std::vector<Eigen::Index>> folds;
    double best_q = 0.0;
    double best_lambda = 0.0;
    double best_error = 1.0;
};

// Picks the surface minimum; ties go to the smallest lambda, then smallest q.
void select_best(CvResult& result);

struct CvOptions {
    bool fast_path = true;
    // Start each lambda from the solution at the previous (larger) lambda.
    bool warm_start = true;
};

// Scalar covariates are standardized inside every training fold.
CvResult cross_validate(const LabeledDataset& data, const TuningGrid& grid, const SolverConfig& base,
                        std::uint64_t seed, const CvOptions& options = {});

}  // namespace fdwd
