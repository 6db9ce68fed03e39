#pragma once

#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "fdwd/curves.hpp"
#include "fdwd/loss.hpp"
#include "fdwd/sobolev.hpp"

namespace fdwd {

using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct SolverConfig {
    LossParam loss{1.0};
    double lambda = 1e-4;
    int max_iter = 2000;
    double tol = 1e-8;
    // Diagonal added to A before factorization, relative to trace(A)/dim(A).
    double ridge_scale = 1e-10;
    // Momentum extrapolation between MM steps, with a monotone restart.
    bool accelerate = true;

    void validate() const;
};

// Coefficients theta = (alpha, d, gamma, c) plus bookkeeping.
struct SolverState {
    double alpha = 0.0;
    Eigen::Vector2d d = Eigen::Vector2d::Zero();
    Eigen::VectorXd gamma;
    Eigen::VectorXd c;
    double objective = 0.0;
    int iteration = 0;
    bool converged = false;

    static SolverState zeros(Eigen::Index n, Eigen::Index p);

    Eigen::Index head_size() const noexcept { return 3 + gamma.size(); }
    Eigen::Index dim() const noexcept { return head_size() + c.size(); }

    // Stacked (alpha, d1, d2, gamma, c).
    Eigen::VectorXd pack() const;
    void unpack(const Eigen::Ref<const Eigen::VectorXd>& theta);
};

// Center/scale of scalar covariates from training statistics; columns with
// zero spread keep scale 1.
struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardization fit(const Eigen::MatrixXd& z);
    static Standardization identity(Eigen::Index p);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& z) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& z) const;
    Eigen::Index size() const noexcept { return mean.size(); }
};

// (1 | S | Z): the unpenalized columns of the linear predictor.
Eigen::MatrixXd unpenalized_design(const KernelSystem& sys, const Eigen::MatrixXd& z);

// alpha + S_i d + Z_i gamma + R_i c for every training subject.
Eigen::VectorXd margins(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data);

// D = n^-1 sum V_q(y_i f_i) + lambda c^T R c
double objective(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                 const SolverConfig& cfg);

// Gradient of D stacked as (1^T r, S^T r, Z^T r, R r + 2 lambda R c),
// accumulated in long double; gradient_vector rounds it.
VectorXld gradient_extended(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                            const SolverConfig& cfg);
Eigen::VectorXd gradient_vector(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                                const SolverConfig& cfg);

// A_{q,lambda} over blocks (1, S, Z, R); lower-right block RR + (2nq lambda/(q+1)^2) R.
Eigen::MatrixXd assemble_A(const KernelSystem& sys, const Eigen::MatrixXd& z, const SolverConfig& cfg,
                           bool with_ridge = true);

double ridge_value(const Eigen::MatrixXd& a_unridged, const SolverConfig& cfg);

// Quadratic majorizer M(theta | anchor) of D built from the curvature bound.
double majorizer(const SolverState& theta, const SolverState& anchor, const KernelSystem& sys,
                 const LabeledDataset& data, const SolverConfig& cfg);

// Backend computing A^{-1} v for a fixed (sys, Z, q, lambda).
class StepSolver {
public:
    virtual ~StepSolver() = default;
    virtual Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const = 0;
    // Right-hand side in extended precision; by default rounded first.
    virtual Eigen::VectorXd apply_inverse_extended(const VectorXld& v) const {
        return apply_inverse(Eigen::VectorXd(v.cast<double>()));
    }
};

// Cholesky factorization of the ridged dense A, with one step of iterative
// refinement whose residual is accumulated in extended precision.
class DenseStepSolver final : public StepSolver {
public:
    DenseStepSolver(const KernelSystem& sys, const Eigen::MatrixXd& z, const SolverConfig& cfg);
    Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override;
    Eigen::VectorXd apply_inverse_extended(const VectorXld& v) const override;

private:
    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> a_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Minimizer of M(. | state): theta - (nq/(q+1)^2) A^{-1} g.
SolverState mm_step(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                    const SolverConfig& cfg);
SolverState mm_step(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                    const SolverConfig& cfg, const StepSolver& backend);

using SolveObserver = std::function<void(const SolverState&)>;

// Iterates mm_step from init (zeros by default) until
// |D_k - D_{k+1}| / (1 + D_k) < tol or max_iter steps. The observer sees
// the initial state and every iterate.
SolverState solve(const KernelSystem& sys, const LabeledDataset& data, const SolverConfig& cfg,
                  std::optional<SolverState> init = std::nullopt, const StepSolver* backend = nullptr,
                  const SolveObserver& observer = {});

}  // namespace fdwd
