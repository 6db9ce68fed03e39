#include "fdwd/mm_solver.hpp"

#include <cmath>
#include <string>

#include "fdwd/errors.hpp"

namespace fdwd {

namespace {

void check_shapes(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data) {
    const Eigen::Index n = data.size();
    if (sys.size() != n || sys.S.rows() != n) {
        throw ShapeError("kernel system has " + std::to_string(sys.size()) + " subjects, dataset has " +
                         std::to_string(n));
    }
    if (state.c.size() != n) {
        throw ShapeError("c has length " + std::to_string(state.c.size()) + ", expected " + std::to_string(n));
    }
    if (state.gamma.size() != data.num_scalars()) {
        throw ShapeError("gamma has length " + std::to_string(state.gamma.size()) + ", expected " +
                         std::to_string(data.num_scalars()));
    }
}

double majorizer_scale(const SolverConfig& cfg, Eigen::Index n) {
    return static_cast<double>(n) * cfg.loss.q() / ((cfg.loss.q() + 1.0) * (cfg.loss.q() + 1.0));
}

}  // namespace

void SolverConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive and finite");
    if (!(tol > 0.0)) throw ValidationError("tol must be positive");
    if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
    if (!(ridge_scale >= 0.0)) throw ValidationError("ridge_scale must be nonnegative");
}

SolverState SolverState::zeros(Eigen::Index n, Eigen::Index p) {
    SolverState s;
    s.gamma = Eigen::VectorXd::Zero(p);
    s.c = Eigen::VectorXd::Zero(n);
    return s;
}

Eigen::VectorXd SolverState::pack() const {
    Eigen::VectorXd theta(dim());
    theta[0] = alpha;
    theta.segment<2>(1) = d;
    theta.segment(3, gamma.size()) = gamma;
    theta.tail(c.size()) = c;
    return theta;
}

void SolverState::unpack(const Eigen::Ref<const Eigen::VectorXd>& theta) {
    if (theta.size() != dim()) throw ShapeError("parameter vector length mismatch");
    alpha = theta[0];
    d = theta.segment<2>(1);
    gamma = theta.segment(3, gamma.size());
    c = theta.tail(c.size());
}

Standardization Standardization::fit(const Eigen::MatrixXd& z) {
    Standardization s;
    const Eigen::Index p = z.cols();
    const auto n = static_cast<double>(z.rows());
    s.mean = Eigen::VectorXd::Zero(p);
    s.scale = Eigen::VectorXd::Ones(p);
    if (z.rows() == 0) return s;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mu = z.col(j).mean();
        const double ss = (z.col(j).array() - mu).square().sum();
        const double sd = z.rows() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        s.mean[j] = mu;
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Standardization Standardization::identity(Eigen::Index p) {
    return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p)};
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& z) const {
    if (z.cols() != size()) throw CovariateMismatch("expected " + std::to_string(size()) + " scalar covariates");
    return (z.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd Standardization::apply(const Eigen::VectorXd& z) const {
    if (z.size() != size()) throw CovariateMismatch("expected " + std::to_string(size()) + " scalar covariates");
    return (z - mean).cwiseQuotient(scale);
}

Eigen::MatrixXd unpenalized_design(const KernelSystem& sys, const Eigen::MatrixXd& z) {
    const Eigen::Index n = sys.size();
    if (z.rows() != n && z.cols() != 0) throw ShapeError("scalar block row count does not match subjects");
    Eigen::MatrixXd u(n, 3 + z.cols());
    u.col(0).setOnes();
    u.middleCols(1, 2) = sys.S;
    if (z.cols() > 0) u.rightCols(z.cols()) = z;
    return u;
}

Eigen::VectorXd margins(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data) {
    check_shapes(state, sys, data);
    Eigen::VectorXd f = sys.S * state.d + sys.R * state.c;
    f.array() += state.alpha;
    if (data.num_scalars() > 0) f += data.scalars() * state.gamma;
    return f;
}

double objective(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                 const SolverConfig& cfg) {
    const Eigen::VectorXd f = margins(state, sys, data);
    const Eigen::VectorXd& y = data.labels();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) loss += vq(y[i] * f[i], cfg.loss);
    const double penalty = state.c.dot(sys.R * state.c);
    return loss / static_cast<double>(f.size()) + cfg.lambda * penalty;
}

namespace {

long double vq_grad_extended(long double u, const LossParam& param) {
    if (u <= param.knot()) return -1.0L;
    const long double q = param.q();
    return -std::pow(q / ((q + 1.0L) * u), q + 1.0L);
}

// m x and m^T x accumulated in long double.
VectorXld product(const Eigen::MatrixXd& m, const VectorXld& x) {
    VectorXld out = VectorXld::Zero(m.rows());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] += static_cast<long double>(m(i, j)) * x[j];
    }
    return out;
}

VectorXld transposed_product(const Eigen::MatrixXd& m, const VectorXld& x) {
    VectorXld out(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        long double acc = 0.0L;
        for (Eigen::Index i = 0; i < m.rows(); ++i) acc += static_cast<long double>(m(i, j)) * x[i];
        out[j] = acc;
    }
    return out;
}

}  // namespace

VectorXld gradient_extended(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                            const SolverConfig& cfg) {
    check_shapes(state, sys, data);
    const Eigen::Index n = sys.size();
    const Eigen::Index p = data.num_scalars();
    const VectorXld c = state.c.cast<long double>();
    VectorXld f = product(sys.R, c) + product(sys.S, state.d.cast<long double>());
    f.array() += static_cast<long double>(state.alpha);
    if (p > 0) f += product(data.scalars(), state.gamma.cast<long double>());

    const Eigen::VectorXd& y = data.labels();
    VectorXld r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r[i] = y[i] * vq_grad_extended(y[i] * f[i], cfg.loss) / static_cast<long double>(n);
    }
    VectorXld g(3 + p + n);
    g[0] = r.sum();
    g.segment<2>(1) = transposed_product(sys.S, r);
    if (p > 0) g.segment(3, p) = transposed_product(data.scalars(), r);
    g.tail(n) = product(sys.R, r + 2.0L * static_cast<long double>(cfg.lambda) * c);
    return g;
}

Eigen::VectorXd gradient_vector(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                                const SolverConfig& cfg) {
    return gradient_extended(state, sys, data, cfg).cast<double>();
}

double ridge_value(const Eigen::MatrixXd& a_unridged, const SolverConfig& cfg) {
    return cfg.ridge_scale * a_unridged.trace() / static_cast<double>(a_unridged.rows());
}

Eigen::MatrixXd assemble_A(const KernelSystem& sys, const Eigen::MatrixXd& z, const SolverConfig& cfg,
                           bool with_ridge) {
    const Eigen::MatrixXd u = unpenalized_design(sys, z);
    const Eigen::Index n = sys.size();
    const Eigen::Index h = u.cols();
    const double q = cfg.loss.q();
    const double kappa = 2.0 * static_cast<double>(n) * q * cfg.lambda / ((q + 1.0) * (q + 1.0));

    Eigen::MatrixXd a(h + n, h + n);
    a.topLeftCorner(h, h) = u.transpose() * u;
    a.bottomLeftCorner(n, h) = sys.R * u;
    a.bottomRightCorner(n, n) = sys.R * sys.R + kappa * sys.R;
    // exact symmetry: mirror the lower triangle
    a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
    if (with_ridge) a.diagonal().array() += ridge_value(a, cfg);
    return a;
}

double majorizer(const SolverState& theta, const SolverState& anchor, const KernelSystem& sys,
                 const LabeledDataset& data, const SolverConfig& cfg) {
    const double base = objective(anchor, sys, data, cfg);
    const Eigen::VectorXd g = gradient_vector(anchor, sys, data, cfg);
    const Eigen::VectorXd delta = theta.pack() - anchor.pack();
    const Eigen::MatrixXd a = assemble_A(sys, data.scalars(), cfg, false);
    const double curv = 1.0 / (2.0 * majorizer_scale(cfg, sys.size()));
    return base + g.dot(delta) + curv * delta.dot(a * delta);
}

DenseStepSolver::DenseStepSolver(const KernelSystem& sys, const Eigen::MatrixXd& z, const SolverConfig& cfg)
    : a_(assemble_A(sys, z, cfg, true).cast<long double>()), llt_(a_.cast<double>()) {
    if (llt_.info() != Eigen::Success) throw SolverSingular("A is not positive definite after ridging");
}

Eigen::VectorXd DenseStepSolver::apply_inverse(const Eigen::VectorXd& v) const {
    return apply_inverse_extended(v.cast<long double>());
}

Eigen::VectorXd DenseStepSolver::apply_inverse_extended(const VectorXld& v) const {
    Eigen::VectorXd x = llt_.solve(v.cast<double>());
    const VectorXld r = v - a_ * x.cast<long double>();
    x += llt_.solve(r.cast<double>());
    return x;
}

SolverState mm_step(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                    const SolverConfig& cfg, const StepSolver& backend) {
    const Eigen::VectorXd step = backend.apply_inverse_extended(gradient_extended(state, sys, data, cfg));
    if (!step.allFinite()) throw SolverSingular("linear solve produced non-finite step");
    SolverState next = state;
    next.unpack(state.pack() - majorizer_scale(cfg, sys.size()) * step);
    next.objective = objective(next, sys, data, cfg);
    next.iteration = state.iteration + 1;
    next.converged = false;
    return next;
}

SolverState mm_step(const SolverState& state, const KernelSystem& sys, const LabeledDataset& data,
                    const SolverConfig& cfg) {
    const DenseStepSolver backend(sys, data.scalars(), cfg);
    return mm_step(state, sys, data, cfg, backend);
}

SolverState solve(const KernelSystem& sys, const LabeledDataset& data, const SolverConfig& cfg,
                  std::optional<SolverState> init, const StepSolver* backend, const SolveObserver& observer) {
    cfg.validate();
    std::unique_ptr<DenseStepSolver> dense;
    if (backend == nullptr) {
        dense = std::make_unique<DenseStepSolver>(sys, data.scalars(), cfg);
        backend = dense.get();
    }
    SolverState state = init ? *init : SolverState::zeros(data.size(), data.num_scalars());
    state.iteration = 0;
    state.converged = false;
    state.objective = objective(state, sys, data, cfg);
    if (observer) observer(state);

    // Each iterate is an MM step, either from the current point or from a
    // momentum extrapolation of it. Extrapolated steps that would raise the
    // objective are discarded and momentum restarts, so the sequence stays
    // monotone. Convergence is only declared on a plain step.
    Eigen::VectorXd prev = state.pack();
    int momentum = 0;
    for (int k = 0; k < cfg.max_iter; ++k) {
        SolverState next;
        bool plain = true;
        if (cfg.accelerate && momentum > 0) {
            const double beta = static_cast<double>(momentum - 1) / static_cast<double>(momentum + 2);
            SolverState y = state;
            y.unpack(state.pack() + beta * (state.pack() - prev));
            next = mm_step(y, sys, data, cfg, *backend);
            plain = beta == 0.0;
            if (!(next.objective <= state.objective)) {
                next = mm_step(state, sys, data, cfg, *backend);
                plain = true;
                momentum = 0;
            }
        } else {
            next = mm_step(state, sys, data, cfg, *backend);
        }
        next.iteration = state.iteration + 1;
        if (observer) observer(next);
        const double change = std::abs(state.objective - next.objective) / (1.0 + state.objective);
        prev = state.pack();
        state = std::move(next);
        if (change < cfg.tol) {
            if (plain) {
                state.converged = true;
                break;
            }
            momentum = 0;
        } else {
            ++momentum;
        }
    }
    return state;
}

}  // namespace fdwd
