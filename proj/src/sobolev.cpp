#include "fdwd/sobolev.hpp"

#include <atomic>
#include <cmath>

#include "fdwd/errors.hpp"

namespace fdwd {

namespace {
std::atomic<std::size_t> g_eigen_calls{0};
}

double k2(double s) noexcept {
    const double p = s - 0.5;
    return 0.5 * (p * p - 1.0 / 12.0);
}

double k4(double s) noexcept {
    const double p2 = (s - 0.5) * (s - 0.5);
    return (p2 * p2 - 0.5 * p2 + 7.0 / 240.0) / 24.0;
}

double kernel(double s, double t) noexcept {
    return k2(s) * k2(t) - k4(std::abs(s - t));
}

GridKernel::GridKernel(GridPtr grid) : grid_(std::move(grid)) {
    const auto& pts = grid_->points();
    const auto m = static_cast<Eigen::Index>(pts.size());
    k_.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            const double v = kernel(pts[static_cast<std::size_t>(a)], pts[static_cast<std::size_t>(b)]);
            k_(a, b) = v;
            k_(b, a) = v;
        }
    }
}

Eigen::MatrixXd GridKernel::weighted(const Eigen::MatrixXd& curves) const {
    return curves * grid_->weights_vec().asDiagonal();
}

std::function<double(double)> apply_kernel_operator(const SampledCurve& f) {
    const GridPtr grid = f.grid;
    Eigen::VectorXd wf = grid->weights_vec().cwiseProduct(f.values);
    return [grid, wf = std::move(wf)](double t) {
        const auto& pts = grid->points();
        double acc = 0.0;
        for (std::size_t b = 0; b < pts.size(); ++b) acc += kernel(t, pts[b]) * wf[static_cast<Eigen::Index>(b)];
        return acc;
    };
}

Eigen::MatrixXd compute_S(const Grid& grid, const Eigen::MatrixXd& curves) {
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd basis(m, NullSpaceBasis::dim);
    for (Eigen::Index a = 0; a < m; ++a) {
        const double t = grid.points()[static_cast<std::size_t>(a)];
        basis(a, 0) = NullSpaceBasis::psi1(t);
        basis(a, 1) = NullSpaceBasis::psi2(t);
    }
    return curves * grid.weights_vec().asDiagonal() * basis;
}

Eigen::MatrixXd compute_S(const LabeledDataset& data) {
    if (data.size() == 0) throw InvalidData("empty dataset");
    return compute_S(*data.grid(), data.curves());
}

Eigen::MatrixXd compute_R(const GridKernel& kernel, const Eigen::MatrixXd& curves) {
    const Eigen::MatrixXd xw = kernel.weighted(curves);
    Eigen::MatrixXd r = xw * kernel.matrix() * xw.transpose();
    return 0.5 * (r + r.transpose());
}

Eigen::MatrixXd compute_R(const LabeledDataset& data) {
    if (data.size() == 0) throw InvalidData("empty dataset");
    return compute_R(GridKernel(data.grid()), data.curves());
}

Eigen::VectorXd cross_gram(const GridKernel& kernel, const Eigen::MatrixXd& train_curves,
                           const SampledCurve& new_curve) {
    const SampledCurve x = resample(new_curve, kernel.grid());
    const Eigen::VectorXd w = kernel.grid()->weights_vec();
    const Eigen::VectorXd kx = kernel.matrix() * w.cwiseProduct(x.values);
    return kernel.weighted(train_curves) * kx;
}

SymmetricEigen eigendecompose(const Eigen::MatrixXd& r) {
    if (r.rows() != r.cols()) throw ShapeError("eigendecompose needs a square matrix");
    const double scale = r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
    if (r.size() > 0 && (r - r.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw NotSymmetric("matrix is not symmetric within 1e-10 relative");
    }
    ++g_eigen_calls;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
    if (es.info() != Eigen::Success) throw NotSymmetric("symmetric eigensolver failed");
    SymmetricEigen out;
    out.vectors = es.eigenvectors().rowwise().reverse();
    out.values = es.eigenvalues().reverse();
    return out;
}

std::size_t eigendecomposition_count() noexcept { return g_eigen_calls.load(); }

KernelSystem KernelSystem::from_matrices(Eigen::MatrixXd s, Eigen::MatrixXd r, double rank_tol) {
    if (r.rows() != r.cols() || s.rows() != r.rows() || s.cols() != NullSpaceBasis::dim) {
        throw ShapeError("S must be n x 2 and R n x n");
    }
    KernelSystem sys;
    sys.S = std::move(s);
    sys.R = std::move(r);
    sys.rank_tol = rank_tol;
    SymmetricEigen eig = eigendecompose(sys.R);
    sys.Q = std::move(eig.vectors);
    sys.eigvals = std::move(eig.values);
    const double cut = sys.zero_threshold();
    for (Eigen::Index i = 0; i < sys.eigvals.size(); ++i) {
        if (sys.eigvals[i] < cut) sys.eigvals[i] = 0.0;
    }
    return sys;
}

KernelSystem KernelSystem::build(const LabeledDataset& data, double rank_tol) {
    if (data.size() == 0) throw InvalidData("empty dataset");
    GridKernel k(data.grid());
    return from_matrices(compute_S(*data.grid(), data.curves()), compute_R(k, data.curves()), rank_tol);
}

KernelSystem KernelSystem::subset(std::span<const Eigen::Index> rows) const {
    const auto k = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd s(k, S.cols());
    Eigen::MatrixXd r(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const Eigen::Index i = rows[static_cast<std::size_t>(a)];
        s.row(a) = S.row(i);
        for (Eigen::Index b = 0; b < k; ++b) r(a, b) = R(i, rows[static_cast<std::size_t>(b)]);
    }
    return from_matrices(std::move(s), std::move(r), rank_tol);
}

double KernelSystem::zero_threshold() const noexcept {
    if (eigvals.size() == 0) return 0.0;
    return rank_tol * std::max(eigvals[0], 0.0);
}

Eigen::Index KernelSystem::rank() const noexcept {
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < eigvals.size(); ++i) k += eigvals[i] > 0.0 ? 1 : 0;
    return k;
}

}  // namespace fdwd
