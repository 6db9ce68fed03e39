#include "fdwd/curves.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdwd/errors.hpp"

namespace fdwd {

GridPtr make_grid(std::span<const double> points) {
    if (points.size() < 3) {
        throw InvalidGrid("grid needs at least 3 points, got " + std::to_string(points.size()));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i])) throw InvalidGrid("grid point " + std::to_string(i) + " is not finite");
        if (i > 0 && !(points[i] > points[i - 1])) {
            throw InvalidGrid("grid points must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
    if (points.front() < 0.0 || points.back() > 1.0) {
        throw InvalidGrid("grid points must lie in [0,1]");
    }

    const std::size_t m = points.size();
    std::vector<double> weights(m);
    weights[0] = 0.5 * (points[1] - points[0]);
    weights[m - 1] = 0.5 * (points[m - 1] - points[m - 2]);
    for (std::size_t i = 1; i + 1 < m; ++i) weights[i] = 0.5 * (points[i + 1] - points[i - 1]);

    return GridPtr(new Grid({points.begin(), points.end()}, std::move(weights)));
}

GridPtr make_grid(std::initializer_list<double> points) {
    return make_grid(std::span<const double>(points.begin(), points.size()));
}

GridPtr uniform_grid(std::size_t m) {
    if (m < 3) throw InvalidGrid("uniform grid needs at least 3 points");
    std::vector<double> pts(m);
    const double last = static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) pts[i] = static_cast<double>(i) / last;
    return make_grid(pts);
}

std::vector<double> rescale_to_unit(std::span<const double> points) {
    std::vector<double> out(points.begin(), points.end());
    if (out.empty()) return out;
    const double lo = out.front();
    const double hi = out.back();
    if (lo >= 0.0 && hi <= 1.0) return out;
    if (!(hi > lo)) throw InvalidGrid("cannot rescale a degenerate time range");
    for (auto& t : out) t = (t - lo) / (hi - lo);
    out.front() = 0.0;
    out.back() = 1.0;
    return out;
}

SampledCurve::SampledCurve(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw InvalidData("curve has no grid");
    if (static_cast<std::size_t>(values.size()) != grid->size()) {
        throw ShapeError("curve has " + std::to_string(values.size()) + " values for a grid of " +
                         std::to_string(grid->size()) + " points");
    }
    if (!values.allFinite()) throw InvalidData("curve contains non-finite values");
}

SampledCurve sample(GridPtr grid, const std::function<double(double)>& fn) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = fn(grid->points()[static_cast<std::size_t>(i)]);
    return {std::move(grid), std::move(v)};
}

double integrate(const SampledCurve& curve, const std::function<double(double)>& g) {
    const auto& pts = curve.grid->points();
    const auto& w = curve.grid->weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) acc += w[i] * curve.values[static_cast<Eigen::Index>(i)] * g(pts[i]);
    return acc;
}

double integrate(const SampledCurve& curve, const Eigen::Ref<const Eigen::VectorXd>& g_on_grid) {
    if (g_on_grid.size() != curve.values.size()) throw ShapeError("integrand length does not match grid");
    const auto& w = curve.grid->weights();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < g_on_grid.size(); ++i) {
        acc += w[static_cast<std::size_t>(i)] * curve.values[i] * g_on_grid[i];
    }
    return acc;
}

SampledCurve resample(const SampledCurve& curve, GridPtr target) {
    if (curve.grid == target || curve.grid->same_points(*target)) return {std::move(target), curve.values};

    const auto& src = curve.grid->points();
    const auto& dst = target->points();
    if (dst.front() < src.front() || dst.back() > src.back()) {
        throw OutOfDomain("resample target extends outside the source grid span");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(dst.size()));
    for (std::size_t k = 0; k < dst.size(); ++k) {
        const double t = dst[k];
        auto it = std::upper_bound(src.begin(), src.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - src.begin());
        if (hi >= src.size()) hi = src.size() - 1;
        const std::size_t lo = hi == 0 ? 0 : hi - 1;
        const double t0 = src[lo];
        const double t1 = src[hi];
        const double v0 = curve.values[static_cast<Eigen::Index>(lo)];
        const double v1 = curve.values[static_cast<Eigen::Index>(hi)];
        if (t == t0 || t1 == t0) {
            out[static_cast<Eigen::Index>(k)] = v0;
        } else {
            const double a = (t - t0) / (t1 - t0);
            out[static_cast<Eigen::Index>(k)] = (1.0 - a) * v0 + a * v1;
        }
    }
    return {std::move(target), std::move(out)};
}

LabeledDataset::LabeledDataset(GridPtr grid, Eigen::MatrixXd curves, Eigen::VectorXd labels,
                               Eigen::MatrixXd scalars)
    : grid_(std::move(grid)), curves_(std::move(curves)), labels_(std::move(labels)),
      scalars_(std::move(scalars)) {
    if (!grid_) throw InvalidData("dataset has no grid");
    if (static_cast<std::size_t>(curves_.cols()) != grid_->size()) {
        throw ShapeError("curve matrix has " + std::to_string(curves_.cols()) + " columns for a grid of " +
                         std::to_string(grid_->size()) + " points");
    }
    if (labels_.size() != curves_.rows()) {
        throw ShapeError("got " + std::to_string(labels_.size()) + " labels for " +
                         std::to_string(curves_.rows()) + " curves");
    }
    if (!curves_.allFinite()) throw InvalidData("curve values must be finite");
    for (Eigen::Index i = 0; i < labels_.size(); ++i) {
        if (labels_[i] != 1.0 && labels_[i] != -1.0) {
            throw InvalidData("label " + std::to_string(i) + " is not -1 or +1");
        }
    }
    if (scalars_.size() == 0) {
        scalars_.resize(curves_.rows(), 0);
    } else {
        if (scalars_.rows() != curves_.rows()) {
            throw ShapeError("scalar covariates have " + std::to_string(scalars_.rows()) + " rows for " +
                             std::to_string(curves_.rows()) + " curves");
        }
        if (!scalars_.allFinite()) throw InvalidData("scalar covariates must be finite");
    }
}

LabeledDataset LabeledDataset::from_curves(const std::vector<SampledCurve>& curves, Eigen::VectorXd labels,
                                           Eigen::MatrixXd scalars) {
    if (curves.empty()) throw InvalidData("no curves");
    const GridPtr& grid = curves.front().grid;
    Eigen::MatrixXd mat(static_cast<Eigen::Index>(curves.size()), static_cast<Eigen::Index>(grid->size()));
    for (std::size_t i = 0; i < curves.size(); ++i) {
        mat.row(static_cast<Eigen::Index>(i)) = resample(curves[i], grid).values.transpose();
    }
    return {grid, std::move(mat), std::move(labels), std::move(scalars)};
}

LabeledDataset LabeledDataset::subset(std::span<const Eigen::Index> rows) const {
    const auto k = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd x(k, curves_.cols());
    Eigen::VectorXd y(k);
    Eigen::MatrixXd z(k, scalars_.cols());
    for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Index i = rows[static_cast<std::size_t>(r)];
        x.row(r) = curves_.row(i);
        y[r] = labels_[i];
        if (z.cols() > 0) z.row(r) = scalars_.row(i);
    }
    return {grid_, std::move(x), std::move(y), std::move(z)};
}

}  // namespace fdwd
