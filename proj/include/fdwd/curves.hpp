#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fdwd {

// Ordered observation times on [0,1] with trapezoidal quadrature weights.
class Grid {
public:
    const std::vector<double>& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return points_.size(); }

    Eigen::Map<const Eigen::VectorXd> points_vec() const {
        return {points_.data(), static_cast<Eigen::Index>(points_.size())};
    }
    Eigen::Map<const Eigen::VectorXd> weights_vec() const {
        return {weights_.data(), static_cast<Eigen::Index>(weights_.size())};
    }

    bool same_points(const Grid& other) const noexcept { return points_ == other.points_; }

private:
    friend std::shared_ptr<const Grid> make_grid(std::span<const double> points);
    Grid(std::vector<double> points, std::vector<double> weights)
        : points_(std::move(points)), weights_(std::move(weights)) {}

    std::vector<double> points_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

// Throws InvalidGrid unless there are >= 3 strictly increasing points in [0,1].
GridPtr make_grid(std::span<const double> points);
GridPtr make_grid(std::initializer_list<double> points);

// m equally spaced points covering [0,1] inclusive.
GridPtr uniform_grid(std::size_t m);

// Affine map of increasing time stamps onto [0,1]; points already inside
// [0,1] are returned unchanged.
std::vector<double> rescale_to_unit(std::span<const double> points);

struct SampledCurve {
    SampledCurve(GridPtr grid, Eigen::VectorXd values);

    GridPtr grid;
    Eigen::VectorXd values;
};

SampledCurve sample(GridPtr grid, const std::function<double(double)>& fn);

// sum_i w_i x(t_i) g(t_i)
double integrate(const SampledCurve& curve, const std::function<double(double)>& g);
double integrate(const SampledCurve& curve, const Eigen::Ref<const Eigen::VectorXd>& g_on_grid);

// Linear interpolation at the target points; OutOfDomain if any target
// point lies outside the source grid's span.
SampledCurve resample(const SampledCurve& curve, GridPtr target);

// n curves on one grid (stored row-wise), labels in {-1,+1} and an optional
// n x p block of scalar covariates (p == 0 when absent).
class LabeledDataset {
public:
    LabeledDataset(GridPtr grid, Eigen::MatrixXd curves, Eigen::VectorXd labels,
                   Eigen::MatrixXd scalars = {});

    // Curves on heterogeneous grids are resampled onto the first curve's grid.
    static LabeledDataset from_curves(const std::vector<SampledCurve>& curves,
                                      Eigen::VectorXd labels, Eigen::MatrixXd scalars = {});

    const GridPtr& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& curves() const noexcept { return curves_; }
    const Eigen::VectorXd& labels() const noexcept { return labels_; }
    const Eigen::MatrixXd& scalars() const noexcept { return scalars_; }

    Eigen::Index size() const noexcept { return curves_.rows(); }
    Eigen::Index num_scalars() const noexcept { return scalars_.cols(); }
    bool has_scalars() const noexcept { return scalars_.cols() > 0; }

    SampledCurve curve(Eigen::Index i) const { return {grid_, curves_.row(i).transpose()}; }

    LabeledDataset subset(std::span<const Eigen::Index> rows) const;
    LabeledDataset without_scalars() const { return {grid_, curves_, labels_}; }
    LabeledDataset with_labels(Eigen::VectorXd labels) const {
        return {grid_, curves_, std::move(labels), scalars_};
    }

private:
    GridPtr grid_;
    Eigen::MatrixXd curves_;
    Eigen::VectorXd labels_;
    Eigen::MatrixXd scalars_;
};

}  // namespace fdwd
