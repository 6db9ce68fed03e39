#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fdwd/curves.hpp"
#include "fdwd/mm_solver.hpp"
#include "fdwd/sobolev.hpp"

namespace fdwd {

inline constexpr int kModelFormatVersion = 1;

// Raw class labels behind the internal -1/+1 coding.
struct LabelMap {
    std::string negative = "-1";
    std::string positive = "1";

    // Labels already in {-1, +1} map to themselves; otherwise exactly two
    // distinct labels are required and the lexicographically larger one
    // becomes +1.
    static std::pair<LabelMap, Eigen::VectorXd> encode(const std::vector<std::string>& raw);

    const std::string& decode(int sign) const noexcept { return sign > 0 ? positive : negative; }
};

struct FitDiagnostics {
    int iterations = 0;
    double objective = 0.0;
    bool converged = false;
};

struct FitOptions {
    int max_iter = 2000;
    double tol = 1e-8;
    double ridge_scale = 1e-10;
    LabelMap labels;
};

// Fitted classifier: score(x, z) = alpha + ∫ x beta + z_std^T gamma with
// beta(t) = d1 + d2 (t - 0.5) + sum_i c_i (K x_i)(t).
class DwdModel {
public:
    DwdModel(double q, double lambda, double alpha, Eigen::Vector2d d, Eigen::VectorXd gamma,
             Standardization standardization, Eigen::VectorXd c, GridPtr grid, Eigen::MatrixXd train_curves,
             LabelMap labels = {}, FitDiagnostics diagnostics = {});

    double q() const noexcept { return q_; }
    double lambda() const noexcept { return lambda_; }
    double alpha() const noexcept { return alpha_; }
    const Eigen::Vector2d& d() const noexcept { return d_; }
    const Eigen::VectorXd& gamma() const noexcept { return gamma_; }
    const Standardization& standardization() const noexcept { return stdz_; }
    const Eigen::VectorXd& c() const noexcept { return c_; }
    const GridPtr& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& train_curves() const noexcept { return curves_; }
    const LabelMap& label_map() const noexcept { return labels_; }
    const FitDiagnostics& diagnostics() const noexcept { return diag_; }
    Eigen::Index num_scalars() const noexcept { return gamma_.size(); }

    // Throws CovariateMismatch when scalars are given to a p = 0 model or
    // missing from a p > 0 model.
    double decision_score(const SampledCurve& curve, const std::optional<Eigen::VectorXd>& scalars = {}) const;
    int predict_sign(const SampledCurve& curve, const std::optional<Eigen::VectorXd>& scalars = {}) const;
    const std::string& predict(const SampledCurve& curve, const std::optional<Eigen::VectorXd>& scalars = {}) const;

    // Scores for every row of a curve matrix on `grid` (resampled if needed).
    Eigen::VectorXd decision_scores(const GridPtr& grid, const Eigen::MatrixXd& curves,
                                    const Eigen::MatrixXd& scalars = {}) const;

    double beta_eval(double t) const;

private:
    double q_;
    double lambda_;
    double alpha_;
    Eigen::Vector2d d_;
    Eigen::VectorXd gamma_;
    Standardization stdz_;
    Eigen::VectorXd c_;
    GridPtr grid_;
    Eigen::MatrixXd curves_;
    LabelMap labels_;
    FitDiagnostics diag_;

    std::shared_ptr<const GridKernel> kernel_;
    Eigen::VectorXd weighted_comb_;  // w ∘ (X^T c), the kernel-part density of beta
};

DwdModel fit(const LabeledDataset& data, double q, double lambda, const FitOptions& options = {});

void save(const DwdModel& model, std::ostream& out);
DwdModel load(std::istream& in);
void save_file(const DwdModel& model, const std::string& path);
DwdModel load_file(const std::string& path);

}  // namespace fdwd
