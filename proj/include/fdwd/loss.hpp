#pragma once

#include <span>
#include <utility>
#include <vector>

namespace fdwd {

// Exponent q of the generalized DWD loss; the loss is linear up to the knot
// q/(1+q) and decays like u^-q beyond it.
class LossParam {
public:
    explicit LossParam(double q);

    double q() const noexcept { return q_; }
    double knot() const noexcept { return q_ / (1.0 + q_); }
    // Uniform bound on V_q'' used by the quadratic majorizer: (q+1)^2 / q.
    double curvature_bound() const noexcept { return (q_ + 1.0) * (q_ + 1.0) / q_; }

private:
    double q_;
};

double vq(double u, const LossParam& q) noexcept;
double vq_grad(double u, const LossParam& q) noexcept;

// c_q = V_q(1) = q^q / (q+1)^(q+1)
double cq(const LossParam& q) noexcept;

inline double hinge(double u) noexcept { return u < 1.0 ? 1.0 - u : 0.0; }

std::vector<std::pair<double, double>> loss_curve_samples(const LossParam& q, std::span<const double> u_grid);

}  // namespace fdwd
