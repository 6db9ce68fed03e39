#include "fdwd/loss.hpp"

#include <cmath>
#include <string>

#include "fdwd/errors.hpp"

namespace fdwd {

namespace {

constexpr double kLogSpaceAbove = 50.0;

// log(q^q / (q+1)^(q+1))
double log_scale(double q) noexcept { return q * std::log(q) - (q + 1.0) * std::log1p(q); }

}  // namespace

LossParam::LossParam(double q) : q_(q) {
    if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("loss exponent q must be positive and finite");
}

double vq(double u, const LossParam& param) noexcept {
    const double q = param.q();
    if (u <= param.knot()) return 1.0 - u;
    if (q > kLogSpaceAbove) return std::exp(log_scale(q) - q * std::log(u));
    return std::pow(q, q) / std::pow(q + 1.0, q + 1.0) / std::pow(u, q);
}

double vq_grad(double u, const LossParam& param) noexcept {
    const double q = param.q();
    if (u <= param.knot()) return -1.0;
    if (q > kLogSpaceAbove) return -std::exp((q + 1.0) * (std::log(q) - std::log1p(q) - std::log(u)));
    return -std::pow(q / ((q + 1.0) * u), q + 1.0);
}

double cq(const LossParam& param) noexcept { return vq(1.0, param); }

std::vector<std::pair<double, double>> loss_curve_samples(const LossParam& q, std::span<const double> u_grid) {
    std::vector<std::pair<double, double>> out;
    out.reserve(u_grid.size());
    for (double u : u_grid) out.emplace_back(u, vq(u, q));
    return out;
}

}  // namespace fdwd
