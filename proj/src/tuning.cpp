#include "fdwd/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fdwd/errors.hpp"
#include "fdwd/util.hpp"

namespace fdwd {

void TuningGrid::validate(Eigen::Index n) const {
    if (q_values.empty() || lambda_values.empty()) throw ValidationError("tuning grid must be nonempty");
    for (double q : q_values) {
        if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("grid q values must be positive");
    }
    for (double l : lambda_values) {
        if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("grid lambda values must be positive");
    }
    if (folds < 2) throw ValidationError("need at least 2 folds");
    if (folds > n) {
        throw ValidationError("folds (" + std::to_string(folds) + ") exceed sample size (" + std::to_string(n) + ")");
    }
}

FastFactors build_factors(const KernelSystem& sys, const Eigen::MatrixXd& z) {
    FastFactors f;
    f.U = unpenalized_design(sys, z);
    f.B = f.U.transpose() * f.U;
    f.C = sys.R * f.U;
    f.Q = sys.Q;
    f.eigvals = sys.eigvals;
    f.QtC = f.Q.transpose() * f.C;
    f.Z = z;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.B, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    const double bottom = es.eigenvalues().minCoeff();
    f.B_singular = !(top > 0.0) || bottom <= 1e-12 * top;
    if (f.B_singular) f.sys = std::make_shared<KernelSystem>(sys);
    return f;
}

Eigen::VectorXd pi_diagonal(const FastFactors& factors, double q, double lambda) {
    const double kappa = 2.0 * static_cast<double>(factors.n()) * q * lambda / ((q + 1.0) * (q + 1.0));
    return (factors.eigvals.array().square() + kappa * factors.eigvals.array()).matrix();
}

FastInverse::FastInverse(const FastFactors& factors, double q, double lambda, double ridge_scale)
    : f_(&factors), pi_(pi_diagonal(factors, q, lambda)) {
    if (factors.B_singular) {
        log_warning("unpenalized block B is singular; falling back to the ridged dense solve");
        SolverConfig cfg;
        cfg.loss = LossParam(q);
        cfg.lambda = lambda;
        cfg.ridge_scale = ridge_scale;
        dense_ = std::make_unique<DenseStepSolver>(*factors.sys, factors.Z, cfg);
        return;
    }
    const Eigen::Index n = factors.n();
    const Eigen::Index h = factors.head();
    // same ridge as the dense solve: ridge_scale * trace(A) / dim
    ridge_ = ridge_scale * (factors.B.trace() + pi_.sum()) / static_cast<double>(h + n);
    b_ldlt_.compute(factors.B + ridge_ * Eigen::MatrixXd::Identity(h, h));
    pi_pinv_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) pi_pinv_[i] = factors.eigvals[i] > 0.0 ? 1.0 / (pi_[i] + ridge_) : 0.0;
    g_ = pi_pinv_.asDiagonal() * factors.QtC;
    // B - C^T D^+ C
    Eigen::MatrixXd inner = factors.B + ridge_ * Eigen::MatrixXd::Identity(h, h) - factors.QtC.transpose() * g_;
    inner = 0.5 * (inner + inner.transpose());
    woodbury_.compute(inner);
    if (woodbury_.info() != Eigen::Success) throw SolverSingular("Woodbury inner matrix is singular");
}

Eigen::VectorXd FastInverse::apply_inverse(const Eigen::VectorXd& v) const {
    if (dense_) return dense_->apply_inverse(v);
    const FastFactors& f = *f_;
    const Eigen::Index h = f.head();
    const Eigen::Index n = f.n();
    if (v.size() != h + n) throw ShapeError("vector length does not match A");

    const Eigen::VectorXd v1 = v.head(h);
    const Eigen::VectorXd b_inv_v1 = b_ldlt_.solve(v1);
    // P w with P = (D - C B^-1 C^T)^-1 = D^+ + D^+ C (B - C^T D^+ C)^-1 C^T D^+
    const Eigen::VectorXd w = v.tail(n) - f.C * b_inv_v1;
    const Eigen::VectorXd a = pi_pinv_.cwiseProduct(f.Q.transpose() * w);
    const Eigen::VectorXd s = woodbury_.solve(f.QtC.transpose() * a);
    const Eigen::VectorXd bottom = f.Q * (a + g_ * s);

    Eigen::VectorXd out(h + n);
    out.head(h) = b_ldlt_.solve(v1 - f.C.transpose() * bottom);
    out.tail(n) = bottom;
    return out;
}

Eigen::VectorXd FastInverse::apply_inverse_extended(const VectorXld& v) const {
    if (dense_) return dense_->apply_inverse_extended(v);
    return apply_inverse(Eigen::VectorXd(v.cast<double>()));
}

Eigen::VectorXd fast_apply_inverse(const FastFactors& factors, double q, double lambda, const Eigen::VectorXd& v) {
    return FastInverse(factors, q, lambda).apply_inverse(v);
}

std::vector<std::vector<Eigen::Index>> stratified_folds(const Eigen::VectorXd& labels, int folds,
                                                        std::uint64_t seed) {
    if (folds < 2) throw ValidationError("need at least 2 folds");
    if (folds > labels.size()) throw ValidationError("more folds than subjects");
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(labels.size()));
    for (double cls : {-1.0, 1.0}) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        order.insert(order.end(), members.begin(), members.end());
    }
    std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
    for (std::size_t k = 0; k < order.size(); ++k) out[k % out.size()].push_back(order[k]);
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

void select_best(CvResult& result) {
    const auto& e = result.error_surface;
    const auto ascending = [](const std::vector<double>& v) {
        std::vector<Eigen::Index> idx(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
        std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
            return v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)];
        });
        return idx;
    };
    const auto q_order = ascending(result.q_values);
    const auto l_order = ascending(result.lambda_values);
    Eigen::Index bq = q_order.front();
    Eigen::Index bl = l_order.front();
    double best = e(bq, bl);
    for (Eigen::Index l : l_order) {
        for (Eigen::Index q : q_order) {
            if (e(q, l) < best - 1e-12) {
                best = e(q, l);
                bq = q;
                bl = l;
            }
        }
    }
    result.best_q = result.q_values[static_cast<std::size_t>(bq)];
    result.best_lambda = result.lambda_values[static_cast<std::size_t>(bl)];
    result.best_error = best;
}

namespace {

std::vector<Eigen::Index> complement(const std::vector<Eigen::Index>& fold, Eigen::Index n) {
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (auto i : fold) in[static_cast<std::size_t>(i)] = 1;
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
    }
    return out;
}

bool has_both_classes(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
    bool pos = false;
    bool neg = false;
    for (auto i : rows) (y[i] > 0 ? pos : neg) = true;
    return pos && neg;
}

template <typename Idx>
std::vector<std::size_t> sorted_order(const std::vector<double>& values, Idx cmp) {
    std::vector<std::size_t> idx(values.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cmp(values[a], values[b]); });
    return idx;
}

}  // namespace

CvResult cross_validate(const LabeledDataset& data, const TuningGrid& grid, const SolverConfig& base,
                        std::uint64_t seed, const CvOptions& options) {
    const Eigen::Index n = data.size();
    grid.validate(n);

    CvResult result;
    result.q_values = grid.q_values;
    result.lambda_values = grid.lambda_values;
    result.folds = stratified_folds(data.labels(), grid.folds, seed);

    const GridKernel kern(data.grid());
    const Eigen::MatrixXd s_full = compute_S(*data.grid(), data.curves());
    const Eigen::MatrixXd r_full = compute_R(kern, data.curves());

    const auto nq = static_cast<Eigen::Index>(grid.q_values.size());
    const auto nl = static_cast<Eigen::Index>(grid.lambda_values.size());
    // held-out misclassification counts pooled over folds
    Eigen::MatrixXd wrong_total = Eigen::MatrixXd::Zero(nq, nl);

    // lambda from largest to smallest so warm starts move toward weaker penalties
    const auto lambda_order = sorted_order(grid.lambda_values, std::greater<double>());

    for (const auto& val : result.folds) {
        const std::vector<Eigen::Index> train = complement(val, n);
        if (!has_both_classes(data.labels(), train)) {
            throw StratificationError("a training fold is missing one class");
        }
        const auto nt = static_cast<Eigen::Index>(train.size());
        const auto nv = static_cast<Eigen::Index>(val.size());

        Eigen::MatrixXd s_tr(nt, 2);
        Eigen::MatrixXd r_tr(nt, nt);
        Eigen::MatrixXd r_vt(nv, nt);
        for (Eigen::Index a = 0; a < nt; ++a) {
            s_tr.row(a) = s_full.row(train[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < nt; ++b) {
                r_tr(a, b) = r_full(train[static_cast<std::size_t>(a)], train[static_cast<std::size_t>(b)]);
            }
        }
        for (Eigen::Index a = 0; a < nv; ++a) {
            for (Eigen::Index b = 0; b < nt; ++b) {
                r_vt(a, b) = r_full(val[static_cast<std::size_t>(a)], train[static_cast<std::size_t>(b)]);
            }
        }
        const KernelSystem sys = KernelSystem::from_matrices(std::move(s_tr), std::move(r_tr));

        LabeledDataset raw_tr = data.subset(train);
        const LabeledDataset raw_val = data.subset(val);
        const Standardization stdz = Standardization::fit(raw_tr.scalars());
        const LabeledDataset tr(raw_tr.grid(), raw_tr.curves(), raw_tr.labels(), stdz.apply(raw_tr.scalars()));
        const Eigen::MatrixXd z_val = stdz.apply(raw_val.scalars());
        Eigen::MatrixXd s_val(nv, 2);
        for (Eigen::Index a = 0; a < nv; ++a) s_val.row(a) = s_full.row(val[static_cast<std::size_t>(a)]);

        std::unique_ptr<FastFactors> factors;
        if (options.fast_path) factors = std::make_unique<FastFactors>(build_factors(sys, tr.scalars()));

        Eigen::MatrixXd fold_err(nq, nl);
        for (Eigen::Index qi = 0; qi < nq; ++qi) {
            std::optional<SolverState> warm;
            for (std::size_t li : lambda_order) {
                SolverConfig cfg = base;
                cfg.loss = LossParam(grid.q_values[static_cast<std::size_t>(qi)]);
                cfg.lambda = grid.lambda_values[li];

                SolverState state;
                if (options.fast_path) {
                    const FastInverse inv(*factors, cfg.loss.q(), cfg.lambda, cfg.ridge_scale);
                    state = solve(sys, tr, cfg, warm, &inv);
                } else {
                    state = solve(sys, tr, cfg, warm);
                }
                if (options.warm_start) warm = state;

                Eigen::VectorXd score = s_val * state.d + r_vt * state.c;
                score.array() += state.alpha;
                if (z_val.cols() > 0) score += z_val * state.gamma;
                int wrong = 0;
                for (Eigen::Index a = 0; a < nv; ++a) {
                    const double pred = score[a] >= 0.0 ? 1.0 : -1.0;
                    wrong += pred != raw_val.labels()[a] ? 1 : 0;
                }
                wrong_total(qi, static_cast<Eigen::Index>(li)) += wrong;
                fold_err(qi, static_cast<Eigen::Index>(li)) = static_cast<double>(wrong) / static_cast<double>(nv);
            }
        }
        result.fold_errors.push_back(std::move(fold_err));
    }
    result.error_surface = wrong_total / static_cast<double>(n);
    select_best(result);
    return result;
}

}  // namespace fdwd
