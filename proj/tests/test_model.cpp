#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fdwd/datagen.hpp"
#include "fdwd/errors.hpp"
#include "fdwd/model.hpp"
#include "fdwd/tuning.hpp"
#include "support.hpp"

using namespace fdwd;

namespace {

DwdModel constant_model(double alpha, const GridPtr& grid, Eigen::Index p = 0) {
    return DwdModel(1.0, 1e-3, alpha, Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(p), Standardization::identity(p),
                    Eigen::VectorXd::Zero(2), grid, Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(grid->size())));
}

}  // namespace

TEST(LabelMap, Encoding) {
    auto [m, y] = LabelMap::encode({"cat", "dog", "cat"});
    EXPECT_EQ(m.positive, "dog");
    EXPECT_EQ(y[0], -1.0);
    EXPECT_EQ(y[1], 1.0);
    auto [s, ys] = LabelMap::encode({"1", "-1"});
    EXPECT_EQ(s.positive, "1");
    EXPECT_EQ(ys[1], -1.0);
    EXPECT_THROW(LabelMap::encode({"a", "b", "c"}), DegenerateLabels);
    EXPECT_THROW(LabelMap::encode({"a", "a"}), DegenerateLabels);
}

TEST(Fit, DegenerateInputs) {
    const LabeledDataset data = support::random_dataset(10, 20, 0, 1);
    EXPECT_THROW(fit(data.with_labels(Eigen::VectorXd::Ones(10)), 1.0, 1e-3), DegenerateLabels);
    const std::vector<Eigen::Index> one{0};
    EXPECT_THROW(fit(data.subset(one), 1.0, 1e-3), DegenerateLabels);
}

TEST(Fit, ZeroCurvesInterceptOnly) {
    const GridPtr g = uniform_grid(20);
    Eigen::VectorXd y(10);
    y << 1, 1, 1, 1, 1, 1, 1, -1, -1, -1;
    const LabeledDataset data(g, Eigen::MatrixXd::Zero(10, 20), y);
    FitOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 20000;
    const DwdModel m = fit(data, 1.0, 1e-3, opts);
    EXPECT_EQ(m.d().norm(), 0.0);
    EXPECT_EQ(m.c().norm(), 0.0);
    // 1-D oracle: minimize 0.7 V(a) + 0.3 V(-a) on a fine grid
    const LossParam q(1.0);
    double best_a = 0.0;
    double best = INFINITY;
    for (int k = 0; k <= 400000; ++k) {
        const double a = -2.0 + 4.0 * k / 400000.0;
        const double v = 0.7 * vq(a, q) + 0.3 * vq(-a, q);
        if (v < best) {
            best = v;
            best_a = a;
        }
    }
    EXPECT_NEAR(m.alpha(), best_a, 1e-4);
    EXPECT_NEAR(m.alpha(), std::sqrt(0.7 / 1.2), 1e-4);
    const Eigen::VectorXd s = m.decision_scores(g, data.curves());
    int wrong = 0;
    for (int i = 0; i < 10; ++i) wrong += (s[i] >= 0 ? 1.0 : -1.0) != y[i];
    EXPECT_EQ(wrong, 3);
}

TEST(Fit, Deterministic) {
    const LabeledDataset data = support::random_dataset(25, 30, 2, 2);
    const DwdModel a = fit(data, 2.0, 1e-3);
    const DwdModel b = fit(data, 2.0, 1e-3);
    EXPECT_EQ(a.alpha(), b.alpha());
    EXPECT_EQ(a.c(), b.c());
    EXPECT_EQ(a.gamma(), b.gamma());
    std::ostringstream sa, sb;
    save(a, sa);
    save(b, sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Fit, GeneralizationGap) {
    double train = 0.0;
    double test = 0.0;
    TuningGrid grid;
    grid.q_values = {1.0};
    grid.lambda_values = {1e-6, 1e-4, 1e-2};
    for (std::uint64_t r = 0; r < 20; ++r) {
        ScenarioSpec spec;
        spec.scenario = 2;
        spec.n = 100;
        spec.seed = 1000 + r;
        const GeneratedData tr = generate(spec);
        spec.n = 300;
        spec.seed = 5000 + r;
        const GeneratedData te = generate(spec);
        const CvResult cv = cross_validate(tr.data, grid, SolverConfig{}, r);
        const DwdModel m = fit(tr.data, cv.best_q, cv.best_lambda);
        const auto rate = [&](const LabeledDataset& d) {
            const Eigen::VectorXd s = m.decision_scores(d.grid(), d.curves());
            int wrong = 0;
            for (Eigen::Index i = 0; i < s.size(); ++i) wrong += (s[i] >= 0 ? 1.0 : -1.0) != d.labels()[i];
            return static_cast<double>(wrong) / static_cast<double>(s.size());
        };
        train += rate(tr.data);
        test += rate(te.data);
    }
    EXPECT_LT(train, test);
}

TEST(Score, TrainingConsistency) {
    const LabeledDataset data = support::random_dataset(20, 30, 2, 3);
    const DwdModel m = fit(data, 1.0, 1e-3);
    const KernelSystem sys = KernelSystem::build(data);
    const Eigen::MatrixXd z = m.standardization().apply(data.scalars());
    for (Eigen::Index i = 0; i < 20; ++i) {
        const double want = m.alpha() + sys.S.row(i).dot(m.d()) + sys.R.row(i).dot(m.c()) + z.row(i).dot(m.gamma());
        const Eigen::VectorXd zi = data.scalars().row(i).transpose();
        EXPECT_NEAR(m.decision_score(data.curve(i), zi), want, 1e-10);
    }
}

TEST(Score, ConstantModelAndSignRule) {
    const GridPtr g = uniform_grid(15);
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd x = support::smooth_curves(*g, 3, rng);
    const DwdModel m = constant_model(0.3, g);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(m.decision_score(SampledCurve(g, x.row(i).transpose())), 0.3);
    const SampledCurve any(g, x.row(0).transpose());
    EXPECT_EQ(constant_model(2.5, g).predict_sign(any), 1);
    EXPECT_EQ(constant_model(-0.1, g).predict_sign(any), -1);
    EXPECT_EQ(constant_model(0.0, g).predict_sign(any), 1);
    const DwdModel labelled(1.0, 1e-3, -0.1, Eigen::Vector2d::Zero(), Eigen::VectorXd(), Standardization::identity(0),
                            Eigen::VectorXd::Zero(2), g, Eigen::MatrixXd::Zero(2, 15), LabelMap{"healthy", "sick"});
    EXPECT_EQ(labelled.predict(any), "healthy");
}

TEST(Score, AffineInCurve) {
    const LabeledDataset data = support::random_dataset(20, 30, 0, 5);
    const DwdModel m = fit(data, 1.0, 1e-3);
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd x = support::smooth_curves(*data.grid(), 2, rng);
    const auto score = [&](const Eigen::VectorXd& v) { return m.decision_score(SampledCurve(data.grid(), v)); };
    const double s0 = score(Eigen::VectorXd::Zero(30));
    const double lhs = score(x.row(0).transpose() + x.row(1).transpose()) - s0;
    const double rhs = (score(x.row(0).transpose()) - s0) + (score(x.row(1).transpose()) - s0);
    EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(Score, CovariateMismatch) {
    const LabeledDataset data = support::random_dataset(20, 30, 2, 7);
    const DwdModel with = fit(data, 1.0, 1e-3);
    const DwdModel without = fit(data.without_scalars(), 1.0, 1e-3);
    EXPECT_THROW(with.decision_score(data.curve(0)), CovariateMismatch);
    EXPECT_THROW(without.decision_score(data.curve(0), Eigen::VectorXd::Zero(2)), CovariateMismatch);
    EXPECT_THROW(with.decision_score(data.curve(0), Eigen::VectorXd::Zero(3)), CovariateMismatch);
    EXPECT_THROW(with.decision_scores(data.grid(), data.curves()), CovariateMismatch);
}

TEST(Beta, NullSpaceOnly) {
    const GridPtr g = uniform_grid(11);
    const DwdModel m(1.0, 1e-3, 0.0, Eigen::Vector2d(1.0, 2.0), Eigen::VectorXd(), Standardization::identity(0),
                     Eigen::VectorXd::Zero(2), g, Eigen::MatrixXd::Ones(2, 11));
    EXPECT_DOUBLE_EQ(m.beta_eval(0.5), 1.0);
    EXPECT_DOUBLE_EQ(m.beta_eval(1.0), 2.0);
    EXPECT_THROW(m.beta_eval(1.5), OutOfDomain);
    EXPECT_THROW(m.beta_eval(-0.01), OutOfDomain);
}

TEST(Beta, RepresenterCoherence) {
    const LabeledDataset data = support::random_dataset(15, 101, 0, 8);
    const DwdModel m = fit(data, 1.0, 1e-4);
    const KernelSystem sys = KernelSystem::build(data);
    const GridPtr fine = uniform_grid(2001);
    Eigen::VectorXd beta_fine(2001);
    for (Eigen::Index k = 0; k < 2001; ++k) beta_fine[k] = m.beta_eval(fine->points()[static_cast<std::size_t>(k)]);
    double scale = 0.0;
    for (Eigen::Index i = 0; i < 15; ++i) scale = std::max(scale, std::abs(sys.S.row(i).dot(m.d()) + sys.R.row(i).dot(m.c())));
    for (Eigen::Index i = 0; i < 15; ++i) {
        const double direct = sys.S.row(i).dot(m.d()) + sys.R.row(i).dot(m.c());
        const double quad = integrate(resample(data.curve(i), fine), beta_fine);
        EXPECT_NEAR(quad, direct, 1e-4 * std::max(1.0, scale));
        // same grid: the representer form is exact up to rounding
        Eigen::VectorXd beta_grid(101);
        for (Eigen::Index k = 0; k < 101; ++k) beta_grid[k] = m.beta_eval(data.grid()->points()[static_cast<std::size_t>(k)]);
        EXPECT_NEAR(integrate(data.curve(i), beta_grid) + m.alpha(), m.decision_score(data.curve(i)), 1e-10 * std::max(1.0, scale));
    }
}

TEST(Beta, HeavyPenaltyKillsCurvature) {
    const LabeledDataset data = support::random_dataset(30, 50, 0, 9);
    const DwdModel m = fit(data, 1.0, 1e3);
    EXPECT_LT(m.c().cwiseAbs().maxCoeff(), 1e-3);
    const int pts = 501;
    const double h = 1.0 / (pts - 1);
    double j = 0.0;
    for (int k = 1; k + 1 < pts; ++k) {
        const double b2 = (m.beta_eval((k + 1) * h) - 2 * m.beta_eval(k * h) + m.beta_eval((k - 1) * h)) / (h * h);
        j += h * b2 * b2;
    }
    EXPECT_LT(j, 1e-6);
}

TEST(Fit, LabelFlipNegatesScores) {
    const LabeledDataset data = support::random_dataset(25, 30, 2, 10);
    const DwdModel a = fit(data, 1.0, 1e-3);
    const DwdModel b = fit(data.with_labels(-data.labels()), 1.0, 1e-3);
    const Eigen::VectorXd sa = a.decision_scores(data.grid(), data.curves(), data.scalars());
    const Eigen::VectorXd sb = b.decision_scores(data.grid(), data.curves(), data.scalars());
    EXPECT_LT((sa + sb).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Fit, BeatsInterceptOnlyObjective) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const LabeledDataset data = support::random_dataset(30, 30, seed % 2 ? 2 : 0, seed);
        for (double q : {0.5, 1.0, 4.0}) {
            const DwdModel m = fit(data, q, 1e-3);
            const LossParam lp(q);
            double best = INFINITY;
            for (int k = 0; k <= 20000; ++k) {
                const double a = -3.0 + 6.0 * k / 20000.0;
                double v = 0.0;
                for (Eigen::Index i = 0; i < 30; ++i) v += vq(data.labels()[i] * a, lp);
                best = std::min(best, v / 30.0);
            }
            EXPECT_LE(m.diagnostics().objective, best + 1e-9);
        }
    }
}

TEST(Persistence, RoundTripBitExact) {
    ScenarioSpec spec;
    spec.scenario = 1;
    spec.n = 60;
    spec.with_scalars = true;
    spec.seed = 77;
    const GeneratedData g = generate(spec);
    const DwdModel m = fit(g.data, 2.0, 1e-4);
    std::stringstream ss;
    save(m, ss);
    const DwdModel back = load(ss);
    spec.n = 100;
    spec.seed = 78;
    const GeneratedData fresh = generate(spec);
    const Eigen::VectorXd a = m.decision_scores(fresh.data.grid(), fresh.data.curves(), fresh.data.scalars());
    const Eigen::VectorXd b = back.decision_scores(fresh.data.grid(), fresh.data.curves(), fresh.data.scalars());
    EXPECT_EQ(a, b);
    EXPECT_EQ(back.diagnostics().iterations, m.diagnostics().iterations);
}

TEST(Persistence, CorruptInputs) {
    const LabeledDataset data = support::random_dataset(10, 20, 0, 14);
    const DwdModel m = fit(data, 1.0, 1e-3);
    std::ostringstream os;
    save(m, os);
    const std::string text = os.str();
    EXPECT_NE(text.find("\"format_version\""), std::string::npos);
    std::istringstream truncated(text.substr(0, text.size() / 2));
    EXPECT_THROW(load(truncated), ModelFormatError);
    std::string wrong_version = text;
    const auto pos = wrong_version.find("\"format_version\": 1");
    ASSERT_NE(pos, std::string::npos);
    wrong_version.replace(pos, 19, "\"format_version\": 9");
    std::istringstream wv(wrong_version);
    try {
        load(wv);
        FAIL();
    } catch (const ModelFormatError& e) {
        EXPECT_NE(std::string(e.what()).find("format_version"), std::string::npos);
    }
    std::string short_c = text;
    const auto cpos = short_c.find("\"c\": [");
    ASSERT_NE(cpos, std::string::npos);
    short_c.replace(cpos, 6, "\"c\": [1.0, ");
    std::istringstream sc(short_c);
    EXPECT_THROW(load(sc), ModelFormatError);
    EXPECT_THROW(load_file("/nonexistent/model.json"), IoError);
}
