#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fdwd/cli.hpp"
#include "fdwd/io.hpp"
#include "fdwd/model.hpp"
#include "json.hpp"

using namespace fdwd;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::vector<const char*> argv{"fdwd"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& p) { return read_text_file(p); }

int field(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + "=", 0) == 0) return std::stoi(line.substr(key.size() + 1));
    }
    return -1;
}

struct Prediction {
    std::vector<double> scores;
    std::vector<std::string> labels;
};

Prediction read_predictions(const std::string& p) {
    std::istringstream rows(slurp(p));
    std::string line;
    std::getline(rows, line);
    EXPECT_EQ(line, "index,score,label");
    Prediction out;
    int i = 0;
    while (std::getline(rows, line)) {
        std::stringstream ss(line);
        std::string idx, score, label;
        std::getline(ss, idx, ',');
        std::getline(ss, score, ',');
        std::getline(ss, label, ',');
        EXPECT_EQ(std::stoi(idx), i++);
        out.scores.push_back(std::stod(score));
        out.labels.push_back(label);
    }
    return out;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("fdwd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void simulate(const std::string& sub, int scenario, bool scalars, int n = 60, int seed = 3) {
        std::vector<std::string> args{"simulate", "--scenario", std::to_string(scenario), "--n", std::to_string(n),
                                      "--seed", std::to_string(seed), "--out", path(sub)};
        if (scalars) args.push_back("--with-scalars");
        ASSERT_EQ(run(args).code, 0);
    }

    void write(const std::string& name, const std::string& content) const { std::ofstream(path(name)) << content; }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, FitPredictRoundTrip) {
    simulate("s1", 1, true);
    const Result fr = run({"fit", "--curves", path("s1/curves.csv"), "--labels", path("s1/labels.csv"), "--scalars",
                           path("s1/scalars.csv"), "--q", "1", "--lambda", "1e-3", "--out", path("m.json")});
    ASSERT_EQ(fr.code, 0) << fr.err;
    EXPECT_TRUE(fs::exists(path("m.json")));
    EXPECT_EQ(field(fr.out, "n"), 60);
    EXPECT_EQ(field(fr.out, "p"), 2);
    EXPECT_NE(fr.out.find("objective="), std::string::npos);

    const Result pr = run({"predict", "--model", path("m.json"), "--curves", path("s1/curves.csv"), "--scalars",
                           path("s1/scalars.csv"), "--out", path("p.csv")});
    ASSERT_EQ(pr.code, 0) << pr.err;
    const Prediction pred = read_predictions(path("p.csv"));
    ASSERT_EQ(pred.scores.size(), 60u);

    const Eigen::VectorXd y = read_labels_csv(path("s1/labels.csv"));
    int wrong = 0;
    for (std::size_t i = 0; i < 60; ++i) wrong += std::stod(pred.labels[i]) != y[static_cast<Eigen::Index>(i)];
    EXPECT_EQ(wrong, field(fr.out, "training_errors"));

    const CurveTable t = read_curves_csv(path("s1/curves.csv"));
    const Eigen::MatrixXd z = read_scalars_csv(path("s1/scalars.csv"));
    const DwdModel m = fit(LabeledDataset(t.grid, t.values, y, z), 1.0, 1e-3);
    const Eigen::VectorXd direct = m.decision_scores(t.grid, t.values, z);
    for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(pred.scores[i], direct[static_cast<Eigen::Index>(i)]);
}

TEST_F(CliTest, ValidationExitCodes) {
    simulate("s", 1, true, 20);
    write("bad_labels.csv", "1\n-1\n0\n");
    const Result a = run({"fit", "--curves", path("s/curves.csv"), "--labels", path("bad_labels.csv"), "--q", "1",
                          "--lambda", "1e-3", "--out", path("m.json")});
    EXPECT_EQ(a.code, cli::kValidation);
    EXPECT_NE(a.err.find("bad_labels.csv:3"), std::string::npos) << a.err;
    EXPECT_FALSE(fs::exists(path("m.json")));

    write("short.csv", "1,2\n3,4\n");
    EXPECT_EQ(run({"fit", "--curves", path("s/curves.csv"), "--labels", path("s/labels.csv"), "--scalars",
                   path("short.csv"), "--q", "1", "--lambda", "1e-3", "--out", path("m.json")})
                  .code,
              cli::kValidation);

    EXPECT_EQ(run({"fit", "--curves", path("s/curves.csv"), "--labels", path("s/labels.csv"), "--q", "-1",
                   "--lambda", "1e-3", "--out", path("m.json")})
                  .code,
              cli::kValidation);

    ASSERT_EQ(run({"fit", "--curves", path("s/curves.csv"), "--labels", path("s/labels.csv"), "--q", "1",
                   "--lambda", "1e-3", "--out", path("m.json")})
                  .code,
              0);
    write("empty.csv", "");
    EXPECT_EQ(run({"predict", "--model", path("m.json"), "--curves", path("empty.csv"), "--out", path("p.csv")}).code,
              cli::kValidation);
    // fitted without scalars, asked to use them
    EXPECT_EQ(run({"predict", "--model", path("m.json"), "--curves", path("s/curves.csv"), "--scalars",
                   path("s/scalars.csv"), "--out", path("p.csv")})
                  .code,
              cli::kValidation);
    EXPECT_FALSE(fs::exists(path("p.csv")));

    write("corrupt.json", "{\"format\": \"fdwd-model\", \"format_version\": 1");
    EXPECT_EQ(run({"predict", "--model", path("corrupt.json"), "--curves", path("s/curves.csv"), "--out", path("p.csv")}).code,
              cli::kValidation);
}

TEST_F(CliTest, IoAndUsageExitCodes) {
    EXPECT_EQ(run({"fit", "--curves", path("missing.csv"), "--labels", path("missing.csv"), "--q", "1", "--lambda",
                   "1e-3", "--out", path("m.json")})
                  .code,
              cli::kIo);
    EXPECT_EQ(run({"predict", "--model", path("none.json"), "--curves", path("x.csv"), "--out", path("p.csv")}).code,
              cli::kIo);
    EXPECT_EQ(run({"fit", "--curves", "a", "--labels", "b", "--q", "1", "--lambda", "1", "--out", "c", "--bogus"}).code,
              cli::kUsage);
    EXPECT_EQ(run({"simulate", "--scenario", "1", "--out", path("x")}).code, cli::kUsage);
    EXPECT_EQ(run({"cv", "--curves", "a", "--labels", "b"}).code, cli::kUsage);
    EXPECT_EQ(run({"benchmark"}).code, cli::kUsage);
    EXPECT_EQ(run({}).code, cli::kUsage);
}

TEST_F(CliTest, SimulateDeterministic) {
    simulate("a", 2, true, 30, 11);
    simulate("b", 2, true, 30, 11);
    for (const char* f : {"curves.csv", "labels.csv", "scalars.csv", "truth.csv"}) {
        EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
    }
    simulate("c", 2, false, 30, 11);
    EXPECT_FALSE(fs::exists(path("c/scalars.csv")));
}

TEST_F(CliTest, PlotLoss) {
    const Result r = run({"plot-loss", "--q", "1", "--u-min", "-1", "--u-max", "2", "--points", "301"});
    ASSERT_EQ(r.code, 0);
    std::istringstream rows(r.out);
    std::string line;
    std::getline(rows, line);
    EXPECT_EQ(line, "u,V_q=1,hinge");
    bool found = false;
    int count = 0;
    while (std::getline(rows, line)) {
        ++count;
        std::stringstream ss(line);
        std::string u, v;
        std::getline(ss, u, ',');
        std::getline(ss, v, ',');
        if (std::stod(u) == 0.0) {
            found = true;
            EXPECT_EQ(std::stod(v), 1.0);
        }
    }
    EXPECT_TRUE(found);
    EXPECT_EQ(count, 301);
    ASSERT_EQ(run({"plot-loss", "--q", "0.5,2", "--out", path("loss.csv")}).code, 0);
    EXPECT_EQ(slurp(path("loss.csv")).substr(0, 22), "u,V_q=0.5,V_q=2,hinge\n");
}

TEST_F(CliTest, CrossValidate) {
    simulate("s", 2, false, 40, 5);
    const std::vector<std::string> args{"cv", "--curves", path("s/curves.csv"), "--labels", path("s/labels.csv"),
                                        "--q-values", "1,2", "--lambda-values", "1e-4,1e-2", "--folds", "4",
                                        "--seed", "8", "--out", path("cv.csv")};
    const Result r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("best_q="), std::string::npos);
    const std::string surface = slurp(path("cv.csv"));
    EXPECT_EQ(surface.substr(0, surface.find('\n')), "q\\lambda,1e-04,0.01");
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(path("cv.csv")), surface);
}

TEST_F(CliTest, BenchmarkReport) {
    const std::vector<std::string> args{"benchmark", "--scenario", "2", "--n-train", "30", "--n-test", "50",
                                        "--replications", "2", "--q-values", "1", "--lambda-values", "1e-3",
                                        "--folds", "3", "--bayes-samples", "10000", "--seed", "4", "--out",
                                        path("b.json")};
    const Result r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("fDWD"), std::string::npos);
    const std::string first = slurp(path("b.json"));
    const auto j = nlohmann::json::parse(first);
    EXPECT_EQ(j["replications"].size(), 2u);
    EXPECT_EQ(j["config"]["seed"], 4);
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(path("b.json")), first);
}
