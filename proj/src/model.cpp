#include "fdwd/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fdwd/errors.hpp"
#include "fdwd/io.hpp"

namespace fdwd {

using nlohmann::json;

std::pair<LabelMap, Eigen::VectorXd> LabelMap::encode(const std::vector<std::string>& raw) {
    const std::set<std::string> distinct(raw.begin(), raw.end());
    if (distinct.size() != 2) {
        throw DegenerateLabels("expected exactly two distinct labels, got " + std::to_string(distinct.size()));
    }
    LabelMap map;
    const bool signed_coding = (distinct.count("-1") == 1) && (distinct.count("1") + distinct.count("+1") == 1);
    if (signed_coding) {
        map.negative = "-1";
        map.positive = distinct.count("1") ? "1" : "+1";
    } else {
        map.negative = *distinct.begin();
        map.positive = *distinct.rbegin();
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i) y[static_cast<Eigen::Index>(i)] = raw[i] == map.positive ? 1.0 : -1.0;
    return {map, y};
}

DwdModel::DwdModel(double q, double lambda, double alpha, Eigen::Vector2d d, Eigen::VectorXd gamma,
                   Standardization standardization, Eigen::VectorXd c, GridPtr grid, Eigen::MatrixXd train_curves,
                   LabelMap labels, FitDiagnostics diagnostics)
    : q_(q), lambda_(lambda), alpha_(alpha), d_(std::move(d)), gamma_(std::move(gamma)),
      stdz_(std::move(standardization)), c_(std::move(c)), grid_(std::move(grid)), curves_(std::move(train_curves)),
      labels_(std::move(labels)), diag_(diagnostics) {
    if (!grid_) throw InvalidData("model has no grid");
    if (c_.size() != curves_.rows()) throw ShapeError("c length must equal the number of stored training curves");
    if (static_cast<std::size_t>(curves_.cols()) != grid_->size()) throw ShapeError("stored curves do not match grid");
    if (stdz_.size() != gamma_.size() || stdz_.scale.size() != gamma_.size()) {
        throw ShapeError("standardization does not match gamma");
    }
    if (labels_.negative == labels_.positive) throw DegenerateLabels("label map must name two distinct labels");
    kernel_ = std::make_shared<GridKernel>(grid_);
    weighted_comb_ = grid_->weights_vec().cwiseProduct(curves_.transpose() * c_);
}

double DwdModel::decision_score(const SampledCurve& curve, const std::optional<Eigen::VectorXd>& scalars) const {
    const bool given = scalars.has_value() && scalars->size() > 0;
    if (num_scalars() > 0 && !given) {
        throw CovariateMismatch("model expects " + std::to_string(num_scalars()) + " scalar covariates");
    }
    if (num_scalars() == 0 && given) throw CovariateMismatch("model was fitted without scalar covariates");

    const SampledCurve x = resample(curve, grid_);
    const Eigen::RowVector2d s = compute_S(*grid_, x.values.transpose()).row(0);
    const Eigen::VectorXd r = cross_gram(*kernel_, curves_, x);
    double score = alpha_ + s.dot(d_) + r.dot(c_);
    if (num_scalars() > 0) score += stdz_.apply(Eigen::VectorXd(*scalars)).dot(gamma_);
    return score;
}

int DwdModel::predict_sign(const SampledCurve& curve, const std::optional<Eigen::VectorXd>& scalars) const {
    return decision_score(curve, scalars) >= 0.0 ? 1 : -1;
}

const std::string& DwdModel::predict(const SampledCurve& curve, const std::optional<Eigen::VectorXd>& scalars) const {
    return labels_.decode(predict_sign(curve, scalars));
}

Eigen::VectorXd DwdModel::decision_scores(const GridPtr& grid, const Eigen::MatrixXd& curves,
                                          const Eigen::MatrixXd& scalars) const {
    if (num_scalars() > 0 && scalars.rows() != curves.rows()) {
        throw CovariateMismatch("need one row of " + std::to_string(num_scalars()) + " scalar covariates per curve");
    }
    if (num_scalars() > 0 && scalars.cols() != num_scalars()) {
        throw CovariateMismatch("expected " + std::to_string(num_scalars()) + " scalar covariates, got " +
                                std::to_string(scalars.cols()));
    }
    if (num_scalars() == 0 && scalars.size() > 0) throw CovariateMismatch("model was fitted without scalar covariates");
    Eigen::VectorXd out(curves.rows());
    for (Eigen::Index i = 0; i < curves.rows(); ++i) {
        const SampledCurve x(grid, curves.row(i).transpose());
        std::optional<Eigen::VectorXd> z;
        if (num_scalars() > 0) z = scalars.row(i).transpose();
        out[i] = decision_score(x, z);
    }
    return out;
}

double DwdModel::beta_eval(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw OutOfDomain("beta is defined on [0,1]");
    const auto& pts = grid_->points();
    double acc = d_[0] * NullSpaceBasis::psi1(t) + d_[1] * NullSpaceBasis::psi2(t);
    for (std::size_t b = 0; b < pts.size(); ++b) acc += kernel(t, pts[b]) * weighted_comb_[static_cast<Eigen::Index>(b)];
    return acc;
}

DwdModel fit(const LabeledDataset& data, double q, double lambda, const FitOptions& options) {
    if (data.size() < 2) throw DegenerateLabels("need at least two subjects");
    const auto& y = data.labels();
    if ((y.array() > 0).all() || (y.array() < 0).all()) throw DegenerateLabels("training labels contain one class");

    SolverConfig cfg;
    cfg.loss = LossParam(q);
    cfg.lambda = lambda;
    cfg.max_iter = options.max_iter;
    cfg.tol = options.tol;
    cfg.ridge_scale = options.ridge_scale;
    cfg.validate();

    const Standardization stdz = Standardization::fit(data.scalars());
    const LabeledDataset std_data(data.grid(), data.curves(), data.labels(), stdz.apply(data.scalars()));
    const KernelSystem sys = KernelSystem::build(std_data);
    const SolverState st = solve(sys, std_data, cfg);

    FitDiagnostics diag{st.iteration, st.objective, st.converged};
    return DwdModel(q, lambda, st.alpha, st.d, st.gamma, stdz, st.c, data.grid(), data.curves(), options.labels,
                    diag);
}

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

[[noreturn]] void format_error(const std::string& msg) { throw ModelFormatError("model file: " + msg); }

const json& field(const json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name)) format_error(std::string("missing field '") + name + "'");
    return obj.at(name);
}

double number_field(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_number()) format_error(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

Eigen::VectorXd vector_field(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_array()) format_error(std::string("field '") + name + "' must be an array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) format_error(std::string("field '") + name + "' entry " + std::to_string(i) + " is not a number");
        out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
}

std::string string_field(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_string()) format_error(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

void save(const DwdModel& m, std::ostream& out) {
    json curves = json::array();
    for (Eigen::Index i = 0; i < m.train_curves().rows(); ++i) curves.push_back(vec_json(m.train_curves().row(i).transpose()));
    json j;
    j["format"] = "fdwd-model";
    j["format_version"] = kModelFormatVersion;
    j["q"] = m.q();
    j["lambda"] = m.lambda();
    j["alpha"] = m.alpha();
    j["d"] = vec_json(m.d());
    j["gamma"] = vec_json(m.gamma());
    j["standardization"] = {{"mean", vec_json(m.standardization().mean)},
                            {"scale", vec_json(m.standardization().scale)}};
    j["c"] = vec_json(m.c());
    j["grid"] = m.grid()->points();
    j["curves"] = std::move(curves);
    j["label_map"] = {{"negative", m.label_map().negative}, {"positive", m.label_map().positive}};
    j["diagnostics"] = {{"iterations", m.diagnostics().iterations},
                        {"objective", m.diagnostics().objective},
                        {"converged", m.diagnostics().converged}};
    out << j.dump(1) << '\n';
}

DwdModel load(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        format_error(std::string("not valid JSON (") + e.what() + ")");
    }
    if (!j.is_object()) format_error("top level must be an object");
    if (string_field(j, "format") != "fdwd-model") format_error("field 'format' must be \"fdwd-model\"");
    const json& ver = field(j, "format_version");
    if (!ver.is_number_integer() || ver.get<int>() != kModelFormatVersion) {
        format_error("unsupported format_version " + ver.dump() + " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    const double q = number_field(j, "q");
    const double lambda = number_field(j, "lambda");
    const double alpha = number_field(j, "alpha");
    const Eigen::VectorXd d = vector_field(j, "d");
    if (d.size() != 2) format_error("field 'd' must have 2 entries");
    const Eigen::VectorXd gamma = vector_field(j, "gamma");
    const json& sj = field(j, "standardization");
    Standardization stdz{vector_field(sj, "mean"), vector_field(sj, "scale")};
    if (stdz.mean.size() != gamma.size() || stdz.scale.size() != gamma.size()) {
        format_error("field 'standardization' does not match 'gamma' length");
    }
    const Eigen::VectorXd c = vector_field(j, "c");
    const Eigen::VectorXd pts = vector_field(j, "grid");
    GridPtr grid;
    try {
        grid = make_grid(std::span<const double>(pts.data(), static_cast<std::size_t>(pts.size())));
    } catch (const InvalidGrid& e) {
        format_error(std::string("field 'grid': ") + e.what());
    }
    const json& cj = field(j, "curves");
    if (!cj.is_array()) format_error("field 'curves' must be an array");
    if (static_cast<Eigen::Index>(cj.size()) != c.size()) format_error("field 'curves' row count does not match 'c'");
    Eigen::MatrixXd curves(c.size(), pts.size());
    for (std::size_t i = 0; i < cj.size(); ++i) {
        if (!cj[i].is_array() || static_cast<Eigen::Index>(cj[i].size()) != pts.size()) {
            format_error("field 'curves' row " + std::to_string(i) + " does not match the grid");
        }
        for (std::size_t k = 0; k < cj[i].size(); ++k) {
            if (!cj[i][k].is_number()) format_error("field 'curves' has a non-numeric entry");
            curves(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cj[i][k].get<double>();
        }
    }
    const json& lj = field(j, "label_map");
    LabelMap labels{string_field(lj, "negative"), string_field(lj, "positive")};
    const json& dj = field(j, "diagnostics");
    FitDiagnostics diag;
    diag.iterations = static_cast<int>(number_field(dj, "iterations"));
    diag.objective = number_field(dj, "objective");
    const json& conv = field(dj, "converged");
    if (!conv.is_boolean()) format_error("field 'converged' must be a boolean");
    diag.converged = conv.get<bool>();

    try {
        return DwdModel(q, lambda, alpha, d, gamma, std::move(stdz), c, std::move(grid), std::move(curves),
                        std::move(labels), diag);
    } catch (const ModelFormatError&) {
        throw;
    } catch (const Error& e) {
        format_error(e.what());
    }
}

void save_file(const DwdModel& model, const std::string& path) {
    std::ostringstream ss;
    save(model, ss);
    atomic_write(path, ss.str());
}

DwdModel load_file(const std::string& path) {
    std::istringstream in(read_text_file(path));
    return load(in);
}

}  // namespace fdwd
