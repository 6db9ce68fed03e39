#include "fdwd/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "fdwd/errors.hpp"
#include "fdwd/util.hpp"

namespace fdwd {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_real(std::string_view field, const std::string& where) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw InvalidData(where + ": cannot parse '" + std::string(field) + "' as a number");
    }
    if (!std::isfinite(v)) throw InvalidData(where + ": value is not finite");
    return v;
}

std::vector<double> parse_row(const std::string& line, const std::string& where) {
    std::vector<double> out;
    std::string_view rest(line);
    std::size_t col = 1;
    while (true) {
        const auto pos = rest.find(',');
        out.push_back(parse_real(rest.substr(0, pos), where + ", column " + std::to_string(col)));
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 1);
        ++col;
    }
    return out;
}

// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> data_lines(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (trim(line).empty()) continue;
        lines.emplace_back(no, line);
    }
    return lines;
}

std::string loc(const std::string& path, std::size_t line) { return path + ":" + std::to_string(line); }

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path + "'");
    return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("error writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path + "'");
    }
}

CurveTable read_curves_csv(const std::string& path) {
    const auto lines = data_lines(path);
    if (lines.empty()) throw InvalidData(path + ": curves file is empty");
    const auto header = parse_row(lines[0].second, loc(path, lines[0].first));
    if (lines.size() < 2) throw InvalidData(path + ": curves file has a grid row but no curves");

    GridPtr grid;
    try {
        grid = make_grid(rescale_to_unit(header));
    } catch (const InvalidGrid& e) {
        throw InvalidGrid(loc(path, lines[0].first) + ": " + e.what());
    }
    const auto m = static_cast<Eigen::Index>(header.size());
    Eigen::MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1), m);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto row = parse_row(lines[r].second, loc(path, lines[r].first));
        if (static_cast<Eigen::Index>(row.size()) != m) {
            throw InvalidData(loc(path, lines[r].first) + ": expected " + std::to_string(m) + " values, got " +
                              std::to_string(row.size()));
        }
        for (Eigen::Index j = 0; j < m; ++j) values(static_cast<Eigen::Index>(r - 1), j) = row[static_cast<std::size_t>(j)];
    }
    return {std::move(grid), std::move(values)};
}

Eigen::VectorXd read_labels_csv(const std::string& path) {
    const auto lines = data_lines(path);
    if (lines.empty()) throw InvalidData(path + ": labels file is empty");
    Eigen::VectorXd y(static_cast<Eigen::Index>(lines.size()));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view f = trim(lines[i].second);
        if (!f.empty() && f.front() == '+') f.remove_prefix(1);
        int v = 0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || (v != 1 && v != -1)) {
            throw InvalidData(loc(path, lines[i].first) + ": label must be -1 or 1, got '" +
                              std::string(trim(lines[i].second)) + "'");
        }
        y[static_cast<Eigen::Index>(i)] = v;
    }
    return y;
}

Eigen::MatrixXd read_scalars_csv(const std::string& path) {
    const auto lines = data_lines(path);
    if (lines.empty()) throw InvalidData(path + ": scalars file is empty");
    std::vector<std::vector<double>> rows;
    for (const auto& [no, line] : lines) {
        rows.push_back(parse_row(line, loc(path, no)));
        if (rows.back().size() != rows.front().size()) {
            throw InvalidData(loc(path, no) + ": expected " + std::to_string(rows.front().size()) + " values");
        }
    }
    Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return z;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string curves_to_csv(const Grid& grid, const Eigen::MatrixXd& curves) {
    return matrix_to_csv(grid.points_vec().transpose()) + matrix_to_csv(curves);
}

std::string labels_to_csv(const Eigen::VectorXd& labels) {
    std::string out;
    for (Eigen::Index i = 0; i < labels.size(); ++i) out += labels[i] > 0 ? "1\n" : "-1\n";
    return out;
}

}  // namespace fdwd
