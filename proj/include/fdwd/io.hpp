#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdwd/curves.hpp"

namespace fdwd {

struct CurveTable {
    GridPtr grid;
    Eigen::MatrixXd values;  // one curve per row
};

// First row: time stamps (rescaled onto [0,1] if they fall outside it);
// every following row: one curve. Parse problems raise ValidationError with
// the offending line number; unreadable files raise IoError.
CurveTable read_curves_csv(const std::string& path);
// One -1/+1 integer per line.
Eigen::VectorXd read_labels_csv(const std::string& path);
// One row of p reals per subject.
Eigen::MatrixXd read_scalars_csv(const std::string& path);

std::string read_text_file(const std::string& path);
// Writes to a sibling temporary and renames it over path.
void atomic_write(const std::string& path, const std::string& content);

std::string curves_to_csv(const Grid& grid, const Eigen::MatrixXd& curves);
std::string labels_to_csv(const Eigen::VectorXd& labels);
std::string matrix_to_csv(const Eigen::MatrixXd& m);

}  // namespace fdwd
