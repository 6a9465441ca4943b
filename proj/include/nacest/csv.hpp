#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nacest/dependence.hpp"

namespace nacest {

// Comma separated, header row of column names, '.' decimals, no missing
// cells. Throws DataError.
Dataset parse_csv(const std::string& text);
Dataset read_csv(const std::string& path);

void write_csv(std::ostream& out, const Eigen::MatrixXd& values,
               const std::vector<std::string>& header);
void write_csv(std::ostream& out, const Dataset& data);
// Square matrix with a leading label column.
void write_matrix_csv(std::ostream& out, const DependenceMatrix& m);

}  // namespace nacest
