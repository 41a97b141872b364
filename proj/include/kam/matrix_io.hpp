#pragma once

#include <filesystem>

#include "kam/matrix.hpp"

namespace kam {

// Binary matrix dump: "KMAT", uint32 dtype (1 = float64), uint64 rows,
// uint64 cols, then rows*cols float64 values in column-major order. All
// fields little-endian.
void write_matrix(const std::filesystem::path& path, const Matrix<double>& m);
Matrix<double> read_matrix(const std::filesystem::path& path);

}  // namespace kam
