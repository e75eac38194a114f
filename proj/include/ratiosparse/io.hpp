#pragma once

#include "ratiosparse/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ratiosparse::io {

// On-disk instance layout (one directory per instance):
//
//   instance.json   header: format tag, id, m, n, noise_radius,
//                   ground_truth_support (sorted indices or null), file names
//   A.csv           m lines, n comma-separated values per line (row-major)
//   b.csv           m lines, one value per line
//   x_star.csv      n lines, one value per line (only with ground truth)
//
// All values are written with 17 significant digits, so a save/load cycle
// reproduces every double exactly.

inline constexpr const char* kInstanceFormat = "ratiosparse-instance/1";

void save_instance(const ProblemInstance& instance, const std::filesystem::path& dir);
ProblemInstance load_instance(const std::filesystem::path& dir);

/// "%.17g" formatting of a double.
std::string format_double(double v);

void write_matrix_csv(std::ostream& os, const MatrixRef& A);
void write_vector_csv(std::ostream& os, const VectorRef& v);
Matrix read_matrix_csv(const std::filesystem::path& path);
Vector read_vector_csv(const std::filesystem::path& path);

}  // namespace ratiosparse::io
