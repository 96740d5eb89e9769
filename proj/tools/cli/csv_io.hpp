#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ikd/types.hpp"

namespace ikd::cli {

// Headerless, row-major CSV with '.' decimals and a trailing newline on every
// row. Values are printed with 17 significant digits so they read back exactly.

std::string format_double(double value);

void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// Throws Error(kData) naming the file and line on ragged rows or bad numbers.
Matrix read_matrix(const std::filesystem::path& path);

/// One integer label per line (a single-column CSV).
std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Writes `text` verbatim, throwing Error(kData) with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ikd::cli
