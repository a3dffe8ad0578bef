#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trustfs/types.hpp"

namespace trustfs::csv {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// Locale-independent parse of a single numeric cell; throws Error(kParse).
double parse_double(std::string_view cell);

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path);

Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace trustfs::csv
