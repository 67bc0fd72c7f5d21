#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ebsim/config.hpp"

namespace ebsim::io {

using CsvRow = std::vector<std::optional<double>>;

/// Writes a CSV curve. The file opens with comment lines carrying the title,
/// the config digest and the full canonical config, followed by the column
/// header and one line per row. Undefined cells are written as NA.
/// Throws InvalidArgument for an empty curve or ragged rows and
/// std::runtime_error naming the path on I/O failure.
void emit_curve(const std::filesystem::path& path, std::string_view title, const std::vector<std::string>& columns,
                const std::vector<CsvRow>& rows, const config::RunConfig& cfg);

void emit_curve(std::ostream& out, std::string_view title, const std::vector<std::string>& columns,
                const std::vector<CsvRow>& rows, const config::RunConfig& cfg);

}  // namespace ebsim::io
