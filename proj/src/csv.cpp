#include "ebsim/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "ebsim/dataset_io.hpp"
#include "ebsim/error.hpp"

namespace ebsim::io {

void emit_curve(std::ostream& out, std::string_view title, const std::vector<std::string>& columns,
                const std::vector<CsvRow>& rows, const config::RunConfig& cfg) {
    if (rows.empty()) throw InvalidArgument("emit_curve: no points to write");
    for (const auto& row : rows) {
        if (row.size() != columns.size()) throw InvalidArgument("emit_curve: row width does not match the columns");
    }

    out << "# ebsim " << title << '\n';
    out << "# config-digest " << config::digest(cfg) << '\n';
    std::istringstream canon(config::canonical_text(cfg));
    for (std::string line; std::getline(canon, line);) out << "# config " << line << '\n';

    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << (row[i] ? format_real(*row[i]) : std::string("NA"));
        }
        out << '\n';
    }
}

void emit_curve(const std::filesystem::path& path, std::string_view title, const std::vector<std::string>& columns,
                const std::vector<CsvRow>& rows, const config::RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    emit_curve(out, title, columns, rows, cfg);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace ebsim::io
