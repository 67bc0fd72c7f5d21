#include "ebsim/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string_view>
#include <vector>

#include "ebsim/error.hpp"
#include "ebsim/random.hpp"

namespace ebsim::io {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t j = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > j) out.push_back(s.substr(j, i - j));
    }
    return out;
}

template <class T>
bool parse_number(std::string_view s, T& value) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

template <class T>
T number_or_throw(std::string_view s, const char* what, std::size_t line) {
    T v{};
    if (!parse_number(s, v)) throw DataError(std::string("bad ") + what + " '" + std::string(s) + "'", line);
    return v;
}

void write_header(std::ostream& out, const eprb::StationDataset& ds, std::uint64_t N) {
    out << "# ebsim-dataset " << kDatasetFormatVersion << '\n';
    out << "# station " << ds.station << '\n';
    out << "# N " << N << '\n';
    out << "# M " << ds.angles.size() << '\n';
    out << "# angles_deg";
    for (double a : ds.angles) out << ' ' << format_real(a * kDegPerRad);
    out << "\n# angles_rad";
    for (double a : ds.angles) out << ' ' << format_real(a);
    out << "\n# T0 " << format_real(ds.T0) << '\n';
    out << "# d " << format_real(ds.d) << '\n';
    out << "# seed " << ds.seed << '\n';
    const auto settings = ds.station == 1 ? StreamRole::Settings1 : StreamRole::Settings2;
    const auto delays = ds.station == 1 ? StreamRole::Delays1 : StreamRole::Delays2;
    out << "# streams source=" << static_cast<std::uint64_t>(StreamRole::Source)
        << " settings=" << static_cast<std::uint64_t>(settings) << " delays=" << static_cast<std::uint64_t>(delays)
        << '\n';
    out << "# columns n m x t\n";
}

void write_record(std::ostream& out, const eprb::EventRecord& r) {
    out << r.n << ' ' << r.m << ' ' << (r.x > 0 ? "+1" : "-1") << ' ' << format_real(r.t) << '\n';
}

}  // namespace

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void write_dataset(std::ostream& out, const eprb::StationDataset& ds) {
    write_header(out, ds, ds.records.size());
    for (const auto& r : ds.records) write_record(out, r);
}

void write_dataset(const std::filesystem::path& path, const eprb::StationDataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_dataset(out, ds);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

eprb::StationDataset read_dataset(std::istream& in) {
    eprb::StationDataset ds;
    std::uint64_t N = 0;
    std::size_t M = 0;
    bool have_version = false, have_N = false, have_M = false, have_rad = false;
    std::vector<double> deg;

    std::string text;
    std::size_t line = 0;
    bool in_header = true;
    while (std::getline(in, text)) {
        ++line;
        std::string_view s(text);
        if (s.empty() || s.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        if (s.front() == '#') {
            if (!in_header) throw DataError("header line after the first record", line);
            const auto f = split_ws(s.substr(1));
            if (f.empty()) continue;
            const std::string_view key = f[0];
            if (key == "ebsim-dataset") {
                if (f.size() != 2 || number_or_throw<int>(f[1], "version", line) != kDatasetFormatVersion) {
                    throw DataError("unsupported dataset format version", line);
                }
                have_version = true;
            } else if (key == "station") {
                ds.station = number_or_throw<int>(f.size() == 2 ? f[1] : "", "station", line);
                if (ds.station != 1 && ds.station != 2) throw DataError("station must be 1 or 2", line);
            } else if (key == "N") {
                N = number_or_throw<std::uint64_t>(f.size() == 2 ? f[1] : "", "N", line);
                have_N = true;
            } else if (key == "M") {
                M = number_or_throw<std::size_t>(f.size() == 2 ? f[1] : "", "M", line);
                have_M = true;
            } else if (key == "angles_deg") {
                deg.clear();
                for (std::size_t i = 1; i < f.size(); ++i) deg.push_back(number_or_throw<double>(f[i], "angle", line));
            } else if (key == "angles_rad") {
                ds.angles.clear();
                for (std::size_t i = 1; i < f.size(); ++i) {
                    ds.angles.push_back(number_or_throw<double>(f[i], "angle", line));
                }
                have_rad = true;
            } else if (key == "T0") {
                ds.T0 = number_or_throw<double>(f.size() == 2 ? f[1] : "", "T0", line);
                if (!(ds.T0 > 0.0)) throw DataError("T0 must be positive", line);
            } else if (key == "d") {
                ds.d = number_or_throw<double>(f.size() == 2 ? f[1] : "", "d", line);
            } else if (key == "seed") {
                ds.seed = number_or_throw<std::uint64_t>(f.size() == 2 ? f[1] : "", "seed", line);
            }
            // "streams", "columns" and unknown comment lines are informational.
            continue;
        }

        if (in_header) {
            in_header = false;
            if (!have_version) throw DataError("missing '# ebsim-dataset' header", line);
            if (!have_N || !have_M) throw DataError("header must declare N and M", line);
            if (!have_rad) {
                ds.angles.clear();
                for (double a : deg) ds.angles.push_back(a / (180.0 / std::numbers::pi));
            }
            if (ds.angles.size() != M || M == 0) throw DataError("angle list does not match M", line);
            ds.records.reserve(N);
        }

        const auto f = split_ws(s);
        if (f.size() != 4) throw DataError("expected 4 fields (n m x t), got " + std::to_string(f.size()), line);
        eprb::EventRecord r;
        r.n = number_or_throw<std::uint64_t>(f[0], "event index", line);
        const auto m = number_or_throw<std::uint64_t>(f[1], "setting index", line);
        if (m < 1 || m > M) throw DataError("setting index " + std::to_string(m) + " outside 1.." + std::to_string(M), line);
        r.m = static_cast<std::uint32_t>(m);
        r.x = number_or_throw<int>(f[2], "outcome", line);
        if (r.x != 1 && r.x != -1) throw DataError("outcome must be +1 or -1", line);
        r.t = number_or_throw<double>(f[3], "time tag", line);
        if (!(r.t >= 0.0 && r.t <= ds.T0)) throw DataError("time tag outside [0, T0]", line);
        if (!ds.records.empty() && r.n <= ds.records.back().n) throw DataError("event indices must increase", line);
        r.gamma = ds.angles[r.m - 1];
        ds.records.push_back(r);
    }
    if (in_header) {
        if (!have_version) throw DataError("missing '# ebsim-dataset' header");
        if (!have_N || !have_M) throw DataError("header must declare N and M");
        if (!have_rad) {
            ds.angles.clear();
            for (double a : deg) ds.angles.push_back(a / (180.0 / std::numbers::pi));
        }
        if (ds.angles.size() != M || M == 0) throw DataError("angle list does not match M");
    }
    if (ds.records.size() != N) {
        throw DataError("header declares N = " + std::to_string(N) + " but " + std::to_string(ds.records.size()) +
                        " records were read");
    }
    return ds;
}

eprb::StationDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_dataset(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path, const eprb::StationDataset& header_only,
                             std::uint64_t N)
    : path_(path), out_(path), expected_(N) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(out_, header_only, N);
}

void DatasetWriter::write(const eprb::EventRecord& r) {
    write_record(out_, r);
    ++written_;
}

void DatasetWriter::finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
    if (written_ != expected_) {
        throw std::runtime_error(path_.string() + ": wrote " + std::to_string(written_) + " records, header says " +
                                 std::to_string(expected_));
    }
    out_.close();
}

}  // namespace ebsim::io
