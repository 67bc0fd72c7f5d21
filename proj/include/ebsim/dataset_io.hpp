#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>

#include "ebsim/eprb.hpp"

// Plain-text station dataset files.
//
//   # ebsim-dataset 1
//   # station 1
//   # N 3
//   # M 2
//   # angles_deg 0 45
//   # angles_rad 0 0.7853981633974483
//   # T0 1
//   # d 2
//   # seed 1234567
//   # streams source=0 settings=1 delays=3
//   # columns n m x t
//   1 2 +1 0.004139201873
//   ...
//
// Reals are written in shortest round-trip form, so read(write(ds)) == ds bit for
// bit. angles_rad is authoritative when present; files produced by converters
// may carry angles_deg only.
namespace ebsim::io {

inline constexpr int kDatasetFormatVersion = 1;

void write_dataset(std::ostream& out, const eprb::StationDataset& ds);
void write_dataset(const std::filesystem::path& path, const eprb::StationDataset& ds);

// Throws DataError (with the offending line number) for malformed input.
eprb::StationDataset read_dataset(std::istream& in);
eprb::StationDataset read_dataset(const std::filesystem::path& path);

// Streams records to disk as they are produced; the header carries N up front
// and finish() checks that exactly N records were written.
class DatasetWriter {
public:
    DatasetWriter(const std::filesystem::path& path, const eprb::StationDataset& header_only, std::uint64_t N);
    void write(const eprb::EventRecord& r);
    void finish();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t expected_;
    std::uint64_t written_ = 0;
};

std::string format_real(double v);

}  // namespace ebsim::io
