#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ebsim/eprb.hpp"

// Post-hoc analysis of two station datasets: coincidence identification,
// single- and two-particle averages, CHSH maximization, time-shift search,
// window sweeps and time-difference histograms.
namespace ebsim::analysis {

using eprb::EventRecord;
using eprb::StationDataset;

enum class Pairing {
    ByIndex,         // event n at station 1 pairs with event n at station 2
    ByTimeMatching,  // greedy one-to-one nearest-neighbour matching in time
};

enum class WindowRule {
    Discretized,  // |ceil(t1/tau) - ceil((t2 + delta)/tau)| < ceil(W/tau)
    Continuous,   // |t1 - (t2 + delta)| <= W
};

struct AnalysisConfig {
    double tau = 0.00025;
    double W = 0.00025;  // may be +infinity: every candidate pair is coincident
    double delta = 0.0;  // added to station-2 time tags before the window test
    Pairing pairing = Pairing::ByIndex;
    WindowRule rule = WindowRule::Discretized;

    // Throws InvalidArgument unless 0 < tau <= W and delta is finite.
    void validate() const;
};

// ceil(t / tau). Throws InvalidArgument for tau <= 0.
std::int64_t discretize(double t, double tau);

// Window test for one candidate pair; t2 is the unshifted station-2 tag.
class WindowTest {
public:
    explicit WindowTest(const AnalysisConfig& cfg);
    bool operator()(double t1, double t2) const;

private:
    AnalysisConfig cfg_;
    bool infinite_;
    std::int64_t k_;
};

/// Counts C_xy(m, m') for outcomes x, y in {-1, +1} and 1-based setting indices.
class CoincidenceTable {
public:
    CoincidenceTable(std::size_t M1, std::size_t M2);

    void add(int x, int y, std::uint32_t m1, std::uint32_t m2, std::uint64_t n = 1);
    std::uint64_t count(int x, int y, std::uint32_t m1, std::uint32_t m2) const;
    std::uint64_t total(std::uint32_t m1, std::uint32_t m2) const;
    std::uint64_t total() const;

    std::size_t M1() const noexcept { return M1_; }
    std::size_t M2() const noexcept { return M2_; }
    bool operator==(const CoincidenceTable&) const = default;

private:
    std::size_t slot(int x, int y, std::uint32_t m1, std::uint32_t m2) const;

    std::size_t M1_;
    std::size_t M2_;
    std::vector<std::uint64_t> counts_;
};

// Streaming ByIndex counter: feed pairs that share an event index.
class CoincidenceCounter {
public:
    CoincidenceCounter(std::size_t M1, std::size_t M2, const AnalysisConfig& cfg);

    void add(const EventRecord& r1, const EventRecord& r2);
    const CoincidenceTable& table() const noexcept { return table_; }

private:
    WindowTest window_;
    CoincidenceTable table_;
};

struct MatchedPair {
    std::size_t i1 = 0;  // position in station-1 records
    std::size_t i2 = 0;  // position in station-2 records
};

// Coincident pairs under cfg. ByIndex requires both datasets to hold the same set
// of event indices (any order); ByTimeMatching requires a finite window.
std::vector<MatchedPair> match_pairs(const StationDataset& s1, const StationDataset& s2,
                                     const AnalysisConfig& cfg);

CoincidenceTable count_coincidences(const StationDataset& s1, const StationDataset& s2,
                                    const AnalysisConfig& cfg);

// Averages for one setting pair. Empty optionals mark undefined values: all of
// them when there are no coincidences, rho alone when |E1| = 1 or |E2| = 1.
struct SettingPairStats {
    std::uint64_t coincidences = 0;
    std::optional<double> E1;
    std::optional<double> E2;
    std::optional<double> E;
    std::optional<double> rho;
};

SettingPairStats stats_from_counts(std::uint64_t cpp, std::uint64_t cpm, std::uint64_t cmp, std::uint64_t cmm);
SettingPairStats stats_for(const CoincidenceTable& table, std::uint32_t m1, std::uint32_t m2);

// Two-particle averages E(alpha_m, beta_m') on the setting grid.
struct CorrelationMatrix {
    std::vector<double> angles1;
    std::vector<double> angles2;
    std::vector<std::optional<double>> E;  // row-major, M1 x M2

    std::optional<double> at(std::size_t m1, std::size_t m2) const { return E[(m1 - 1) * angles2.size() + (m2 - 1)]; }
};

CorrelationMatrix correlation_matrix(const CoincidenceTable& table, const std::vector<double>& angles1,
                                     const std::vector<double>& angles2);

struct ChshResult {
    double smax = 0.0;                  // largest |S| over all evaluated quadruples
    double s = 0.0;                     // signed S at the maximizing quadruple
    std::array<std::size_t, 4> argmax{};  // 1-based indices (a, b) at station 1, (c, d) at station 2
    std::array<double, 4> angles{};
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    // S for every ordered quadruple, index ((a*M1 + b)*M2 + c)*M2 + d with 0-based
    // indices; filled only on request. Empty optionals mark skipped quadruples.
    std::vector<std::optional<double>> values;
};

// Exhaustive search over ordered quadruples. Quadruples that need an undefined
// E are skipped; throws DataError if nothing could be evaluated.
ChshResult chsh(const CorrelationMatrix& E, bool keep_values = false);

struct DeltaSearch {
    double resolution = 0.001;
    Pairing pairing = Pairing::ByIndex;
    double search_range = 0.0;  // ByTimeMatching: largest |t1 - t2| considered
};

// Centre of the most populated bin of the t1 - t2 histogram (bins centred on
// multiples of the resolution). Ties go to the centre closest to zero.
double find_delta(const StationDataset& s1, const StationDataset& s2, const DeltaSearch& search);

struct WindowPoint {
    double W = 0.0;
    std::optional<double> smax;
    std::uint64_t coincidences = 0;
};

std::vector<WindowPoint> smax_vs_window(const StationDataset& s1, const StationDataset& s2,
                                        const std::vector<double>& windows, const AnalysisConfig& cfg);

struct HistogramFilter {
    std::optional<int> x;
    std::optional<int> y;
    std::optional<std::uint32_t> m1;
    std::optional<std::uint32_t> m2;
};

struct Histogram {
    double bin_width = 0.0;
    std::vector<double> centers;
    std::vector<double> normalized;  // sums to 1
    std::uint64_t entries = 0;

    double peak() const;  // centre of the highest bin, ties to the one closest to zero
};

// Normalized histogram of t1 - (t2 + delta) over coincident pairs passing the filter.
// Empty optional when no pair passes.
std::optional<Histogram> coincidence_time_histogram(const StationDataset& s1, const StationDataset& s2,
                                                    const HistogramFilter& filter, double bin_width,
                                                    const AnalysisConfig& cfg);

}  // namespace ebsim::analysis
