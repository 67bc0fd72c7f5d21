#include "ebsim/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

#include "ebsim/error.hpp"

namespace ebsim::analysis {

void AnalysisConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be positive");
    if (std::isnan(W) || W < tau) throw InvalidArgument("the coincidence window W must satisfy W >= tau");
    if (!std::isfinite(delta)) throw InvalidArgument("delta must be finite");
}

std::int64_t discretize(double t, double tau) {
    if (!(tau > 0.0)) throw InvalidArgument("discretize: tau must be positive");
    return static_cast<std::int64_t>(std::ceil(t / tau));
}

WindowTest::WindowTest(const AnalysisConfig& cfg) : cfg_(cfg), infinite_(std::isinf(cfg.W)), k_(0) {
    cfg_.validate();
    if (!infinite_) k_ = discretize(cfg_.W, cfg_.tau);
}

bool WindowTest::operator()(double t1, double t2) const {
    if (infinite_) return true;
    const double shifted = t2 + cfg_.delta;
    if (cfg_.rule == WindowRule::Continuous) return std::abs(t1 - shifted) <= cfg_.W;
    const std::int64_t diff = discretize(t1, cfg_.tau) - discretize(shifted, cfg_.tau);
    return (diff < 0 ? -diff : diff) < k_;
}

// ---------------------------------------------------------------------------

CoincidenceTable::CoincidenceTable(std::size_t M1, std::size_t M2) : M1_(M1), M2_(M2), counts_(4 * M1 * M2, 0) {
    if (M1 == 0 || M2 == 0) throw InvalidArgument("coincidence table needs at least one setting per station");
}

std::size_t CoincidenceTable::slot(int x, int y, std::uint32_t m1, std::uint32_t m2) const {
    if ((x != 1 && x != -1) || (y != 1 && y != -1)) throw InvalidArgument("outcomes must be +1 or -1");
    if (m1 < 1 || m1 > M1_ || m2 < 1 || m2 > M2_) {
        throw InvalidArgument("setting index out of range: (" + std::to_string(m1) + ", " + std::to_string(m2) + ")");
    }
    const std::size_t xy = (x == 1 ? 0 : 2) + (y == 1 ? 0 : 1);
    return ((m1 - 1) * M2_ + (m2 - 1)) * 4 + xy;
}

void CoincidenceTable::add(int x, int y, std::uint32_t m1, std::uint32_t m2, std::uint64_t n) {
    counts_[slot(x, y, m1, m2)] += n;
}

std::uint64_t CoincidenceTable::count(int x, int y, std::uint32_t m1, std::uint32_t m2) const {
    return counts_[slot(x, y, m1, m2)];
}

std::uint64_t CoincidenceTable::total(std::uint32_t m1, std::uint32_t m2) const {
    const std::size_t base = slot(1, 1, m1, m2);
    return counts_[base] + counts_[base + 1] + counts_[base + 2] + counts_[base + 3];
}

std::uint64_t CoincidenceTable::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

CoincidenceCounter::CoincidenceCounter(std::size_t M1, std::size_t M2, const AnalysisConfig& cfg)
    : window_(cfg), table_(M1, M2) {}

void CoincidenceCounter::add(const EventRecord& r1, const EventRecord& r2) {
    if (window_(r1.t, r2.t)) table_.add(r1.x, r2.x, r1.m, r2.m);
}

// ---------------------------------------------------------------------------

namespace {

void require_nonempty(const StationDataset& s1, const StationDataset& s2) {
    if (s1.records.empty() || s2.records.empty()) throw InvalidArgument("both datasets must contain events");
}

// Positions of records that share an event index, in index order.
std::vector<MatchedPair> align_by_index(const StationDataset& s1, const StationDataset& s2) {
    const auto& a = s1.records;
    const auto& b = s2.records;
    if (a.size() != b.size()) {
        throw InvalidArgument("index pairing needs equal-length datasets (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    auto order = [](const std::vector<EventRecord>& recs) {
        std::vector<std::size_t> pos(recs.size());
        std::iota(pos.begin(), pos.end(), std::size_t{0});
        const bool sorted = std::is_sorted(pos.begin(), pos.end(),
                                           [&](std::size_t i, std::size_t j) { return recs[i].n < recs[j].n; });
        if (!sorted) std::sort(pos.begin(), pos.end(), [&](std::size_t i, std::size_t j) { return recs[i].n < recs[j].n; });
        return pos;
    };
    const auto pa = order(a);
    const auto pb = order(b);
    std::vector<MatchedPair> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[pa[k]].n != b[pb[k]].n || (k > 0 && a[pa[k]].n == a[pa[k - 1]].n)) {
            throw InvalidArgument("index pairing needs both datasets to hold the same distinct event indices");
        }
        out[k] = {pa[k], pb[k]};
    }
    return out;
}

std::vector<std::size_t> sorted_by_time(const std::vector<EventRecord>& recs, double shift) {
    std::vector<std::size_t> pos(recs.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::stable_sort(pos.begin(), pos.end(),
                     [&](std::size_t i, std::size_t j) { return recs[i].t + shift < recs[j].t + shift; });
    return pos;
}

// Greedy one-to-one matching: all window-passing candidates are ranked by
// |t1 - (t2 + delta)| (then by position) and accepted while both events are unused.
std::vector<MatchedPair> match_by_time(const StationDataset& s1, const StationDataset& s2, const AnalysisConfig& cfg) {
    if (std::isinf(cfg.W)) throw InvalidArgument("time matching needs a finite coincidence window");
    const WindowTest window(cfg);
    const auto& a = s1.records;
    const auto& b = s2.records;
    const double radius = cfg.rule == WindowRule::Continuous ? cfg.W : (std::ceil(cfg.W / cfg.tau) + 1.0) * cfg.tau;

    const auto order2 = sorted_by_time(b, cfg.delta);
    std::vector<double> times2(order2.size());
    for (std::size_t k = 0; k < order2.size(); ++k) times2[k] = b[order2[k]].t + cfg.delta;

    struct Candidate {
        double distance;
        std::size_t i1;
        std::size_t i2;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t1 = a[i].t;
        auto it = std::lower_bound(times2.begin(), times2.end(), t1 - radius);
        for (; it != times2.end() && *it <= t1 + radius; ++it) {
            const std::size_t j = order2[static_cast<std::size_t>(it - times2.begin())];
            if (window(t1, b[j].t)) candidates.push_back({std::abs(t1 - *it), i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
        return std::tie(l.distance, l.i1, l.i2) < std::tie(r.distance, r.i1, r.i2);
    });

    std::vector<bool> used1(a.size(), false);
    std::vector<bool> used2(b.size(), false);
    std::vector<MatchedPair> out;
    for (const auto& c : candidates) {
        if (used1[c.i1] || used2[c.i2]) continue;
        used1[c.i1] = used2[c.i2] = true;
        out.push_back({c.i1, c.i2});
    }
    std::sort(out.begin(), out.end(), [](const MatchedPair& l, const MatchedPair& r) { return l.i1 < r.i1; });
    return out;
}

}  // namespace

std::vector<MatchedPair> match_pairs(const StationDataset& s1, const StationDataset& s2, const AnalysisConfig& cfg) {
    cfg.validate();
    if (cfg.pairing == Pairing::ByTimeMatching) return match_by_time(s1, s2, cfg);

    const WindowTest window(cfg);
    auto pairs = align_by_index(s1, s2);
    std::erase_if(pairs, [&](const MatchedPair& p) { return !window(s1.records[p.i1].t, s2.records[p.i2].t); });
    return pairs;
}

CoincidenceTable count_coincidences(const StationDataset& s1, const StationDataset& s2, const AnalysisConfig& cfg) {
    CoincidenceTable table(s1.M(), s2.M());
    for (const auto& p : match_pairs(s1, s2, cfg)) {
        const auto& r1 = s1.records[p.i1];
        const auto& r2 = s2.records[p.i2];
        table.add(r1.x, r2.x, r1.m, r2.m);
    }
    return table;
}

// ---------------------------------------------------------------------------

SettingPairStats stats_from_counts(std::uint64_t cpp, std::uint64_t cpm, std::uint64_t cmp, std::uint64_t cmm) {
    SettingPairStats s;
    s.coincidences = cpp + cpm + cmp + cmm;
    if (s.coincidences == 0) return s;

    const double n = static_cast<double>(s.coincidences);
    const double pp = static_cast<double>(cpp);
    const double pm = static_cast<double>(cpm);
    const double mp = static_cast<double>(cmp);
    const double mm = static_cast<double>(cmm);
    const double e1 = (pp + pm - mp - mm) / n;
    const double e2 = (pp + mp - pm - mm) / n;
    const double e = (pp + mm - pm - mp) / n;
    s.E1 = e1;
    s.E2 = e2;
    s.E = e;
    // x^2 = y^2 = 1, so the variances reduce to 1 - E1^2 and 1 - E2^2.
    const double var = (1.0 - e1 * e1) * (1.0 - e2 * e2);
    if (var > 0.0) s.rho = (e - e1 * e2) / std::sqrt(var);
    return s;
}

SettingPairStats stats_for(const CoincidenceTable& t, std::uint32_t m1, std::uint32_t m2) {
    return stats_from_counts(t.count(1, 1, m1, m2), t.count(1, -1, m1, m2), t.count(-1, 1, m1, m2),
                             t.count(-1, -1, m1, m2));
}

CorrelationMatrix correlation_matrix(const CoincidenceTable& table, const std::vector<double>& angles1,
                                     const std::vector<double>& angles2) {
    if (angles1.size() != table.M1() || angles2.size() != table.M2()) {
        throw InvalidArgument("angle lists do not match the coincidence table");
    }
    CorrelationMatrix out{angles1, angles2, {}};
    out.E.reserve(table.M1() * table.M2());
    for (std::uint32_t m1 = 1; m1 <= table.M1(); ++m1) {
        for (std::uint32_t m2 = 1; m2 <= table.M2(); ++m2) out.E.push_back(stats_for(table, m1, m2).E);
    }
    return out;
}

ChshResult chsh(const CorrelationMatrix& E, bool keep_values) {
    const std::size_t M1 = E.angles1.size();
    const std::size_t M2 = E.angles2.size();
    if (M1 == 0 || M2 == 0 || E.E.size() != M1 * M2) throw InvalidArgument("chsh: malformed correlation matrix");

    ChshResult r;
    if (keep_values) r.values.assign(M1 * M1 * M2 * M2, std::nullopt);
    bool found = false;
    for (std::size_t a = 0; a < M1; ++a) {
        for (std::size_t b = 0; b < M1; ++b) {
            for (std::size_t c = 0; c < M2; ++c) {
                for (std::size_t d = 0; d < M2; ++d) {
                    const auto& ac = E.E[a * M2 + c];
                    const auto& ad = E.E[a * M2 + d];
                    const auto& bc = E.E[b * M2 + c];
                    const auto& bd = E.E[b * M2 + d];
                    if (!ac || !ad || !bc || !bd) {
                        ++r.skipped;
                        continue;
                    }
                    const double s = *ac - *ad + *bc + *bd;
                    ++r.evaluated;
                    if (keep_values) r.values[((a * M1 + b) * M2 + c) * M2 + d] = s;
                    if (!found || std::abs(s) > r.smax) {
                        found = true;
                        r.smax = std::abs(s);
                        r.s = s;
                        r.argmax = {a + 1, b + 1, c + 1, d + 1};
                        r.angles = {E.angles1[a], E.angles1[b], E.angles2[c], E.angles2[d]};
                    }
                }
            }
        }
    }
    if (!found) throw DataError("chsh: no setting quadruple has defined correlations");
    return r;
}

// ---------------------------------------------------------------------------

double find_delta(const StationDataset& s1, const StationDataset& s2, const DeltaSearch& search) {
    require_nonempty(s1, s2);
    if (!(search.resolution > 0.0)) throw InvalidArgument("find_delta: resolution must be positive");

    std::map<std::int64_t, std::uint64_t> bins;
    auto fill = [&](double diff) { ++bins[std::llround(diff / search.resolution)]; };

    if (search.pairing == Pairing::ByIndex) {
        for (const auto& p : align_by_index(s1, s2)) fill(s1.records[p.i1].t - s2.records[p.i2].t);
    } else {
        if (!(search.search_range > 0.0)) throw InvalidArgument("find_delta: time matching needs a search range");
        const auto& b = s2.records;
        const auto order2 = sorted_by_time(b, 0.0);
        std::vector<double> times2(order2.size());
        for (std::size_t k = 0; k < order2.size(); ++k) times2[k] = b[order2[k]].t;
        for (const auto& r : s1.records) {
            auto it = std::lower_bound(times2.begin(), times2.end(), r.t - search.search_range);
            for (; it != times2.end() && *it <= r.t + search.search_range; ++it) fill(r.t - *it);
        }
    }
    if (bins.empty()) throw DataError("find_delta: no event pairs within the search range");

    auto best = bins.begin();
    for (auto it = bins.begin(); it != bins.end(); ++it) {
        const auto key_abs = [](std::int64_t k) { return k < 0 ? -k : k; };
        if (it->second > best->second || (it->second == best->second && key_abs(it->first) < key_abs(best->first))) {
            best = it;
        }
    }
    return static_cast<double>(best->first) * search.resolution;
}

std::vector<WindowPoint> smax_vs_window(const StationDataset& s1, const StationDataset& s2,
                                        const std::vector<double>& windows, const AnalysisConfig& cfg) {
    if (windows.empty()) throw InvalidArgument("smax_vs_window: no windows given");
    if (!std::is_sorted(windows.begin(), windows.end())) throw InvalidArgument("smax_vs_window: windows must be ascending");

    std::vector<WindowPoint> curve;
    curve.reserve(windows.size());
    for (double W : windows) {
        AnalysisConfig c = cfg;
        c.W = W;
        const auto table = count_coincidences(s1, s2, c);
        WindowPoint p{W, std::nullopt, table.total()};
        try {
            p.smax = chsh(correlation_matrix(table, s1.angles, s2.angles)).smax;
        } catch (const DataError&) {
            // too few coincidences at this window: leave Smax undefined
        }
        curve.push_back(p);
    }
    return curve;
}

// ---------------------------------------------------------------------------

double Histogram::peak() const {
    if (centers.empty()) throw DataError("empty histogram has no peak");
    std::size_t best = 0;
    for (std::size_t i = 1; i < centers.size(); ++i) {
        if (normalized[i] > normalized[best] ||
            (normalized[i] == normalized[best] && std::abs(centers[i]) < std::abs(centers[best]))) {
            best = i;
        }
    }
    return centers[best];
}

std::optional<Histogram> coincidence_time_histogram(const StationDataset& s1, const StationDataset& s2,
                                                    const HistogramFilter& filter, double bin_width,
                                                    const AnalysisConfig& cfg) {
    if (!(bin_width > 0.0)) throw InvalidArgument("histogram bin width must be positive");
    auto pass = [&](const EventRecord& r1, const EventRecord& r2) {
        return (!filter.x || r1.x == *filter.x) && (!filter.y || r2.x == *filter.y) &&
               (!filter.m1 || r1.m == *filter.m1) && (!filter.m2 || r2.m == *filter.m2);
    };

    std::map<std::int64_t, std::uint64_t> bins;
    std::uint64_t entries = 0;
    for (const auto& p : match_pairs(s1, s2, cfg)) {
        const auto& r1 = s1.records[p.i1];
        const auto& r2 = s2.records[p.i2];
        if (!pass(r1, r2)) continue;
        ++bins[std::llround((r1.t - (r2.t + cfg.delta)) / bin_width)];
        ++entries;
    }
    if (entries == 0) return std::nullopt;

    Histogram h;
    h.bin_width = bin_width;
    h.entries = entries;
    const std::int64_t lo = bins.begin()->first;
    const std::int64_t hi = bins.rbegin()->first;
    for (std::int64_t k = lo; k <= hi; ++k) {
        const auto it = bins.find(k);
        h.centers.push_back(static_cast<double>(k) * bin_width);
        h.normalized.push_back(it == bins.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(entries));
    }
    return h;
}

}  // namespace ebsim::analysis
