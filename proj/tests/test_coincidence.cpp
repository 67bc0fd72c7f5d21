#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "ebsim/coincidence.hpp"
#include "ebsim/error.hpp"
#include "ebsim/quantum.hpp"

using namespace ebsim;
using namespace ebsim::analysis;
using eprb::EventRecord;
using eprb::StationDataset;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

StationDataset make(int station, std::vector<double> angles, std::vector<EventRecord> recs) {
    StationDataset ds;
    ds.station = station;
    ds.angles = std::move(angles);
    ds.records = std::move(recs);
    return ds;
}

std::pair<StationDataset, StationDataset> simulate(std::uint64_t events, std::vector<double> a1, std::vector<double> a2,
                                                   double d, std::uint64_t seed) {
    eprb::ExperimentConfig cfg;
    cfg.events = events;
    cfg.station1 = {1, std::move(a1), 1.0, d};
    cfg.station2 = {2, std::move(a2), 1.0, d};
    cfg.seed = seed;
    return eprb::run_experiment(cfg);
}

// Correlation written as the general covariance over the coincident pairs,
// without using x^2 = y^2 = 1.
std::optional<double> rho_general(std::uint64_t cpp, std::uint64_t cpm, std::uint64_t cmp, std::uint64_t cmm) {
    std::vector<std::pair<double, double>> v;
    v.insert(v.end(), cpp, {1, 1});
    v.insert(v.end(), cpm, {1, -1});
    v.insert(v.end(), cmp, {-1, 1});
    v.insert(v.end(), cmm, {-1, -1});
    if (v.empty()) return std::nullopt;
    const double n = static_cast<double>(v.size());
    double mx = 0, my = 0, mxy = 0, mxx = 0, myy = 0;
    for (auto [x, y] : v) {
        mx += x / n;
        my += y / n;
        mxy += x * y / n;
        mxx += x * x / n;
        myy += y * y / n;
    }
    const double vx = mxx - mx * mx;
    const double vy = myy - my * my;
    if (vx <= 1e-15 || vy <= 1e-15) return std::nullopt;
    return (mxy - mx * my) / std::sqrt(vx * vy);
}

}  // namespace

TEST_CASE("analysis: discretize") {
    CHECK(discretize(0.0, 0.05) == 0);
    CHECK(discretize(0.10, 0.05) == 2);
    CHECK(discretize(0.101, 0.05) == 3);
    CHECK(discretize(0.00025, 0.00025) == 1);
    CHECK_THROWS_AS(discretize(1.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(discretize(1.0, -1.0), InvalidArgument);
}

TEST_CASE("analysis: configuration checks") {
    AnalysisConfig c;
    CHECK_NOTHROW(c.validate());
    c.W = c.tau;
    CHECK_NOTHROW(c.validate());
    c.W = kInf;
    CHECK_NOTHROW(c.validate());
    c.tau = 0.5;
    c.W = 0.1;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.tau = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("analysis: window rule traces") {
    AnalysisConfig c;
    c.tau = 0.05;
    c.W = 0.05;
    SUBCASE("adjacent bins are not coincident when W = tau") {
        CHECK_FALSE(WindowTest(c)(0.10, 0.15));
        const auto s1 = make(1, {0}, {{1, 1, 0.10, 1, 0}});
        const auto s2 = make(2, {0}, {{1, -1, 0.15, 1, 0}});
        CHECK(count_coincidences(s1, s2, c).total() == 0);
    }
    SUBCASE("equal tags are coincident") {
        for (double W : {0.05, 0.1, 0.7}) {
            c.W = W;
            CHECK(WindowTest(c)(0.123, 0.123));
        }
    }
    SUBCASE("the shift is applied to station 2 before discretizing") {
        c.delta = 0.05;
        CHECK(WindowTest(c)(0.16, 0.11));
        CHECK_FALSE(WindowTest(c)(0.11, 0.11));
    }
    SUBCASE("wider windows admit more bins") {
        c.W = 0.1;
        CHECK(WindowTest(c)(0.10, 0.15));
        CHECK_FALSE(WindowTest(c)(0.10, 0.20));
    }
    SUBCASE("continuous rule") {
        c.rule = WindowRule::Continuous;
        CHECK(WindowTest(c)(0.10, 0.15));
        CHECK_FALSE(WindowTest(c)(0.10, 0.1501));
        CHECK(WindowTest(c)(0.151, 0.101));
    }
}

TEST_CASE("analysis: coincidence counting on simulated data") {
    const auto [s1, s2] = simulate(100000, eprb::random_angles(5, 3, 1), eprb::random_angles(5, 3, 2), 2.0, 17);
    AnalysisConfig c;

    SUBCASE("coincidences never decrease with W") {
        std::uint64_t last = 0;
        for (double W : {0.00025, 0.0005, 0.001, 0.004, 0.01, 0.05, 0.1, 0.5, 1.0, 1.5}) {
            c.W = W;
            const auto n = count_coincidences(s1, s2, c).total();
            CHECK(n >= last);
            last = n;
        }
        for (auto rule : {WindowRule::Discretized, WindowRule::Continuous}) {
            c.rule = rule;
            c.W = 1.0 + 0.00025;
            CHECK(count_coincidences(s1, s2, c).total() == s1.records.size());
        }
    }
    SUBCASE("infinite window counts every pair exactly once") {
        c.W = kInf;
        const auto t = count_coincidences(s1, s2, c);
        CoincidenceTable direct(5, 5);
        for (std::size_t i = 0; i < s1.records.size(); ++i)
            direct.add(s1.records[i].x, s2.records[i].x, s1.records[i].m, s2.records[i].m);
        CHECK(t == direct);
        CHECK(t.total() == 100000);
    }
    SUBCASE("window beyond T0 + |delta| equals the infinite window") {
        c.delta = 0.01;
        c.W = 1.0 + 0.01 + 0.00025;
        const auto finite = count_coincidences(s1, s2, c);
        c.W = kInf;
        CHECK(finite == count_coincidences(s1, s2, c));
    }
    SUBCASE("record order does not matter") {
        const auto reference = count_coincidences(s1, s2, c);
        auto p1 = s1;
        auto p2 = s2;
        std::mt19937_64 g(5);
        std::shuffle(p1.records.begin(), p1.records.end(), g);
        std::shuffle(p2.records.begin(), p2.records.end(), g);
        CHECK(count_coincidences(p1, p2, c) == reference);
        const auto h1 = coincidence_time_histogram(s1, s2, {}, 0.002, c);
        const auto h2 = coincidence_time_histogram(p1, p2, {}, 0.002, c);
        REQUIRE(h1);
        REQUIRE(h2);
        CHECK(h1->normalized == h2->normalized);
    }
    SUBCASE("streaming counter agrees with the batch count") {
        CoincidenceCounter counter(5, 5, c);
        for (std::size_t i = 0; i < s1.records.size(); ++i) counter.add(s1.records[i], s2.records[i]);
        CHECK(counter.table() == count_coincidences(s1, s2, c));
    }
    SUBCASE("estimators stay in range") {
        c.W = 0.01;
        const auto t = count_coincidences(s1, s2, c);
        for (std::uint32_t m1 = 1; m1 <= 5; ++m1)
            for (std::uint32_t m2 = 1; m2 <= 5; ++m2) {
                const auto s = stats_for(t, m1, m2);
                if (!s.E) continue;
                CHECK(std::abs(*s.E) <= 1.0);
                CHECK(std::abs(*s.E1) <= 1.0);
                CHECK(std::abs(*s.E2) <= 1.0);
            }
        const auto r = chsh(correlation_matrix(t, s1.angles, s2.angles));
        CHECK(r.smax <= 4.0);
    }
}

TEST_CASE("analysis: index pairing needs matching datasets") {
    const auto s1 = make(1, {0}, {{1, 1, 0.1, 1, 0}, {2, 1, 0.2, 1, 0}});
    const auto s2 = make(2, {0}, {{1, 1, 0.1, 1, 0}});
    CHECK_THROWS_AS(count_coincidences(s1, s2, {}), InvalidArgument);
    const auto s3 = make(2, {0}, {{1, 1, 0.1, 1, 0}, {3, 1, 0.2, 1, 0}});
    CHECK_THROWS_AS(count_coincidences(s1, s3, {}), InvalidArgument);
}

TEST_CASE("analysis: time matching") {
    AnalysisConfig c;
    c.pairing = Pairing::ByTimeMatching;
    c.rule = WindowRule::Continuous;
    c.tau = 0.1;
    c.W = 0.5;
    SUBCASE("each event is used at most once, nearest first") {
        const auto s1 = make(1, {0}, {{1, 1, 10.0, 1, 0}, {2, 1, 10.4, 1, 0}});
        const auto s2 = make(2, {0}, {{1, 1, 10.3, 1, 0}});
        const auto pairs = match_pairs(s1, s2, c);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0].i1 == 1);
        CHECK(pairs[0].i2 == 0);
    }
    SUBCASE("unequal lengths are allowed") {
        const auto s1 = make(1, {0}, {{1, 1, 1.0, 1, 0}, {2, -1, 5.0, 1, 0}, {3, 1, 9.0, 1, 0}});
        const auto s2 = make(2, {0}, {{1, 1, 1.2, 1, 0}, {2, -1, 9.1, 1, 0}});
        const auto t = count_coincidences(s1, s2, c);
        CHECK(t.total() == 2);
        CHECK(t.count(1, 1, 1, 1) == 1);
        CHECK(t.count(1, -1, 1, 1) == 1);
    }
    SUBCASE("the shift moves station 2 before matching") {
        const auto s1 = make(1, {0}, {{1, 1, 5.0, 1, 0}});
        const auto s2 = make(2, {0}, {{1, 1, 1.0, 1, 0}});
        CHECK(match_pairs(s1, s2, c).empty());
        c.delta = 4.0;
        CHECK(match_pairs(s1, s2, c).size() == 1);
    }
    SUBCASE("an infinite window is rejected") {
        c.W = kInf;
        const auto s = make(1, {0}, {{1, 1, 1.0, 1, 0}});
        CHECK_THROWS_AS(match_pairs(s, s, c), InvalidArgument);
    }
}

TEST_CASE("analysis: averages for one setting pair") {
    auto s = stats_from_counts(50, 0, 0, 50);
    CHECK(*s.E1 == 0.0);
    CHECK(*s.E2 == 0.0);
    CHECK(*s.E == 1.0);
    CHECK(*s.rho == doctest::Approx(1.0));
    s = stats_from_counts(25, 25, 25, 25);
    CHECK(*s.E1 == 0.0);
    CHECK(*s.E2 == 0.0);
    CHECK(*s.E == 0.0);
    CHECK(*s.rho == 0.0);
    s = stats_from_counts(0, 50, 50, 0);
    CHECK(*s.E == -1.0);
    CHECK(*s.rho == doctest::Approx(-1.0));
    s = stats_from_counts(0, 0, 0, 0);
    CHECK(s.coincidences == 0);
    CHECK_FALSE(s.E.has_value());
    CHECK_FALSE(s.E1.has_value());
    CHECK_FALSE(s.rho.has_value());
    s = stats_from_counts(10, 5, 0, 0);
    CHECK(*s.E1 == 1.0);
    CHECK(s.E.has_value());
    CHECK_FALSE(s.rho.has_value());
}

TEST_CASE("analysis: correlation matches the general formula on random tables") {
    std::mt19937_64 g(12);
    std::uniform_int_distribution<int> count(0, 60);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t a = count(g), b = count(g), c = count(g), d = count(g);
        const auto s = stats_from_counts(a, b, c, d);
        const auto expected = rho_general(a, b, c, d);
        REQUIRE(s.rho.has_value() == expected.has_value());
        if (expected) REQUIRE(std::abs(*s.rho - *expected) <= 1e-12);
    }
}

TEST_CASE("analysis: CHSH search") {
    const std::vector<double> a1{0, 45 * kDeg};
    const std::vector<double> a2{22.5 * kDeg, 67.5 * kDeg};
    auto grid = [&](auto&& f) {
        CorrelationMatrix E{a1, a2, {}};
        for (double a : a1)
            for (double b : a2) E.E.push_back(f(a, b));
        return E;
    };
    SUBCASE("singlet correlations reach 2 sqrt 2") {
        const auto r = chsh(grid(quantum::singlet_E), true);
        CHECK(std::abs(r.smax - 2 * std::sqrt(2.0)) <= 1e-12);
        CHECK(r.evaluated == 16);
        // Oracle: enumerate the ordered quadruples directly.
        double best = 0.0;
        for (double a : a1)
            for (double b : a1)
                for (double c : a2)
                    for (double d : a2) best = std::max(best, std::abs(quantum::S_of(quantum::singlet_E, a, b, c, d)));
        CHECK(std::abs(r.smax - best) <= 1e-12);
        CHECK(std::abs(r.s) == doctest::Approx(r.smax));
        CHECK(std::abs(quantum::S_of(quantum::singlet_E, r.angles[0], r.angles[1], r.angles[2], r.angles[3])) ==
              doctest::Approx(r.smax));
        double stored = 0.0;
        for (const auto& v : r.values) stored = std::max(stored, std::abs(*v));
        CHECK(stored == r.smax);
    }
    SUBCASE("constant correlations") {
        CHECK(chsh(grid([](double, double) { return 0.0; })).smax == 0.0);
        CHECK(chsh(grid([](double, double) { return 1.0; })).smax == 2.0);
    }
    SUBCASE("undefined entries are skipped") {
        auto E = grid(quantum::singlet_E);
        E.E[0] = std::nullopt;
        const auto r = chsh(E);
        CHECK(r.skipped > 0);
        CHECK(r.evaluated + r.skipped == 16);
        for (auto& e : E.E) e = std::nullopt;
        CHECK_THROWS_AS(chsh(E), DataError);
    }
}

TEST_CASE("analysis: time shift search") {
    const auto [s1, s2] = simulate(1000000, eprb::random_angles(20, 31, 1), eprb::random_angles(20, 31, 2), 2.0, 31);
    DeltaSearch search;
    search.resolution = 0.001;
    SUBCASE("identical datasets") {
        CHECK(find_delta(s1, s1, search) == 0.0);
    }
    SUBCASE("station 2 shifted by a known amount") {
        for (double shift : {0.008, -0.002, 0.05}) {
            auto moved = s2;
            for (auto& r : moved.records) r.t += shift;
            CHECK(std::abs(find_delta(s1, moved, search) + shift) <= search.resolution);
        }
    }
    SUBCASE("synthetic time stream shifted by four units") {
        std::mt19937_64 g(8);
        std::exponential_distribution<double> gap(1.0 / 50.0);
        std::normal_distribution<double> jitter(0.0, 0.2);
        StationDataset a = make(1, {0}, {});
        StationDataset b = make(2, {0}, {});
        double t = 0.0;
        for (std::uint64_t n = 1; n <= 20000; ++n) {
            t += gap(g);
            a.records.push_back({n, 1, t, 1, 0});
            b.records.push_back({n, 1, t - 4.0 + jitter(g), 1, 0});
        }
        b.records.erase(b.records.begin() + 100, b.records.begin() + 200);
        DeltaSearch s;
        s.resolution = 0.5;
        s.pairing = Pairing::ByTimeMatching;
        s.search_range = 10.0;
        CHECK(std::abs(find_delta(a, b, s) - 4.0) <= 0.5);
    }
    SUBCASE("empty input") {
        auto empty = s2;
        empty.records.clear();
        CHECK_THROWS_AS(find_delta(s1, empty, search), InvalidArgument);
    }
}

TEST_CASE("analysis: Smax against the window") {
    const std::vector<double> a1{0, 45 * kDeg};
    const std::vector<double> a2{22.5 * kDeg, 67.5 * kDeg};
    SUBCASE("one window equals a direct CHSH evaluation") {
        const auto [s1, s2] = simulate(200000, a1, a2, 2.0, 41);
        AnalysisConfig c;
        c.W = 0.01;
        const auto curve = smax_vs_window(s1, s2, {0.01}, c);
        REQUIRE(curve.size() == 1);
        const auto direct = chsh(correlation_matrix(count_coincidences(s1, s2, c), a1, a2)).smax;
        CHECK(*curve[0].smax == direct);
    }
    SUBCASE("the regime changes from small to large windows") {
        const auto [s1, s2] = simulate(1000000, a1, a2, 2.0, 42);
        const auto curve = smax_vs_window(s1, s2, {0.001, 0.01, 0.1, 1.0, 2.0}, AnalysisConfig{});
        CHECK(*curve.front().smax > 2.5);
        CHECK(*curve.back().smax <= 2.05);
        CHECK(curve.back().coincidences == 1000000);
    }
    SUBCASE("without time dependence Smax stays classical") {
        const auto [s1, s2] = simulate(1000000, a1, a2, 0.0, 43);
        const auto curve = smax_vs_window(s1, s2, {0.05, 0.1, 0.5, 1.0}, AnalysisConfig{});
        for (const auto& p : curve) {
            REQUIRE(p.smax);
            CHECK(*p.smax <= 2.05);
        }
    }
    SUBCASE("windows must ascend") {
        const auto [s1, s2] = simulate(100, a1, a2, 2.0, 44);
        CHECK_THROWS_AS(smax_vs_window(s1, s2, {0.1, 0.01}, AnalysisConfig{}), InvalidArgument);
    }
}

TEST_CASE("analysis: coincidence time histogram") {
    AnalysisConfig wide;
    wide.W = kInf;
    SUBCASE("zero delays put all mass in the central bin") {
        eprb::ExperimentConfig cfg;
        cfg.events = 10000;
        cfg.source = eprb::SourceMode::fixed(0.3, 0.3);
        cfg.station1 = {1, {0.3}, 1.0, 2.0};
        cfg.station2 = {2, {0.3}, 1.0, 2.0};
        const auto [s1, s2] = eprb::run_experiment(cfg);
        const auto h = coincidence_time_histogram(s1, s2, {}, 0.002, wide);
        REQUIRE(h);
        REQUIRE(h->centers.size() == 1);
        CHECK(h->centers[0] == 0.0);
        CHECK(h->normalized[0] == 1.0);
        CHECK(h->peak() == 0.0);
    }
    const auto [s1, s2] = simulate(400000, {0}, {0, 45 * kDeg}, 2.0, 51);
    SUBCASE("normalized counts sum to one") {
        const auto h = coincidence_time_histogram(s1, s2, {1, 1, 1, 2}, 0.01, wide);
        REQUIRE(h);
        double sum = 0.0;
        for (double v : h->normalized) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(h->entries > 0);
    }
    SUBCASE("filters that nothing passes give no histogram") {
        const auto h = coincidence_time_histogram(s1, s2, {std::nullopt, std::nullopt, 2, std::nullopt}, 0.01, wide);
        CHECK_FALSE(h.has_value());
    }
    SUBCASE("the same setting at both stations gives a symmetric histogram") {
        const auto [a, b] = simulate(400000, {0.2}, {0.2}, 2.0, 52);
        const auto h = coincidence_time_histogram(a, b, {}, 0.01, wide);
        REQUIRE(h);
        double left = 0.0, right = 0.0;
        for (std::size_t i = 0; i < h->centers.size(); ++i) {
            if (h->centers[i] < 0) left += h->normalized[i];
            if (h->centers[i] > 0) right += h->normalized[i];
        }
        const double sigma = std::sqrt((left + right) / static_cast<double>(h->entries));
        CHECK(std::abs(left - right) <= 4 * sigma);
    }
    SUBCASE("bin width must be positive") {
        CHECK_THROWS_AS(coincidence_time_histogram(s1, s2, {}, 0.0, wide), InvalidArgument);
    }
}
