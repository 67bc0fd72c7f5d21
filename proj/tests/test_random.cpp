#include <doctest.h>

#include <cmath>
#include <vector>

#include "ebsim/error.hpp"
#include "ebsim/random.hpp"

using ebsim::RandomStream;
using ebsim::StreamRole;

namespace {

// Reference xoshiro256** step and SplitMix64 seeding, written out independently.
struct ReferenceXoshiro {
    std::uint64_t s[4];

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix_finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    ReferenceXoshiro(std::uint64_t seed, std::uint64_t id, std::uint64_t sub) {
        std::uint64_t h = splitmix_finalize(splitmix_finalize(splitmix_finalize(seed) ^ id) ^
                                            (sub + 0x6a09e667f3bcc909ULL));
        for (auto& w : s) {
            h += 0x9e3779b97f4a7c15ULL;
            w = splitmix_finalize(h);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
};

}  // namespace

TEST_CASE("random: matches an independent xoshiro256** reference") {
    for (std::uint64_t seed : {0ULL, 1ULL, 1234567ULL, ~0ULL}) {
        for (std::uint64_t id = 0; id < 6; ++id) {
            for (std::uint64_t sub : {0ULL, 1ULL, 77ULL}) {
                RandomStream rs(seed, id, sub);
                ReferenceXoshiro ref(seed, id, sub);
                for (int i = 0; i < 50; ++i) REQUIRE(rs.next_u64() == ref.next());
            }
        }
    }
}

TEST_CASE("random: uniform values lie in [0, 1) and use the top 53 bits") {
    RandomStream a(42, StreamRole::Source);
    RandomStream b(42, StreamRole::Source);
    for (int i = 0; i < 100000; ++i) {
        const double u = a.next_uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        REQUIRE(u == static_cast<double>(b.next_u64() >> 11) * 0x1.0p-53);
    }
}

TEST_CASE("random: same seed and stream replay identically") {
    RandomStream a(7, StreamRole::Delays1, 3);
    RandomStream b(7, StreamRole::Delays1, 3);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("random: mean of one million uniforms") {
    RandomStream rs(2024, StreamRole::Source);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += rs.next_uniform();
    CHECK(std::abs(sum / n - 0.5) <= 0.002);
}

TEST_CASE("random: next_index") {
    SUBCASE("M = 1 always gives 1") {
        RandomStream rs(1, StreamRole::Settings1);
        for (int i = 0; i < 1000; ++i) REQUIRE(rs.next_index(1) == 1);
    }
    SUBCASE("M = 2 gives 1 or 2") {
        RandomStream rs(1, StreamRole::Settings1);
        for (int i = 0; i < 1000; ++i) {
            const auto k = rs.next_index(2);
            REQUIRE((k == 1 || k == 2));
        }
    }
    SUBCASE("M = 20 is uniform") {
        RandomStream rs(99, StreamRole::Settings2);
        std::vector<int> freq(21, 0);
        const int n = 1000000;
        for (int i = 0; i < n; ++i) {
            const auto k = rs.next_index(20);
            REQUIRE(k >= 1);
            REQUIRE(k <= 20);
            ++freq[k];
        }
        for (int k = 1; k <= 20; ++k) CHECK(std::abs(freq[k] / double(n) - 0.05) <= 0.001);
    }
    SUBCASE("M = 0 is rejected") {
        RandomStream rs(1, StreamRole::Settings1);
        CHECK_THROWS_AS(rs.next_index(0), ebsim::InvalidArgument);
    }
}

TEST_CASE("random: distinct streams are uncorrelated") {
    const int n = 1000000;
    const std::pair<std::uint64_t, std::uint64_t> pairs[] = {{0, 1}, {1, 2}, {3, 4}, {0, 5}};
    for (auto [i, j] : pairs) {
        RandomStream a(555, i);
        RandomStream b(555, j);
        double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
        for (int k = 0; k < n; ++k) {
            const double x = a.next_uniform();
            const double y = b.next_uniform();
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        const double cov = sab / n - (sa / n) * (sb / n);
        const double r = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) * (sbb / n - (sb / n) * (sb / n)));
        CHECK(std::abs(r) < 1e-2);
    }
}

TEST_CASE("random: consuming one stream leaves the others untouched") {
    RandomStream settings(10, StreamRole::Settings1);
    std::vector<std::uint64_t> expected;
    for (int i = 0; i < 10; ++i) expected.push_back(settings.next_u64());

    RandomStream source(10, StreamRole::Source);
    RandomStream settings2(10, StreamRole::Settings1);
    for (int i = 0; i < 10; ++i) {
        for (int k = 0; k < 37; ++k) source.next_u64();
        CHECK(settings2.next_u64() == expected[i]);
    }
}

TEST_CASE("random: substreams and seeds give different sequences") {
    RandomStream a(1, StreamRole::Source, 0);
    RandomStream b(1, StreamRole::Source, 1);
    RandomStream c(2, StreamRole::Source, 0);
    const auto va = a.next_u64();
    CHECK(va != b.next_u64());
    CHECK(va != c.next_u64());
}

TEST_CASE("random: role names") {
    CHECK(ebsim::role_name(StreamRole::Source) == "source");
    CHECK(ebsim::role_name(StreamRole::DlmOutput) != ebsim::role_name(StreamRole::Source));
}
