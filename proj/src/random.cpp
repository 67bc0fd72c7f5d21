#include "ebsim/random.hpp"

#include <cmath>

#include "ebsim/error.hpp"

namespace ebsim {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSubstreamSalt = 0x6a09e667f3bcc909ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64_next(std::uint64_t& x) noexcept {
    x += kGolden;
    return mix64(x);
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string_view role_name(StreamRole role) {
    switch (role) {
        case StreamRole::Source: return "source";
        case StreamRole::Settings1: return "settings1";
        case StreamRole::Settings2: return "settings2";
        case StreamRole::Delays1: return "delays1";
        case StreamRole::Delays2: return "delays2";
        case StreamRole::DlmOutput: return "dlm-output";
    }
    return "unknown";
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t substream)
    : seed_(seed), stream_id_(stream_id), substream_(substream) {
    std::uint64_t h = mix64(mix64(mix64(seed) ^ stream_id) ^ (substream + kSubstreamSalt));
    for (auto& word : state_) word = splitmix64_next(h);
}

std::uint64_t RandomStream::next_u64() {
    auto& s = state_;
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

double RandomStream::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::next_index(std::uint64_t m) {
    if (m == 0) throw InvalidArgument("next_index: M must be at least 1");
    const auto k = static_cast<std::uint64_t>(std::floor(static_cast<double>(m) * next_uniform()));
    // m * u < m always holds in exact arithmetic; guard the rounding edge for huge m.
    return (k >= m ? m - 1 : k) + 1;
}

}  // namespace ebsim
