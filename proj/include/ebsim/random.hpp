#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ebsim {

// One stream per stochastic role. The numeric value is the stream id recorded
// in dataset headers, so the order is part of the file format.
enum class StreamRole : std::uint64_t {
    Source = 0,
    Settings1 = 1,
    Settings2 = 2,
    Delays1 = 3,
    Delays2 = 4,
    DlmOutput = 5,
};

std::string_view role_name(StreamRole role);

/// Reproducible pseudo-random stream.
///
/// Generator: xoshiro256** (Blackman & Vigna, 2018). The 256-bit state is filled
/// with four consecutive SplitMix64 outputs whose starting value is
///
///     h = mix64(mix64(mix64(seed) ^ stream_id) ^ (substream + 0x6a09e667f3bcc909))
///
/// where mix64 is the SplitMix64 finalizer. Event-parallel generators use the
/// substream to give every fixed-size block of events its own stream, so output
/// does not depend on how blocks are scheduled.
///
/// Uniform reals take the top 53 bits of a 64-bit output: u = (r >> 11) * 2^-53.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t substream = 0);
    RandomStream(std::uint64_t seed, StreamRole role, std::uint64_t substream = 0)
        : RandomStream(seed, static_cast<std::uint64_t>(role), substream) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1); advances the state by exactly one step.
    double next_uniform();

    // Uniform over {1, ..., m}, computed as floor(m * next_uniform()) + 1.
    // Throws InvalidArgument for m == 0.
    std::uint64_t next_index(std::uint64_t m);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t substream() const noexcept { return substream_; }

private:
    std::array<std::uint64_t, 4> state_{};
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t substream_;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace ebsim
