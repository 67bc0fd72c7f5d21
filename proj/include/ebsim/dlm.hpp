#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>

#include "ebsim/random.hpp"

namespace ebsim {

enum class Channel : int { Zero = 0, One = 1 };

constexpr int index_of(Channel c) noexcept { return static_cast<int>(c); }
constexpr Channel other(Channel c) noexcept { return c == Channel::Zero ? Channel::One : Channel::Zero; }

// Phase carried by an event, stored as (cos, sin).
struct PhaseMessage {
    double y1 = 1.0;
    double y2 = 0.0;

    static PhaseMessage from_angle(double radians);
    double norm() const;
    bool operator==(const PhaseMessage&) const = default;
};

// Plane rotation of the message by phi radians.
PhaseMessage phase_shift(const PhaseMessage& y, double phi);

using Vec2 = std::array<double, 2>;

inline double squared_norm(const Vec2& v) { return v[0] * v[0] + v[1] * v[1]; }

// Output candidates of the transformation stage: w leaves through channel 0, z through channel 1.
struct CandidatePair {
    Vec2 w{};
    Vec2 z{};
};

struct Emission {
    Channel channel = Channel::Zero;
    PhaseMessage message;
};

// Messages with |norm - 1| above this are rejected by the learning stage.
inline constexpr double kMessageNormTolerance = 1e-6;
// A selected candidate shorter than this cannot be normalized.
inline constexpr double kDegenerateNorm = 1e-9;

/// Learning machine that simulates a lossless single-photon beam splitter.
///
/// Three stages per event: the input message is stored in the register of its
/// channel while the probability vector x learns which channel is active, the
/// registers are mixed into two candidate messages, and one candidate is sent
/// out with probability equal to its squared norm.
///
/// Initial state: x = (1/2, 1/2), both registers (1, 0).
class DlmBeamSplitter {
public:
    explicit DlmBeamSplitter(double alpha = 0.99);
    DlmBeamSplitter(double alpha, Vec2 x, PhaseMessage y0, PhaseMessage y1);

    // Stage 1. Throws InvalidMessage for non-unit messages.
    void store_and_learn(Channel channel, const PhaseMessage& y);
    // Stage 2.
    CandidatePair transform() const;
    // All three stages; exactly one emission per call.
    Emission process(Channel channel, const PhaseMessage& y, RandomStream& rng);

    double alpha() const noexcept { return alpha_; }
    const Vec2& x() const noexcept { return x_; }
    const PhaseMessage& stored(Channel channel) const noexcept { return registers_[index_of(channel)]; }
    std::uint64_t events_processed() const noexcept { return events_; }

private:
    double alpha_;
    Vec2 x_{0.5, 0.5};
    std::array<PhaseMessage, 2> registers_{};
    std::uint64_t events_ = 0;
};

// Stage 3: channel 0 if |w|^2 > r, else channel 1; the message is normalized.
// Throws DegenerateEmission if the selected candidate is shorter than kDegenerateNorm.
Emission dlm_emit(const CandidatePair& pair, double r);

// Closed-form probability vector after feeding `events` (0/1 channel labels)
// into a machine that started at x0: alpha^n x0 + (1 - alpha) sum alpha^(n-1-i) v_(i+1).
Vec2 closed_form_x(const Vec2& x0, std::span<const Channel> events, double alpha);

// ---------------------------------------------------------------------------
// Single beam splitter driven by a two-channel source.

struct BeamSplitterRun {
    std::uint64_t events = 100000;     // counted events, after the transient
    std::uint64_t transient = 1000;    // events processed before counting
    double p0 = 1.0;                   // probability that an input event uses channel 0
    double psi0 = 0.0;                 // input phase on channel 0 (radians)
    double psi1 = 0.0;                 // input phase on channel 1 (radians)
    double alpha = 0.99;
    std::uint64_t seed = 0;
};

struct BeamSplitterCounts {
    std::uint64_t input0 = 0;
    std::uint64_t input1 = 0;
    std::uint64_t output0 = 0;
    std::uint64_t output1 = 0;

    double output0_fraction() const;
};

BeamSplitterCounts run_beam_splitter(const BeamSplitterRun& run);

// ---------------------------------------------------------------------------
// Mach-Zehnder interferometer built from two beam splitters.

enum class InputPhasePolicy {
    Fixed,           // psi0 as configured
    RandomPerRun,    // one uniform draw in [0, 2pi) before the first event
    RandomPerEvent,  // a fresh uniform draw for every event
};

struct MziCounts {
    std::uint64_t n0 = 0;  // first splitter, output 0
    std::uint64_t n1 = 0;  // first splitter, output 1
    std::uint64_t n2 = 0;  // second splitter detector with P = cos^2((phi0 - phi1)/2)
    std::uint64_t n3 = 0;  // second splitter detector with P = sin^2((phi0 - phi1)/2)

    double n2_fraction() const;
    double n0_fraction() const;
};

struct MziEventTrace {
    std::uint64_t index = 0;  // 1-based
    Channel path = Channel::Zero;
    Channel output = Channel::Zero;  // output port of the second splitter
    int detector = 2;                // 2 or 3
};

/// Two beam splitters joined by two paths with phase shifts phi0, phi1.
///
/// Path j of the first splitter feeds input j of the second. Mirrors are
/// identity on messages. With this wiring, output port 1 of the second
/// splitter carries the cos^2((phi0 - phi1)/2) intensity and is counted as
/// N2; output port 0 is counted as N3.
class MziNetwork {
public:
    MziNetwork(double phi0, double phi1, double alpha = 0.99);

    MziEventTrace process(const PhaseMessage& input, RandomStream& rng);

    const MziCounts& counts() const noexcept { return counts_; }
    const DlmBeamSplitter& first() const noexcept { return bs1_; }
    const DlmBeamSplitter& second() const noexcept { return bs2_; }

private:
    DlmBeamSplitter bs1_;
    DlmBeamSplitter bs2_;
    double phi0_;
    double phi1_;
    MziCounts counts_;
};

struct MziRun {
    std::uint64_t events = 10000;
    double phi0 = 0.0;  // radians
    double phi1 = 0.0;  // radians
    InputPhasePolicy policy = InputPhasePolicy::RandomPerRun;
    double psi0 = 0.0;  // radians, used by InputPhasePolicy::Fixed
    double alpha = 0.99;
    std::uint64_t seed = 0;
};

// All events enter channel 0 of the first splitter. Throws InvalidArgument for
// zero events or non-finite angles.
MziCounts run_mzi(const MziRun& run, const std::function<void(const MziEventTrace&)>& trace = {});

}  // namespace ebsim
