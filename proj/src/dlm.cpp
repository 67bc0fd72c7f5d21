#include "ebsim/dlm.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ebsim/error.hpp"

namespace ebsim {

PhaseMessage PhaseMessage::from_angle(double radians) { return {std::cos(radians), std::sin(radians)}; }

double PhaseMessage::norm() const { return std::hypot(y1, y2); }

PhaseMessage phase_shift(const PhaseMessage& y, double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return {y.y1 * c - y.y2 * s, y.y1 * s + y.y2 * c};
}

namespace {

void require_unit(const PhaseMessage& y) {
    const double n = y.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kMessageNormTolerance) {
        throw InvalidMessage("phase message is not a unit vector (norm " + std::to_string(n) + ")");
    }
}

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("learning parameter alpha must lie in (0, 1)");
}

}  // namespace

DlmBeamSplitter::DlmBeamSplitter(double alpha) : alpha_(alpha) { require_alpha(alpha); }

DlmBeamSplitter::DlmBeamSplitter(double alpha, Vec2 x, PhaseMessage y0, PhaseMessage y1)
    : alpha_(alpha), x_(x), registers_{y0, y1} {
    require_alpha(alpha);
    if (!(x[0] >= 0.0 && x[1] >= 0.0) || std::abs(x[0] + x[1] - 1.0) > 1e-12) {
        throw InvalidArgument("probability vector must be non-negative and sum to 1");
    }
    require_unit(y0);
    require_unit(y1);
}

void DlmBeamSplitter::store_and_learn(Channel channel, const PhaseMessage& y) {
    require_unit(y);
    const int k = index_of(channel);
    registers_[k] = y;
    x_[k] = alpha_ * x_[k] + (1.0 - alpha_);
    x_[1 - k] = alpha_ * x_[1 - k];
}

CandidatePair DlmBeamSplitter::transform() const {
    // Register component Y(j, k): j-th component of the message last seen on channel k.
    const double y00 = registers_[0].y1;
    const double y10 = registers_[0].y2;
    const double y01 = registers_[1].y1;
    const double y11 = registers_[1].y2;
    const double s0 = std::sqrt(x_[0]);
    const double s1 = std::sqrt(x_[1]);
    constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

    CandidatePair pair;
    pair.w = {(y00 * s0 - y11 * s1) * inv_sqrt2, (y01 * s1 + y10 * s0) * inv_sqrt2};
    pair.z = {(y01 * s1 - y10 * s0) * inv_sqrt2, (y00 * s0 + y11 * s1) * inv_sqrt2};
    return pair;
}

Emission dlm_emit(const CandidatePair& pair, double r) {
    const bool first = squared_norm(pair.w) > r;
    const Vec2& chosen = first ? pair.w : pair.z;
    const double n = std::sqrt(squared_norm(chosen));
    if (n < kDegenerateNorm) {
        throw DegenerateEmission("selected output candidate has norm " + std::to_string(n));
    }
    return {first ? Channel::Zero : Channel::One, {chosen[0] / n, chosen[1] / n}};
}

Emission DlmBeamSplitter::process(Channel channel, const PhaseMessage& y, RandomStream& rng) {
    store_and_learn(channel, y);
    ++events_;
    return dlm_emit(transform(), rng.next_uniform());
}

Vec2 closed_form_x(const Vec2& x0, std::span<const Channel> events, double alpha) {
    const auto n = static_cast<double>(events.size());
    const double decay = std::pow(alpha, n);
    Vec2 x{decay * x0[0], decay * x0[1]};
    for (std::size_t i = 0; i < events.size(); ++i) {
        const double weight = (1.0 - alpha) * std::pow(alpha, n - 1.0 - static_cast<double>(i));
        x[index_of(events[i])] += weight;
    }
    return x;
}

// ---------------------------------------------------------------------------

double BeamSplitterCounts::output0_fraction() const {
    const auto total = output0 + output1;
    return total == 0 ? 0.0 : static_cast<double>(output0) / static_cast<double>(total);
}

BeamSplitterCounts run_beam_splitter(const BeamSplitterRun& run) {
    if (!(run.p0 >= 0.0 && run.p0 <= 1.0)) throw InvalidArgument("p0 must lie in [0, 1]");
    if (!std::isfinite(run.psi0) || !std::isfinite(run.psi1)) throw InvalidArgument("input phases must be finite");

    DlmBeamSplitter bs(run.alpha);
    RandomStream source(run.seed, StreamRole::Source);
    RandomStream output(run.seed, StreamRole::DlmOutput);
    const auto in0 = PhaseMessage::from_angle(run.psi0);
    const auto in1 = PhaseMessage::from_angle(run.psi1);

    BeamSplitterCounts counts;
    const std::uint64_t total = run.transient + run.events;
    for (std::uint64_t n = 0; n < total; ++n) {
        const bool on0 = source.next_uniform() < run.p0;
        const Emission e = bs.process(on0 ? Channel::Zero : Channel::One, on0 ? in0 : in1, output);
        if (n < run.transient) continue;
        ++(on0 ? counts.input0 : counts.input1);
        ++(e.channel == Channel::Zero ? counts.output0 : counts.output1);
    }
    return counts;
}

// ---------------------------------------------------------------------------

double MziCounts::n2_fraction() const {
    const auto total = n2 + n3;
    return total == 0 ? 0.0 : static_cast<double>(n2) / static_cast<double>(total);
}

double MziCounts::n0_fraction() const {
    const auto total = n0 + n1;
    return total == 0 ? 0.0 : static_cast<double>(n0) / static_cast<double>(total);
}

MziNetwork::MziNetwork(double phi0, double phi1, double alpha)
    : bs1_(alpha), bs2_(alpha), phi0_(phi0), phi1_(phi1) {
    if (!std::isfinite(phi0) || !std::isfinite(phi1)) throw InvalidArgument("phase shifts must be finite");
}

MziEventTrace MziNetwork::process(const PhaseMessage& input, RandomStream& rng) {
    MziEventTrace trace;
    const Emission first = bs1_.process(Channel::Zero, input, rng);
    ++(first.channel == Channel::Zero ? counts_.n0 : counts_.n1);

    const double phi = first.channel == Channel::Zero ? phi0_ : phi1_;
    const Emission second = bs2_.process(first.channel, phase_shift(first.message, phi), rng);
    const bool cos_port = second.channel == Channel::One;
    ++(cos_port ? counts_.n2 : counts_.n3);

    trace.index = bs1_.events_processed();
    trace.path = first.channel;
    trace.output = second.channel;
    trace.detector = cos_port ? 2 : 3;
    return trace;
}

MziCounts run_mzi(const MziRun& run, const std::function<void(const MziEventTrace&)>& trace) {
    if (run.events == 0) throw InvalidArgument("run_mzi: at least one event is required");
    if (!std::isfinite(run.psi0)) throw InvalidArgument("input phase must be finite");

    MziNetwork network(run.phi0, run.phi1, run.alpha);
    RandomStream source(run.seed, StreamRole::Source);
    RandomStream output(run.seed, StreamRole::DlmOutput);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    double psi = run.psi0;
    if (run.policy == InputPhasePolicy::RandomPerRun) psi = two_pi * source.next_uniform();

    for (std::uint64_t n = 0; n < run.events; ++n) {
        if (run.policy == InputPhasePolicy::RandomPerEvent) psi = two_pi * source.next_uniform();
        const MziEventTrace t = network.process(PhaseMessage::from_angle(psi), output);
        if (trace) trace(t);
    }
    return network.counts();
}

}  // namespace ebsim
