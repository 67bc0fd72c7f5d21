#include "ebsim/eprb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "ebsim/error.hpp"

namespace ebsim::eprb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

StreamRole settings_role(int station) { return station == 1 ? StreamRole::Settings1 : StreamRole::Settings2; }

void validate_station(const StationConfig& s, int expected_index) {
    const std::string who = "station " + std::to_string(expected_index);
    if (s.station != expected_index) throw InvalidArgument(who + ": wrong station index");
    if (s.angles.empty()) throw InvalidArgument(who + ": at least one rotation angle is required");
    for (double a : s.angles) {
        if (!std::isfinite(a)) throw InvalidArgument(who + ": rotation angles must be finite");
    }
    if (!(s.T0 > 0.0) || !std::isfinite(s.T0)) throw InvalidArgument(who + ": T0 must be positive");
    if (!(s.d >= 0.0) || !std::isfinite(s.d)) throw InvalidArgument(who + ": d must be non-negative");
}

struct BlockStreams {
    RandomStream source;
    RandomStream settings1;
    RandomStream settings2;
    RandomStream delays1;
    RandomStream delays2;

    BlockStreams(std::uint64_t seed, std::uint64_t block)
        : source(seed, StreamRole::Source, block + 1),
          settings1(seed, StreamRole::Settings1, block + 1),
          settings2(seed, StreamRole::Settings2, block + 1),
          delays1(seed, StreamRole::Delays1, block + 1),
          delays2(seed, StreamRole::Delays2, block + 1) {}
};

EventRecord observe(const StationConfig& s, double xi, std::uint64_t n, RandomStream& settings,
                    RandomStream& delays) {
    EventRecord r;
    r.n = n;
    r.m = static_cast<std::uint32_t>(settings.next_index(s.angles.size()));
    r.gamma = s.angles[r.m - 1];
    r.x = detect(xi, r.gamma, s.station);
    r.t = delay(xi, r.gamma, s.station, s.T0, s.d, delays);
    return r;
}

using PairBuffer = std::vector<std::pair<EventRecord, EventRecord>>;

void generate_block(const ExperimentConfig& c, std::uint64_t block, PairBuffer& out) {
    const std::uint64_t first = block * kBlockEvents;
    const std::uint64_t last = std::min(c.events, first + kBlockEvents);
    BlockStreams st(c.seed, block);
    out.clear();
    out.reserve(last - first);
    for (std::uint64_t i = first; i < last; ++i) {
        const ParticlePair p = emit_pair(c.source, st.source);
        EventRecord r1 = observe(c.station1, p.xi1, i + 1, st.settings1, st.delays1);
        EventRecord r2 = observe(c.station2, p.xi2, i + 1, st.settings2, st.delays2);
        out.emplace_back(r1, r2);
    }
}

}  // namespace

ParticlePair emit_pair(const SourceMode& mode, RandomStream& rng) {
    if (mode.kind == SourceMode::Kind::FixedPolarization) return {mode.xi1, mode.xi2};
    const double xi = kTwoPi * rng.next_uniform();
    return {xi, xi};
}

std::pair<double, double> polarization_vector(double xi, int station) {
    const double angle = xi + (station - 1) * 0.5 * kPi;
    return {std::cos(angle), std::sin(angle)};
}

double local_angle(double xi, double gamma, int station) { return xi - gamma + (station - 1) * 0.5 * kPi; }

int detect(double xi, double gamma, int station) {
    return std::cos(2.0 * local_angle(xi, gamma, station)) >= 0.0 ? 1 : -1;
}

double delay(double xi, double gamma, int station, double T0, double d, RandomStream& rng) {
    const double u = rng.next_uniform();
    if (d == 0.0) return u * T0;
    return u * T0 * std::pow(std::abs(std::sin(2.0 * local_angle(xi, gamma, station))), d);
}

std::vector<double> random_angles(std::size_t M, std::uint64_t seed, int station) {
    RandomStream rng(seed, settings_role(station), 0);
    std::vector<double> angles(M);
    for (auto& a : angles) a = kTwoPi * rng.next_uniform();
    return angles;
}

void validate(const ExperimentConfig& c) {
    if (c.events == 0) throw InvalidArgument("at least one event is required");
    validate_station(c.station1, 1);
    validate_station(c.station2, 2);
    if (c.station1.T0 != c.station2.T0) throw InvalidArgument("both stations must use the same T0");
    if (c.source.kind == SourceMode::Kind::FixedPolarization &&
        (!std::isfinite(c.source.xi1) || !std::isfinite(c.source.xi2))) {
        throw InvalidArgument("fixed source angles must be finite");
    }
}

void run_experiment(const ExperimentConfig& c, const PairSink& sink) {
    validate(c);
    const std::uint64_t blocks = (c.events + kBlockEvents - 1) / kBlockEvents;
    const unsigned workers = std::max(1u, c.threads);

    std::vector<PairBuffer> buffers(workers);
    for (std::uint64_t wave = 0; wave < blocks; wave += workers) {
        const auto in_wave = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks - wave));
        if (in_wave == 1) {
            generate_block(c, wave, buffers[0]);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(in_wave);
            for (unsigned w = 0; w < in_wave; ++w) {
                pool.emplace_back([&c, &buffers, wave, w] { generate_block(c, wave + w, buffers[w]); });
            }
            for (auto& t : pool) t.join();
        }
        for (unsigned w = 0; w < in_wave; ++w) {
            for (const auto& [r1, r2] : buffers[w]) sink(r1, r2);
        }
    }
}

std::pair<StationDataset, StationDataset> run_experiment(const ExperimentConfig& c) {
    StationDataset d1{1, c.station1.angles, c.station1.T0, c.station1.d, c.seed, {}};
    StationDataset d2{2, c.station2.angles, c.station2.T0, c.station2.d, c.seed, {}};
    d1.records.reserve(c.events);
    d2.records.reserve(c.events);
    run_experiment(c, [&](const EventRecord& r1, const EventRecord& r2) {
        d1.records.push_back(r1);
        d2.records.push_back(r2);
    });
    return {std::move(d1), std::move(d2)};
}

}  // namespace ebsim::eprb
