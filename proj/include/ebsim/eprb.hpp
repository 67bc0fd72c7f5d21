#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ebsim/random.hpp"

// Event-by-event generator for an idealized two-station polarization experiment.
// Angles are radians throughout; degrees appear only in files and on the CLI.
namespace ebsim::eprb {

// Source of particle pairs. Each particle carries an angle xi; station i sees the
// polarization xi + (i - 1) pi/2, so equal angles mean orthogonal polarizations.
struct SourceMode {
    enum class Kind { SingletRandom, FixedPolarization };
    Kind kind = Kind::SingletRandom;
    double xi1 = 0.0;
    double xi2 = 0.0;

    static SourceMode singlet() { return {}; }
    static SourceMode fixed(double xi1, double xi2) { return {Kind::FixedPolarization, xi1, xi2}; }
};

struct ParticlePair {
    double xi1 = 0.0;
    double xi2 = 0.0;
};

// SingletRandom: one uniform draw in [0, 2pi) shared by both particles.
// FixedPolarization: the configured angles; the stream is not touched.
ParticlePair emit_pair(const SourceMode& mode, RandomStream& rng);

// Polarization vector of the particle that travels to `station`.
std::pair<double, double> polarization_vector(double xi, int station);

// Angle that enters detection and delay: xi - gamma + (station - 1) pi/2.
double local_angle(double xi, double gamma, int station);

// sign(cos 2 theta) with theta = local_angle(...); a zero cosine maps to +1.
int detect(double xi, double gamma, int station);

// Uniform delay on [0, T0 |sin 2 theta|^d], with 0^0 taken as 1.
double delay(double xi, double gamma, int station, double T0, double d, RandomStream& rng);

struct StationConfig {
    int station = 1;
    std::vector<double> angles;  // rotation angles gamma_1..gamma_M
    double T0 = 1.0;
    double d = 2.0;
};

// M angles drawn uniformly from [0, 2pi) using substream 0 of the station's settings stream.
std::vector<double> random_angles(std::size_t M, std::uint64_t seed, int station);

struct EventRecord {
    std::uint64_t n = 0;  // event index, 1-based
    int x = 1;            // +1 or -1
    double t = 0.0;       // time tag
    std::uint32_t m = 1;  // setting index, 1-based
    double gamma = 0.0;   // applied rotation angle

    bool operator==(const EventRecord&) const = default;
};

struct StationDataset {
    int station = 1;
    std::vector<double> angles;
    double T0 = 1.0;
    double d = 2.0;
    std::uint64_t seed = 0;
    std::vector<EventRecord> records;

    std::size_t M() const noexcept { return angles.size(); }
    bool operator==(const StationDataset&) const = default;
};

struct ExperimentConfig {
    std::uint64_t events = 1000000;
    SourceMode source;
    StationConfig station1{1, {}, 1.0, 2.0};
    StationConfig station2{2, {}, 1.0, 2.0};
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Events are generated in blocks of this size; block b draws from substream b + 1
// of every stream, so results do not depend on the thread count.
inline constexpr std::uint64_t kBlockEvents = 1u << 16;

using PairSink = std::function<void(const EventRecord&, const EventRecord&)>;

// Generates `events` pairs and hands them to `sink` in event-index order.
// Throws InvalidArgument for inconsistent configurations.
void run_experiment(const ExperimentConfig& config, const PairSink& sink);

// In-memory variant: both datasets have exactly `events` records.
std::pair<StationDataset, StationDataset> run_experiment(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

}  // namespace ebsim::eprb
