#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ebsim/coincidence.hpp"
#include "ebsim/dlm.hpp"
#include "ebsim/eprb.hpp"

namespace ebsim::config {

/// Every parameter a run can take. Angles are stored in degrees, exactly as
/// written in configuration text; the *_rad helpers convert at the boundary.
struct RunConfig {
    // shared
    std::optional<std::uint64_t> N;  // command-specific default when absent
    std::uint64_t seed = 1234567;
    unsigned threads = 1;

    // beam splitter / interferometer
    double alpha = 0.99;
    double p0 = 1.0;
    double psi0 = 0.0;
    double psi1 = 0.0;
    InputPhasePolicy psi_policy = InputPhasePolicy::RandomPerRun;
    std::uint64_t transient = 1000;
    double phi0 = 0.0;
    double phi1 = 0.0;
    double phi_step = 10.0;
    bool sweep = true;

    // EPRB generation
    std::size_t M = 20;
    std::vector<double> angles1;  // empty: M random angles
    std::vector<double> angles2;
    eprb::SourceMode::Kind source = eprb::SourceMode::Kind::SingletRandom;
    double xi1 = 0.0;
    double xi2 = 0.0;
    double T0 = 1.0;
    double d = 2.0;
    std::vector<double> d_list{0, 1, 2, 3, 4};

    // analysis
    std::optional<double> tau;  // default 0.00025 T0
    std::optional<double> W;    // default 0.00025 T0; "inf" allowed
    double delta = 0.0;
    bool auto_delta = false;
    double delta_resolution = 0.0;  // default 4 tau
    double search_range = 0.0;      // default 100 tau
    analysis::Pairing pairing = analysis::Pairing::ByIndex;
    analysis::WindowRule rule = analysis::WindowRule::Discretized;
    std::vector<double> windows;  // smax-sweep
    double bin_width = 0.0;       // default 8 tau
    std::optional<int> x_filter;
    std::optional<int> y_filter;
    std::optional<std::uint32_t> m1_filter;
    std::optional<std::uint32_t> m2_filter;

    // oracle
    double grid_step = 5.0;

    // paths
    std::string out;
    std::string out1;
    std::string out2;
    std::string in1;
    std::string in2;
    std::string trace;
    std::string summary;

    double tau_value() const { return tau.value_or(0.00025 * T0); }
    double W_value() const { return W.value_or(0.00025 * T0); }
    analysis::AnalysisConfig analysis() const;
    eprb::ExperimentConfig experiment(std::uint64_t default_events) const;
};

// Names of every accepted key.
const std::vector<std::string>& known_keys();

// Applies key=value assignments in order, then validates. Throws ConfigError
// naming the offending key for unknown keys and out-of-range values.
RunConfig parse_assignments(const std::vector<std::pair<std::string, std::string>>& assignments,
                            RunConfig base = {});

// key=value lines; '#' starts a comment, blank lines are ignored, and several
// comma- or space-separated assignments may share a line.
RunConfig parse_config(const std::string& text, RunConfig base = {});

// Ranges and cross-field constraints (tau <= W, ...).
void validate(const RunConfig& cfg);

// Canonical "key=value" lines for every key, in known_keys() order.
std::string canonical_text(const RunConfig& cfg);

// FNV-1a 64-bit hash of canonical_text(), as 16 hex digits.
std::string digest(const RunConfig& cfg);

}  // namespace ebsim::config
