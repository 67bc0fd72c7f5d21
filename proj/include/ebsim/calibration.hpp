#pragma once

#include <vector>

#include "ebsim/coincidence.hpp"

namespace ebsim::analysis {

/// How well the two-particle averages on a setting grid follow -cos 2(alpha - beta).
///
/// chi2 uses the binomial variance of an average of n values +-1,
/// (1 - E^2 + 1/n) / n, where the 1/n term keeps |E| = 1 settings finite.
/// Setting pairs without coincidences are left out of every statistic.
struct SingletAgreement {
    std::uint64_t coincidences = 0;
    std::size_t pairs_defined = 0;
    double max_abs_dev = 0.0;
    double rms_dev = 0.0;
    double chi2_per_dof = 0.0;
    double max_abs_E1 = 0.0;
    double max_abs_E2 = 0.0;
};

SingletAgreement singlet_agreement(const CoincidenceTable& table, const std::vector<double>& angles1,
                                   const std::vector<double>& angles2);

struct CalibrationPoint {
    double d = 0.0;
    SingletAgreement agreement;
};

struct CalibrationResult {
    std::vector<CalibrationPoint> points;
    double best_d = 0.0;  // smallest chi2 per degree of freedom
};

// Simulates `base` once per exponent (same seed, ByIndex counting while the
// events stream past) and compares the result with the singlet prediction.
CalibrationResult calibrate_d(const eprb::ExperimentConfig& base, const std::vector<double>& d_list,
                              const AnalysisConfig& cfg);

}  // namespace ebsim::analysis
