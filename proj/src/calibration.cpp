#include "ebsim/calibration.hpp"

#include <cmath>

#include "ebsim/error.hpp"
#include "ebsim/quantum.hpp"

namespace ebsim::analysis {

SingletAgreement singlet_agreement(const CoincidenceTable& table, const std::vector<double>& angles1,
                                   const std::vector<double>& angles2) {
    if (angles1.size() != table.M1() || angles2.size() != table.M2()) {
        throw InvalidArgument("angle lists do not match the coincidence table");
    }
    SingletAgreement a;
    a.coincidences = table.total();
    double sum_sq = 0.0;
    double chi2 = 0.0;
    for (std::uint32_t m1 = 1; m1 <= table.M1(); ++m1) {
        for (std::uint32_t m2 = 1; m2 <= table.M2(); ++m2) {
            const auto s = stats_for(table, m1, m2);
            if (!s.E) continue;
            const double q = quantum::singlet_E(angles1[m1 - 1], angles2[m2 - 1]);
            const double dev = *s.E - q;
            const double n = static_cast<double>(s.coincidences);
            ++a.pairs_defined;
            sum_sq += dev * dev;
            chi2 += dev * dev * n / (1.0 - q * q + 1.0 / n);
            a.max_abs_dev = std::max(a.max_abs_dev, std::abs(dev));
            a.max_abs_E1 = std::max(a.max_abs_E1, std::abs(*s.E1));
            a.max_abs_E2 = std::max(a.max_abs_E2, std::abs(*s.E2));
        }
    }
    if (a.pairs_defined > 0) {
        a.rms_dev = std::sqrt(sum_sq / static_cast<double>(a.pairs_defined));
        a.chi2_per_dof = chi2 / static_cast<double>(a.pairs_defined);
    }
    return a;
}

CalibrationResult calibrate_d(const eprb::ExperimentConfig& base, const std::vector<double>& d_list,
                              const AnalysisConfig& cfg) {
    if (d_list.empty()) throw InvalidArgument("calibrate_d: no exponents given");
    CalibrationResult result;
    bool have_best = false;
    double best_chi2 = 0.0;
    for (double d : d_list) {
        eprb::ExperimentConfig c = base;
        c.station1.d = d;
        c.station2.d = d;
        CoincidenceCounter counter(c.station1.angles.size(), c.station2.angles.size(), cfg);
        eprb::run_experiment(c, [&](const EventRecord& r1, const EventRecord& r2) { counter.add(r1, r2); });

        CalibrationPoint p{d, singlet_agreement(counter.table(), c.station1.angles, c.station2.angles)};
        if (p.agreement.pairs_defined > 0 && (!have_best || p.agreement.chi2_per_dof < best_chi2)) {
            have_best = true;
            best_chi2 = p.agreement.chi2_per_dof;
            result.best_d = d;
        }
        result.points.push_back(p);
    }
    if (!have_best) throw DataError("calibrate_d: no coincidences for any exponent");
    return result;
}

}  // namespace ebsim::analysis
