#include "ebsim/quantum.hpp"

#include <cmath>
#include <numbers>

namespace ebsim::quantum {

Intensities bs_intensities(double p0, double psi0, double psi1) {
    const double first = 0.5 * (1.0 + 2.0 * std::sqrt(p0 * (1.0 - p0)) * std::sin(psi0 - psi1));
    return {first, 1.0 - first};
}

Intensities mzi_probabilities(double phi0, double phi1) {
    const double c = std::cos(0.5 * (phi0 - phi1));
    const double p2 = c * c;
    return {p2, 1.0 - p2};
}

double singlet_E(double alpha, double beta) { return -std::cos(2.0 * (alpha - beta)); }

double S_of(const Correlation& E, double a, double b, double c, double d) {
    return E(a, c) - E(a, d) + E(b, c) + E(b, d);
}

double chsh_quantum_max() { return 2.0 * std::numbers::sqrt2; }

double bell_triangle_E(double alpha, double beta) {
    constexpr double pi = std::numbers::pi;
    double delta = std::fmod(std::abs(alpha - beta), pi);
    if (delta > 0.5 * pi) delta = pi - delta;
    return -1.0 + 4.0 * delta / pi;
}

}  // namespace ebsim::quantum
