#pragma once

#include <functional>

// Closed-form reference predictions. All angles are in radians.
namespace ebsim::quantum {

struct Intensities {
    double first = 0.0;
    double second = 0.0;
};

// Output intensities of a beam splitter fed with probability p0 on channel 0
// and phases psi0, psi1 on the two input channels.
Intensities bs_intensities(double p0, double psi0, double psi1);

// Mach-Zehnder detector probabilities (P2, P3) = (cos^2(phi/2), sin^2(phi/2)), phi = phi0 - phi1.
Intensities mzi_probabilities(double phi0, double phi1);

// Two-particle correlation of the singlet state: -cos 2(alpha - beta).
double singlet_E(double alpha, double beta);

// Single-particle averages of the singlet state (both zero).
inline double singlet_E1(double /*alpha*/) { return 0.0; }
inline double singlet_E2(double /*beta*/) { return 0.0; }

using Correlation = std::function<double(double, double)>;

// S = E(a, c) - E(a, d) + E(b, c) + E(b, d).
double S_of(const Correlation& E, double a, double b, double c, double d);

// Upper bound of |S| for any quantum state.
double chsh_quantum_max();

/// Correlation of the sign model without time selection:
/// x = sign(cos 2(xi - alpha)), y = sign(-cos 2(xi - beta)), averaged over uniform xi.
/// With delta the distance from (alpha - beta) to the nearest multiple of pi,
/// E = -1 + 4 delta / pi (a triangle wave of period pi).
double bell_triangle_E(double alpha, double beta);

}  // namespace ebsim::quantum
