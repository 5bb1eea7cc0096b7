#pragma once

#include <cmath>
#include <random>
#include <vector>

namespace krt::testing {

// Seeded generators for property tests.
inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int integer(std::mt19937_64& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

inline std::vector<double> point(std::mt19937_64& g, int d) {
    std::vector<double> y(d);
    for (double& v : y) v = uniform(g);
    return y;
}

// Closed-form map from the uniform reference to the density 1 + c x on [-1, 1].
inline double tilt_map(double c, double y) { return (-1.0 + std::sqrt(1.0 + c * c + 2.0 * c * y)) / c; }
inline double tilt_map_derivative(double c, double y) { return 1.0 / std::sqrt(1.0 + c * c + 2.0 * c * y); }

// Classical Legendre polynomial by the Bonnet recurrence.
inline double classical_legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return 1.0;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

} // namespace krt::testing
