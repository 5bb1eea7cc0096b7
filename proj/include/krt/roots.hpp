#pragma once

#include <cmath>
#include <string>

#include "krt/errors.hpp"

namespace krt {

struct RootOptions {
    double tolerance = 1e-12;
    int max_iterations = 200;
};

/// Solves F(x) = target for a strictly increasing F on [lo, hi] with F(lo) <= target <= F(hi).
/// `eval(x)` returns {F(x), F'(x)}. Newton steps are taken when they stay strictly inside
/// the current bracket and otherwise replaced by bisection, so termination is guaranteed.
template <class Eval>
double monotone_inverse(Eval&& eval, double target, double lo, double hi, const RootOptions& opt = {}) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < opt.max_iterations; ++it) {
        const auto [fx, dfx] = eval(x);
        const double r = fx - target;
        if (r == 0.0) return x;
        if (r < 0.0)
            lo = x;
        else
            hi = x;
        double next = x - r / dfx;
        const bool newton_ok = std::isfinite(next) && dfx > 0.0 && next > lo && next < hi;
        if (!newton_ok) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step <= opt.tolerance || hi - lo <= opt.tolerance) return x;
    }
    throw ConvergenceError("monotone_inverse: no convergence after " + std::to_string(opt.max_iterations) + " iterations",
                           lo, hi);
}

} // namespace krt
