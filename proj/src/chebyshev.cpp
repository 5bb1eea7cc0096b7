#include "krt/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "krt/errors.hpp"

namespace krt {

namespace {

std::vector<double> chebyshev_coefficients(const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    std::vector<double> c(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += values[i] * std::cos(std::numbers::pi * k * (i + 0.5) / n);
        c[k] = (k == 0 ? 1.0 : 2.0) * s / n;
    }
    return c;
}

} // namespace

ChebyshevSeries ChebyshevSeries::fit(const std::function<double(double)>& f, double a, double b, double tol,
                                     int max_points) {
    ChebyshevSeries out;
    out.a_ = a;
    out.b_ = b;
    if (b <= a) {
        out.coeffs_ = {f(a)};
        return out;
    }
    for (int n = 17;; n = 2 * n - 1) {
        std::vector<double> values(n);
        for (int i = 0; i < n; ++i) {
            const double x = std::cos(std::numbers::pi * (i + 0.5) / n);
            values[i] = f(0.5 * (a + b) + 0.5 * (b - a) * x);
            if (!std::isfinite(values[i])) throw ModelError("chebyshev fit: non-finite function value");
        }
        auto c = chebyshev_coefficients(values);
        double scale = 0.0;
        for (double v : c) scale = std::max(scale, std::abs(v));
        double tail = 0.0;
        const int tail_len = std::max(4, n / 8);
        for (int k = n - tail_len; k < n; ++k) tail = std::max(tail, std::abs(c[k]));
        const bool converged = tail <= tol * std::max(scale, 1e-300);
        if (converged || 2 * n - 1 > max_points) {
            if (!converged) throw IntegrationError("chebyshev fit: no convergence at " + std::to_string(n) + " points");
            // Drop negligible trailing terms.
            int keep = n;
            while (keep > 1 && std::abs(c[keep - 1]) <= 0.1 * tol * scale) --keep;
            c.resize(keep);
            out.coeffs_ = std::move(c);
            return out;
        }
    }
}

double ChebyshevSeries::operator()(double x) const {
    const double t = (2.0 * x - a_ - b_) / (b_ - a_);
    if (coeffs_.size() == 1) return coeffs_[0];
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = coeffs_.size() - 1; k >= 1; --k) {
        const double b0 = 2.0 * t * b1 - b2 + coeffs_[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + coeffs_[0];
}

} // namespace krt
