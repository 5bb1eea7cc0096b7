#pragma once

#include <functional>
#include <vector>

namespace krt {

/// Chebyshev series on [a, b], fitted adaptively to a smooth function.
class ChebyshevSeries {
public:
    ChebyshevSeries() = default;

    /// Interpolates f at Chebyshev points of the first kind, doubling the degree until the
    /// trailing coefficients fall below tol relative to the largest one.
    static ChebyshevSeries fit(const std::function<double(double)>& f, double a, double b, double tol = 1e-15,
                               int max_points = 4097);

    double operator()(double x) const;
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    double lower() const { return a_; }
    double upper() const { return b_; }
    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    double a_ = -1.0;
    double b_ = 1.0;
    std::vector<double> coeffs_;
};

} // namespace krt
