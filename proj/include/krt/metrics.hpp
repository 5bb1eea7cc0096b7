#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "krt/model.hpp"
#include "krt/oracle.hpp"
#include "krt/quad.hpp"
#include "krt/transport.hpp"

namespace krt {

/// n points of U_k stored row-major.
struct ProbeSet {
    int dim = 0;
    std::vector<double> points;

    std::size_t size() const { return dim ? points.size() / dim : 0; }
    std::span<const double> point(std::size_t i) const { return std::span<const double>(points).subspan(i * dim, dim); }
};

/// Shifted Kronecker points in U_dim (deterministic given seed).
ProbeSet low_discrepancy_probe(int dim, std::size_t n, std::uint64_t seed);

struct ComponentError {
    double value = 0.0;       ///< max |T_k - T~_k| over the probe
    double derivative = 0.0;  ///< max |d_k T_k - d_k T~_k| over the probe
};

/// Probe maxima for every k = 1..probe.dim (probe.dim <= oracle.dim()).
std::vector<ComponentError> component_sup_errors(const ExactTransport& oracle, const ApproxTransport& approx,
                                                 const ProbeSet& probe);
/// Probe maximum for one component; only the first k probe coordinates are read.
ComponentError component_sup_error(const ExactTransport& oracle, const ApproxTransport& approx, int k,
                                   const ProbeSet& probe);

struct Distances {
    double hellinger = 0.0;
    double tv = 0.0;
    double kl = 0.0;
    /// Monte Carlo standard errors (zero for tensor rules).
    double tv_std_error = 0.0;
};

using DensityFn = std::function<double(std::span<const double>)>;

/// Per-coordinate node counts for tensor integration, or Monte Carlo.
struct DistanceBudget {
    std::vector<int> nodes;  ///< size d for the tensor route; empty selects Monte Carlo
    quad::MonteCarloScheme monte_carlo{0xD157, 100000};
};

/// H = ||sqrt q - sqrt pi||_{L2(mu)} / sqrt 2, TV = ||q - pi||_{L1(mu)} / 2, KL = KL(q || pi).
/// KL is integrated as q log(q/pi) - q + pi, which has the same integral and is pointwise >= 0.
Distances statistical_distances(const DensityModel& pi, const DensityFn& q, int d, const DistanceBudget& budget);

/// d(x, y) = sum_j c_j |x_j - y_j|.
struct ProductMetric {
    std::vector<double> c;

    static ProductMetric from_decay(const BasisDecay& decay, int n);
    double operator()(std::span<const double> x, std::span<const double> y) const;
};

/// sum_k c_k * value error_k.
double wasserstein_upper_bound(std::span<const ComponentError> errors, const ProductMetric& metric);
double wasserstein_upper_bound(const ExactTransport& oracle, const ApproxTransport& approx,
                               const ProductMetric& metric, const ProbeSet& probe);

struct EmpiricalW1 {
    double value = 0.0;
    double std_error = 0.0;
};

/// Sorted-sample W_1 between the first marginals of T#rho and T~#rho, both pushed from the
/// same n reference draws; scaled by the metric weight `scale`.
EmpiricalW1 first_marginal_w1(const ExactTransport& oracle, const ApproxTransport& approx, std::size_t n,
                              std::uint64_t seed, double scale = 1.0);

struct RateRow {
    double eps = 0.0;
    std::size_t n_eps = 0;
    double sup_error_sum = 0.0;
    double hellinger = 0.0;
    double tv = 0.0;
    double kl = 0.0;
    double w_bound = 0.0;
};

/// Least-squares slope of log y against log x.
double fit_slope(std::span<const double> x, std::span<const double> y);
/// Slope of log(sup_error_sum) against log(n_eps). FitError for fewer than 3 rows,
/// non-positive values or identical abscissae.
double fit_rate(std::span<const RateRow> rows);

struct RateReport {
    std::vector<RateRow> rows;
    double slope = 0.0;
    double theoretical_slope = 0.0;  ///< -(1/p - 1)

    static void write_header(std::ostream& os);
    static void write_row(std::ostream& os, const RateRow& row);
    void write_csv(std::ostream& os) const;
    /// `fitted_slope,theoretical_slope` plus one row.
    void write_fit_csv(std::ostream& os) const;
};

} // namespace krt
