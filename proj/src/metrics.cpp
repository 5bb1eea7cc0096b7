#include "krt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "krt/errors.hpp"
#include "krt/parallel.hpp"
#include "krt/random.hpp"

namespace krt {

ProbeSet low_discrepancy_probe(int dim, std::size_t n, std::uint64_t seed) {
    if (dim < 1) throw DomainError("probe dimension must be >= 1");
    return ProbeSet{dim, LowDiscrepancySequence(dim, seed).take(n)};
}

std::vector<ComponentError> component_sup_errors(const ExactTransport& oracle, const ApproxTransport& approx,
                                                 const ProbeSet& probe) {
    const int d = probe.dim;
    if (d > oracle.dim()) throw DomainError("probe dimension exceeds the oracle dimension");
    const std::size_t n = probe.size();
    std::vector<double> value_err(n * d), deriv_err(n * d);
    parallel_for(n, [&](std::size_t i) {
        const auto y = probe.point(i);
        const auto exact = oracle.evaluate(y, d);
        for (int k = 1; k <= d; ++k) {
            value_err[i * d + k - 1] = std::abs(exact.value[k - 1] - approx.value(k, y));
            deriv_err[i * d + k - 1] = std::abs(exact.derivative[k - 1] - approx.derivative(k, y));
        }
    });
    std::vector<ComponentError> out(d);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            out[k].value = std::max(out[k].value, value_err[i * d + k]);
            out[k].derivative = std::max(out[k].derivative, deriv_err[i * d + k]);
        }
    return out;
}

ComponentError component_sup_error(const ExactTransport& oracle, const ApproxTransport& approx, int k,
                                   const ProbeSet& probe) {
    if (k < 1 || k > probe.dim) throw DomainError("component_sup_error: k outside the probe dimension");
    ProbeSet head{k, {}};
    head.points.reserve(probe.size() * k);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const auto y = probe.point(i);
        head.points.insert(head.points.end(), y.begin(), y.begin() + k);
    }
    return component_sup_errors(oracle, approx, head)[k - 1];
}

namespace {
struct NodeTerms {
    double h2 = 0.0;
    double tv = 0.0;
    double kl = 0.0;
};

NodeTerms node_terms(double f_pi, double f_q) {
    if (!(f_pi > 0.0) || !(f_q > 0.0) || !std::isfinite(f_pi) || !std::isfinite(f_q))
        throw ModelError("statistical distances: non-positive density at an integration node");
    const double s = std::sqrt(f_q) - std::sqrt(f_pi);
    return {0.5 * s * s, 0.5 * std::abs(f_q - f_pi), f_q * std::log(f_q / f_pi) - f_q + f_pi};
}
} // namespace

Distances statistical_distances(const DensityModel& pi, const DensityFn& q, int d, const DistanceBudget& budget) {
    if (d != pi.dim()) throw DomainError("statistical distances: dimension mismatch");
    Distances out;
    if (!budget.nodes.empty()) {
        if (static_cast<int>(budget.nodes.size()) != d)
            throw DomainError("statistical distances: need one node count per coordinate");
        std::vector<quad::QuadratureRule> rules;
        for (int n : budget.nodes) rules.push_back(quad::gauss_legendre_cached(n));
        const quad::TensorGrid grid(std::move(rules));
        std::vector<NodeTerms> terms(grid.size());
        parallel_for(grid.size(), [&](std::size_t i) {
            std::vector<double> y(d);
            grid.point(i, y);
            terms[i] = node_terms(pi.evaluate(y), q(y));
        });
        NodeTerms sum;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double w = grid.weight(i);
            sum.h2 += w * terms[i].h2;
            sum.tv += w * terms[i].tv;
            sum.kl += w * terms[i].kl;
        }
        out.hellinger = std::sqrt(std::max(0.0, sum.h2));
        out.tv = std::max(0.0, sum.tv);
        out.kl = std::max(0.0, sum.kl);
        return out;
    }
    const std::size_t n = budget.monte_carlo.samples;
    if (n < 2) throw DomainError("statistical distances: Monte Carlo needs at least 2 samples");
    std::vector<NodeTerms> terms(n);
    constexpr std::size_t block = 4096;
    const std::size_t blocks = (n + block - 1) / block;
    parallel_for(blocks, [&](std::size_t b) {
        auto rng = make_engine(budget.monte_carlo.seed, b);
        std::vector<double> y(d);
        for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i) {
            for (double& v : y) v = uniform_pm1(rng);
            terms[i] = node_terms(pi.evaluate(y), q(y));
        }
    });
    double h2 = 0.0, tv = 0.0, tv2 = 0.0, kl = 0.0;
    for (const auto& t : terms) {
        h2 += t.h2;
        tv += t.tv;
        tv2 += t.tv * t.tv;
        kl += t.kl;
    }
    const double nn = static_cast<double>(n);
    out.hellinger = std::sqrt(std::max(0.0, h2 / nn));
    out.tv = tv / nn;
    out.kl = std::max(0.0, kl / nn);
    out.tv_std_error = std::sqrt(std::max(0.0, tv2 / nn - out.tv * out.tv) / (nn - 1.0));
    return out;
}

ProductMetric ProductMetric::from_decay(const BasisDecay& decay, int n) { return ProductMetric{decay.first(n)}; }

double ProductMetric::operator()(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != y.size()) throw DomainError("product metric: length mismatch");
    if (x.size() > c.size()) throw CapabilityError("product metric: not enough weights");
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += c[j] * std::abs(x[j] - y[j]);
    return s;
}

double wasserstein_upper_bound(std::span<const ComponentError> errors, const ProductMetric& metric) {
    if (errors.size() > metric.c.size()) throw CapabilityError("product metric: not enough weights");
    double s = 0.0;
    for (std::size_t k = 0; k < errors.size(); ++k) s += metric.c[k] * errors[k].value;
    return s;
}

double wasserstein_upper_bound(const ExactTransport& oracle, const ApproxTransport& approx,
                               const ProductMetric& metric, const ProbeSet& probe) {
    const auto errors = component_sup_errors(oracle, approx, probe);
    return wasserstein_upper_bound(errors, metric);
}

EmpiricalW1 first_marginal_w1(const ExactTransport& oracle, const ApproxTransport& approx, std::size_t n,
                              std::uint64_t seed, double scale) {
    if (n < 2) throw DomainError("empirical W1 needs at least 2 samples");
    std::vector<double> exact(n), approx_x(n);
    const auto reference = oracle.reference_marginals().conditional(1, {});
    constexpr std::size_t block = 4096;
    const std::size_t blocks = (n + block - 1) / block;
    parallel_for(blocks, [&](std::size_t b) {
        auto rng = make_engine(seed, b);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i) {
            const double y = reference.inverse(unit(rng), oracle.options().root);
            exact[i] = oracle.component(1, std::span<const double>(&y, 1));
            approx_x[i] = approx.value(1, std::span<const double>(&y, 1));
        }
    });
    std::sort(exact.begin(), exact.end());
    std::sort(approx_x.begin(), approx_x.end());
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = scale * std::abs(exact[i] - approx_x[i]);
        s += v;
        s2 += v * v;
    }
    const double nn = static_cast<double>(n);
    const double mean = s / nn;
    return {mean, std::sqrt(std::max(0.0, s2 / nn - mean * mean) / (nn - 1.0))};
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw FitError("fit: abscissa and ordinate lengths differ");
    if (x.size() < 3) throw FitError("fit: need at least 3 points, got " + std::to_string(x.size()));
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw FitError("fit: log-log fit needs positive values");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 1e-24)) throw FitError("fit: degenerate abscissae");
    return sxy / sxx;
}

double fit_rate(std::span<const RateRow> rows) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(static_cast<double>(r.n_eps));
        y.push_back(r.sup_error_sum);
    }
    return fit_slope(x, y);
}

void RateReport::write_header(std::ostream& os) { os << "eps,n_eps,sup_error_sum,hellinger,tv,kl,w_bound\n"; }

void RateReport::write_row(std::ostream& os, const RateRow& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.6g,%zu,%.10e,%.10e,%.10e,%.10e,%.10e\n", r.eps, r.n_eps, r.sup_error_sum,
                  r.hellinger, r.tv, r.kl, r.w_bound);
    os << buf;
}

void RateReport::write_csv(std::ostream& os) const {
    write_header(os);
    for (const auto& r : rows) write_row(os, r);
}

void RateReport::write_fit_csv(std::ostream& os) const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", slope, theoretical_slope);
    os << "fitted_slope,theoretical_slope\n" << buf;
}

} // namespace krt
