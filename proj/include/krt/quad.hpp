#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace krt::quad {

/// Quadrature rule for the probability measure mu = lambda/2 on [-1,1]:
/// nodes strictly increasing, weights positive and summing to one.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    /// Sum of w_i f(x_i).
    template <class F>
    double apply(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

/// n-node Gauss-Legendre rule rescaled to mu. 1 <= n <= 256.
QuadratureRule gauss_legendre(int n);

/// Shared immutable copy of gauss_legendre(n); safe to call from many threads.
const QuadratureRule& gauss_legendre_cached(int n);

/// Integral of f over [a, b] with respect to Lebesgue measure using the n-node Gauss rule.
template <class F>
double integrate_interval(F&& f, double a, double b, int n) {
    const auto& rule = gauss_legendre_cached(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    // mu-weights sum to 1, Lebesgue length is b - a.
    return 2.0 * half * s;
}

using Integrand = std::function<double(std::span<const double>)>;

struct TensorScheme {
    int nodes = 16;
};

struct MonteCarloScheme {
    std::uint64_t seed = 0;
    std::size_t samples = 100000;
};

using Scheme = std::variant<TensorScheme, MonteCarloScheme>;

/// Largest dimension integrated with a full tensor rule.
inline constexpr int k_tensor_max = 6;

struct Estimate {
    double value = 0.0;
    /// Standard error for Monte Carlo; zero for deterministic rules.
    double std_error = 0.0;
};

/// mu^k-integral of f. Tensor schemes require k <= tensor_max (CapabilityError otherwise).
Estimate integrate_with_error(const Integrand& f, int k, const Scheme& scheme, int tensor_max = k_tensor_max);

inline double integrate(const Integrand& f, int k, const Scheme& scheme, int tensor_max = k_tensor_max) {
    return integrate_with_error(f, k, scheme, tensor_max).value;
}

/// Tensor product of per-dimension rules (dimensions may have different node counts).
class TensorGrid {
public:
    explicit TensorGrid(std::vector<QuadratureRule> rules);

    int dim() const { return static_cast<int>(rules_.size()); }
    std::size_t size() const { return size_; }
    const QuadratureRule& rule(int j) const { return rules_[j]; }

    /// Multi-index (per-dimension node positions) of flat point i; last dimension varies fastest.
    void unflatten(std::size_t i, std::span<int> idx) const;
    void point(std::size_t i, std::span<double> y) const;
    double weight(std::size_t i) const;

private:
    std::vector<QuadratureRule> rules_;
    std::size_t size_ = 1;
};

} // namespace krt::quad
