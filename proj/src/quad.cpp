#include "krt/quad.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "krt/errors.hpp"
#include "krt/parallel.hpp"
#include "krt/random.hpp"

namespace krt::quad {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

} // namespace

QuadratureRule gauss_legendre(int n) {
    if (n < 1 || n > 256) throw CapabilityError("gauss_legendre: node count " + std::to_string(n) + " outside [1, 256]");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 1.0;
        return rule;
    }

    // Golub-Welsch: eigenvalues of the Jacobi matrix of the Legendre recurrence.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw IntegrationError("gauss_legendre: tridiagonal eigensolver failed");

    // Polish each node with Newton on P_n and take weights from P_n'; both are more
    // accurate than the eigenvector components for large n.
    for (int i = 0; i < n; ++i) {
        double x = solver.eigenvalues()[i];
        for (int it = 0; it < 3; ++it) {
            const auto [p, dp] = legendre_with_derivative(n, x);
            x -= p / dp;
        }
        const auto [p, dp] = legendre_with_derivative(n, x);
        (void)p;
        rule.nodes[i] = x;
        rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp); // 2/((1-x^2)P'^2), halved for mu
    }

    // Enforce exact symmetry.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

const QuadratureRule& gauss_legendre_cached(int n) {
    if (n < 1 || n > 256) throw CapabilityError("gauss_legendre: node count " + std::to_string(n) + " outside [1, 256]");
    static std::array<std::unique_ptr<QuadratureRule>, 257> cache;
    static std::array<std::once_flag, 257> once;
    std::call_once(once[n], [n] { cache[n] = std::make_unique<QuadratureRule>(gauss_legendre(n)); });
    return *cache[n];
}

TensorGrid::TensorGrid(std::vector<QuadratureRule> rules) : rules_(std::move(rules)) {
    for (const auto& r : rules_) size_ *= r.size();
}

void TensorGrid::unflatten(std::size_t i, std::span<int> idx) const {
    for (int j = dim() - 1; j >= 0; --j) {
        const std::size_t n = rules_[j].size();
        idx[j] = static_cast<int>(i % n);
        i /= n;
    }
}

void TensorGrid::point(std::size_t i, std::span<double> y) const {
    for (int j = dim() - 1; j >= 0; --j) {
        const std::size_t n = rules_[j].size();
        y[j] = rules_[j].nodes[i % n];
        i /= n;
    }
}

double TensorGrid::weight(std::size_t i) const {
    double w = 1.0;
    for (int j = dim() - 1; j >= 0; --j) {
        const std::size_t n = rules_[j].size();
        w *= rules_[j].weights[i % n];
        i /= n;
    }
    return w;
}

namespace {

Estimate integrate_tensor(const Integrand& f, int k, int nodes) {
    const auto& rule = gauss_legendre_cached(nodes);
    const std::size_t n = rule.size();
    // Slabs over the first coordinate; each slab walks the remaining k-1 coordinates.
    std::vector<double> slab(n, 0.0);
    parallel_for(n, [&](std::size_t i0) {
        std::vector<double> y(k);
        std::vector<std::size_t> idx(k, 0);
        y[0] = rule.nodes[i0];
        for (int j = 1; j < k; ++j) y[j] = rule.nodes[0];
        double sum = 0.0;
        while (true) {
            double w = rule.weights[i0];
            for (int j = 1; j < k; ++j) w *= rule.weights[idx[j]];
            sum += w * f(y);
            int j = k - 1;
            while (j >= 1) {
                if (++idx[j] < n) {
                    y[j] = rule.nodes[idx[j]];
                    break;
                }
                idx[j] = 0;
                y[j] = rule.nodes[0];
                --j;
            }
            if (j < 1) break;
        }
        slab[i0] = sum;
    });
    double total = 0.0;
    for (double s : slab) total += s;
    return {total, 0.0};
}

Estimate integrate_mc(const Integrand& f, int k, const MonteCarloScheme& mc) {
    if (mc.samples == 0) throw IntegrationError("monte carlo integration with zero samples");
    constexpr std::size_t block = 4096;
    const std::size_t blocks = (mc.samples + block - 1) / block;
    std::vector<double> sums(blocks, 0.0), sqsums(blocks, 0.0);
    parallel_for(blocks, [&](std::size_t b) {
        auto rng = make_engine(mc.seed, b);
        std::vector<double> y(k);
        const std::size_t count = std::min(block, mc.samples - b * block);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            for (int j = 0; j < k; ++j) y[j] = uniform_pm1(rng);
            const double v = f(y);
            s += v;
            s2 += v * v;
        }
        sums[b] = s;
        sqsums[b] = s2;
    });
    double s = 0.0, s2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        s += sums[b];
        s2 += sqsums[b];
    }
    const double n = static_cast<double>(mc.samples);
    const double mean = s / n;
    const double var = n > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

} // namespace

Estimate integrate_with_error(const Integrand& f, int k, const Scheme& scheme, int tensor_max) {
    if (k < 1) throw DomainError("integrate: dimension must be >= 1");
    if (const auto* t = std::get_if<TensorScheme>(&scheme)) {
        if (k > tensor_max)
            throw CapabilityError("integrate: tensor rule requested in dimension " + std::to_string(k) +
                                  " > tensor_max " + std::to_string(tensor_max));
        return integrate_tensor(f, k, t->nodes);
    }
    return integrate_mc(f, k, std::get<MonteCarloScheme>(scheme));
}

} // namespace krt::quad
