#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "krt/model.hpp"
#include "krt/quad.hpp"
#include "krt/roots.hpp"

namespace krt {

struct OracleOptions {
    RootOptions root{};
    /// Gauss nodes for conditional CDFs on [-1, t].
    int cdf_nodes = 64;
    /// Tail integration for models without exploitable structure.
    quad::TensorScheme tensor{16};
    quad::MonteCarloScheme monte_carlo{0x5EED, 20000};
    int tensor_max = quad::k_tensor_max;
};

/// Univariate conditional law of coordinate k given a fixed prefix y_[k-1].
/// cdf(t) = int_{-1}^t v(s) ds / int_{-1}^1 v(s) ds with v = hat f_k(prefix, .).
class ConditionalSlice {
public:
    ConditionalSlice(std::function<double(double)> unnormalized, int nodes);

    double cdf(double t) const;
    /// cdf'(t) with respect to Lebesgue measure.
    double density(double t) const;
    /// cdf^{-1}(u), u in [0, 1].
    double inverse(double u, const RootOptions& opt) const;
    /// (1/2) int_{-1}^{1} v, i.e. hat f_{k-1}(prefix) up to quadrature error.
    double normalizer() const { return 0.5 * mass_; }

private:
    std::function<double(double)> value_;
    int nodes_;
    double mass_;
};

/// Marginal densities hat f_k(y_[k]) = int f(y_[k], t) dmu(t) of one model, using the
/// model's product or ridge structure when present and tail quadrature otherwise.
class MarginalDensity {
public:
    MarginalDensity(DensityModel model, const OracleOptions& options = {});

    int dim() const { return model_.dim(); }
    const DensityModel& model() const { return model_; }

    /// hat f_k at y_[k] (y may be longer; only the first k entries are read). k = 0 gives 1.
    double operator()(int k, std::span<const double> y) const;
    ConditionalSlice conditional(int k, std::span<const double> prefix) const;

private:
    double generic_tail(int k, std::span<const double> prefix, double t) const;

    DensityModel model_;
    OracleOptions options_;
    struct RidgeData;
    std::shared_ptr<const RidgeData> ridge_;
};

double marginal_density(const DensityModel& model, int k, std::span<const double> y, const OracleOptions& options = {});
double conditional_cdf(const DensityModel& model, int k, std::span<const double> prefix, double t,
                       const OracleOptions& options = {});

/// Exact Knothe-Rosenblatt map T with T_# rho = pi on U_d, by componentwise
/// conditional-CDF inversion T_k(y) = F_pi(T_[k-1](y), .)^{-1}(F_rho(y_[k-1], y_k)).
/// Immutable after construction; all evaluation is thread-safe.
class ExactTransport {
public:
    ExactTransport(DensityModel rho, DensityModel pi, OracleOptions options = {});

    int dim() const { return rho_.dim(); }
    const DensityModel& reference() const { return rho_.model(); }
    const DensityModel& target() const { return pi_.model(); }
    const MarginalDensity& reference_marginals() const { return rho_; }
    const MarginalDensity& target_marginals() const { return pi_; }
    const OracleOptions& options() const { return options_; }

    struct Evaluation {
        std::vector<double> value;       ///< T_1..T_n
        std::vector<double> derivative;  ///< d_k T_k
    };

    /// T_[n](y_[n]) and the diagonal derivatives, n <= dim().
    Evaluation evaluate(std::span<const double> y, int n) const;
    double component(int k, std::span<const double> y) const;
    double component_derivative(int k, std::span<const double> y) const;
    std::vector<double> push(std::span<const double> y) const;
    /// S = T^{-1} by the mirrored CDF composition.
    std::vector<double> pull(std::span<const double> x) const;
    /// f_pi(T(y)) prod_j d_j T_j(y) - f_rho(y).
    double pushforward_residual(std::span<const double> y) const;

    /// d_k T_k at every point of a k-dimensional tensor grid (flat order of the grid).
    /// Prefix images and conditional slices are shared between grid points.
    std::vector<double> derivative_on_grid(int k, const quad::TensorGrid& grid) const;

private:
    MarginalDensity rho_;
    MarginalDensity pi_;
    OracleOptions options_;
};

double kr_component(const ExactTransport& T, int k, std::span<const double> y);
double kr_component_derivative(const ExactTransport& T, int k, std::span<const double> y);
double pushforward_residual(const ExactTransport& T, std::span<const double> y);

} // namespace krt
