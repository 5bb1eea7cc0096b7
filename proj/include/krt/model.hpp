#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace krt {

/// Decay of the basis norms b_j (1-based j) together with a summability exponent p
/// such that sum_j b_j^p < infinity.
struct BasisDecay {
    enum class Rule { Algebraic, Explicit };

    Rule rule = Rule::Algebraic;
    double c = 1.0;  ///< algebraic: b_j = c * j^-r
    double r = 2.0;
    double p = 0.6;
    std::vector<double> values;  ///< explicit: b_1, b_2, ...; zero-extended never, so j <= size
    std::string source = "algebraic";

    static BasisDecay algebraic(double c, double r, double p);
    static BasisDecay explicit_values(std::vector<double> b, double p);

    /// b_j for j >= 1. Explicit rules throw CapabilityError past their length.
    double b(int j) const;
    std::vector<double> first(int n) const;
    /// r p > 1 for algebraic rules; trivially true for finite explicit sequences.
    bool summable() const;
    /// Number of b_j available (INT_MAX for algebraic rules).
    int available() const;
};

struct DensityBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// f(y) = prod_j (1 + c_j y_j); each factor integrates to one under mu.
struct ProductTilt {
    std::vector<double> c;
};

/// f(y) proportional to profile(sum_j weight(j) y_j), j 1-based.
struct RidgeProfile {
    std::function<double(int)> weight;
    std::function<double(double)> profile;
};

using ModelStructure = std::variant<std::monostate, ProductTilt, RidgeProfile>;

/// Unnormalized density on coefficient vectors of any length; missing coordinates are zero.
using RawDensity = std::function<double(std::span<const double>)>;
/// Bounds of the raw density over U_d.
using RawBounds = std::function<DensityBounds(int d)>;

/// Normalized density y_[d] -> f(y_[d], 0, 0, ...) / Z_d with respect to mu on U_d.
/// Immutable and cheap to copy; evaluation is thread-safe.
class DensityModel {
public:
    DensityModel(std::string family, RawDensity raw, RawBounds raw_bounds, BasisDecay decay, ModelStructure structure,
                 int d);

    int dim() const { return d_; }
    const std::string& family() const { return impl_->family; }
    const BasisDecay& decay() const { return impl_->decay; }
    const ModelStructure& structure() const { return impl_->structure; }
    double normalization() const { return z_; }
    DensityBounds bounds() const;

    /// Checked evaluation: y must have length dim() with entries in [-1,1].
    double operator()(std::span<const double> y) const;
    /// Normalized value without domain checks (hot loops).
    double evaluate(std::span<const double> y) const { return impl_->raw(y) / z_; }
    double unnormalized(std::span<const double> y) const { return impl_->raw(y); }

    DensityModel truncate(int d) const;

private:
    struct Impl {
        std::string family;
        RawDensity raw;
        RawBounds raw_bounds;
        BasisDecay decay;
        ModelStructure structure;
    };
    DensityModel(std::shared_ptr<const Impl> impl, int d);
    static double compute_normalization(const Impl& impl, int d);

    std::shared_ptr<const Impl> impl_;
    int d_;
    double z_;
};

double eval_density(const DensityModel& model, std::span<const double> y);
DensityModel truncate(const DensityModel& model, int d);

DensityModel uniform_model(int d, BasisDecay decay = {});
/// Product of linear tilts 1 + c_j y_j, |c_j| < 1; coordinates past c.size() are untilted.
DensityModel tilt_model(std::vector<double> c, int d, BasisDecay decay = {});

/// Forward map y -> R^m. For linear maps `coefficient(i, j)` (0-based i, 1-based j) is set.
struct ForwardMap {
    int m = 1;
    std::function<void(std::span<const double>, std::span<double>)> apply;
    std::function<double(int, int)> coefficient;

    bool linear() const { return static_cast<bool>(coefficient); }
};

/// Point observations of Phi(y) = sum_j y_j b_j cos(j pi x) at sensors x_i = i/m, i = 0..m-1.
/// For m = 1 this is the functional sum_j b_j y_j.
ForwardMap sensor_forward_map(const BasisDecay& decay, int m);

/// Gaussian-likelihood posterior under the uniform prior:
/// f(y) proportional to exp(-1/2 (data - G(y))^T P (data - G(y))) with P the noise precision.
struct PosteriorModel {
    ForwardMap forward;
    std::vector<double> data;
    Eigen::MatrixXd noise_precision;

    static PosteriorModel with_noise_variance(ForwardMap forward, std::vector<double> data, double variance);
};

DensityModel posterior_model(const PosteriorModel& spec, const BasisDecay& decay, int d);

} // namespace krt
