#include "krt/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <climits>
#include <cmath>
#include <numbers>

#include "krt/errors.hpp"
#include "krt/quad.hpp"
#include "krt/ridge.hpp"

namespace krt {

BasisDecay BasisDecay::algebraic(double c, double r, double p) {
    if (!(c > 0.0) || !(r > 0.0)) throw DomainError("algebraic decay needs c > 0 and r > 0");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("summability exponent p must lie in (0, 1)");
    BasisDecay d;
    d.rule = Rule::Algebraic;
    d.c = c;
    d.r = r;
    d.p = p;
    d.source = "algebraic";
    return d;
}

BasisDecay BasisDecay::explicit_values(std::vector<double> b, double p) {
    for (double v : b)
        if (!(v > 0.0)) throw DomainError("explicit decay values must be positive");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("summability exponent p must lie in (0, 1)");
    BasisDecay d;
    d.rule = Rule::Explicit;
    d.values = std::move(b);
    d.p = p;
    d.source = "explicit";
    return d;
}

double BasisDecay::b(int j) const {
    if (j < 1) throw DomainError("basis index is 1-based");
    if (rule == Rule::Algebraic) return c * std::pow(static_cast<double>(j), -r);
    if (j > static_cast<int>(values.size()))
        throw CapabilityError("explicit decay has only " + std::to_string(values.size()) + " entries, b_" +
                              std::to_string(j) + " requested");
    return values[j - 1];
}

std::vector<double> BasisDecay::first(int n) const {
    std::vector<double> out(n);
    for (int j = 1; j <= n; ++j) out[j - 1] = b(j);
    return out;
}

bool BasisDecay::summable() const { return rule == Rule::Explicit || r * p > 1.0; }

int BasisDecay::available() const {
    return rule == Rule::Algebraic ? INT_MAX : static_cast<int>(values.size());
}

DensityModel::DensityModel(std::string family, RawDensity raw, RawBounds raw_bounds, BasisDecay decay,
                           ModelStructure structure, int d)
    : DensityModel(std::make_shared<const Impl>(Impl{std::move(family), std::move(raw), std::move(raw_bounds),
                                                     std::move(decay), std::move(structure)}),
                   d) {}

DensityModel::DensityModel(std::shared_ptr<const Impl> impl, int d) : impl_(std::move(impl)), d_(d), z_(1.0) {
    if (d < 1) throw DomainError("density model dimension must be >= 1");
    z_ = compute_normalization(*impl_, d);
}

double DensityModel::compute_normalization(const Impl& impl, int d) {
    if (std::holds_alternative<ProductTilt>(impl.structure)) return 1.0;
    if (const auto* ridge = std::get_if<RidgeProfile>(&impl.structure)) {
        std::vector<double> w(d);
        for (int j = 1; j <= d; ++j) w[j - 1] = ridge->weight(j);
        return RidgeTails(std::move(w), ridge->profile).total();
    }
    if (d > quad::k_tensor_max)
        throw CapabilityError("normalization of an unstructured model needs d <= " + std::to_string(quad::k_tensor_max));

    // Doubling tensor Gauss rules until the relative change drops below 1e-12.
    const quad::Integrand f = [&](std::span<const double> y) { return impl.raw(y); };
    double previous = quad::integrate(f, d, quad::TensorScheme{4});
    for (int n = 8; n <= 256; n *= 2) {
        if (std::pow(static_cast<double>(n), d) > 5e7) break;
        const double current = quad::integrate(f, d, quad::TensorScheme{n});
        if (std::abs(current - previous) <= 1e-12 * std::abs(current)) {
            if (!(current > 0.0)) throw ModelError("normalization constant is not positive");
            return current;
        }
        previous = current;
    }
    throw IntegrationError("normalization did not converge to 1e-12 within the tensor budget (d = " +
                           std::to_string(d) + ")");
}

DensityBounds DensityModel::bounds() const {
    const auto raw = impl_->raw_bounds(d_);
    return {raw.lower / z_, raw.upper / z_};
}

double DensityModel::operator()(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != d_)
        throw DomainError("eval_density: expected " + std::to_string(d_) + " coordinates, got " +
                          std::to_string(y.size()));
    for (double v : y)
        if (!(v >= -1.0 && v <= 1.0)) throw DomainError("eval_density: coordinate outside [-1, 1]");
    const double v = evaluate(y);
    if (!std::isfinite(v)) throw ModelError("eval_density: evaluator returned a non-finite value");
    return v;
}

DensityModel DensityModel::truncate(int d) const { return DensityModel(impl_, d); }

double eval_density(const DensityModel& model, std::span<const double> y) { return model(y); }

DensityModel truncate(const DensityModel& model, int d) { return model.truncate(d); }

DensityModel uniform_model(int d, BasisDecay decay) {
    return DensityModel(
        "uniform", [](std::span<const double>) { return 1.0; },
        [](int) { return DensityBounds{1.0, 1.0}; }, std::move(decay), ProductTilt{}, d);
}

DensityModel tilt_model(std::vector<double> c, int d, BasisDecay decay) {
    for (double v : c)
        if (!(std::abs(v) < 1.0)) throw DomainError("tilt coefficients must satisfy |c_j| < 1");
    auto raw = [c](std::span<const double> y) {
        double f = 1.0;
        const std::size_t n = std::min(c.size(), y.size());
        for (std::size_t j = 0; j < n; ++j) f *= 1.0 + c[j] * y[j];
        return f;
    };
    auto bounds = [c](int dim) {
        DensityBounds b{1.0, 1.0};
        for (int j = 0; j < std::min<int>(dim, static_cast<int>(c.size())); ++j) {
            b.lower *= 1.0 - std::abs(c[j]);
            b.upper *= 1.0 + std::abs(c[j]);
        }
        return b;
    };
    ProductTilt structure{c};
    return DensityModel("tilt", std::move(raw), std::move(bounds), std::move(decay), std::move(structure), d);
}

ForwardMap sensor_forward_map(const BasisDecay& decay, int m) {
    if (m < 1) throw DomainError("forward map needs m >= 1 observations");
    auto coefficient = [decay, m](int i, int j) {
        const double x = static_cast<double>(i) / m;
        return decay.b(j) * std::cos(j * std::numbers::pi * x);
    };
    constexpr int cached_columns = 64;
    const int columns = std::min(cached_columns, decay.available());
    std::vector<double> table(static_cast<std::size_t>(m) * columns);
    for (int i = 0; i < m; ++i)
        for (int j = 1; j <= columns; ++j) table[i * columns + (j - 1)] = coefficient(i, j);

    ForwardMap fm;
    fm.m = m;
    fm.coefficient = coefficient;
    fm.apply = [coefficient, table = std::move(table), columns, m](std::span<const double> y, std::span<double> out) {
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                const int col = static_cast<int>(j) + 1;
                s += (col <= columns ? table[i * columns + j] : coefficient(i, col)) * y[j];
            }
            out[i] = s;
        }
    };
    return fm;
}

PosteriorModel PosteriorModel::with_noise_variance(ForwardMap forward, std::vector<double> data, double variance) {
    if (!(variance > 0.0)) throw DomainError("noise variance must be positive");
    const int m = forward.m;
    PosteriorModel pm{std::move(forward), std::move(data), Eigen::MatrixXd::Identity(m, m) / variance};
    return pm;
}

DensityModel posterior_model(const PosteriorModel& spec, const BasisDecay& decay, int d) {
    const int m = spec.forward.m;
    if (static_cast<int>(spec.data.size()) != m)
        throw DomainError("posterior: data has " + std::to_string(spec.data.size()) + " entries, forward map has m = " +
                          std::to_string(m));
    const Eigen::MatrixXd& P = spec.noise_precision;
    if (P.rows() != m || P.cols() != m) throw DomainError("posterior: noise precision must be m x m");
    if (!P.isApprox(P.transpose(), 1e-14)) throw DomainError("posterior: noise precision is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) throw DomainError("posterior: noise precision is not positive definite");

    const Eigen::VectorXd data = Eigen::Map<const Eigen::VectorXd>(spec.data.data(), m);
    const double lambda_max = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(P).eigenvalues().maxCoeff();
    const ForwardMap forward = spec.forward;

    RawDensity raw = [forward, P, data, m](std::span<const double> y) {
        constexpr int stack_m = 16;
        double stack_buf[stack_m];
        std::vector<double> heap_buf;
        double* g = stack_buf;
        if (m > stack_m) {
            heap_buf.resize(m);
            g = heap_buf.data();
        }
        forward.apply(y, std::span<double>(g, m));
        for (int i = 0; i < m; ++i) g[i] = data[i] - g[i];
        double q = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) q += g[i] * P(i, j) * g[j];
        return std::exp(-0.5 * q);
    };

    // Residual norm is at most |data| + sum_j |A_{:,j}| on U_d for a linear map; the raw density
    // then lies in [exp(-lambda_max R^2 / 2), 1].
    RawBounds bounds = [forward, data, lambda_max, m](int dim) {
        if (!forward.linear()) return DensityBounds{0.0, 1.0};
        double radius = data.norm();
        for (int j = 1; j <= dim; ++j) {
            double col = 0.0;
            for (int i = 0; i < m; ++i) col += forward.coefficient(i, j) * forward.coefficient(i, j);
            radius += std::sqrt(col);
        }
        return DensityBounds{std::exp(-0.5 * lambda_max * radius * radius), 1.0};
    };

    ModelStructure structure;
    if (m == 1 && forward.linear()) {
        const double precision = P(0, 0);
        const double datum = data[0];
        structure = RidgeProfile{[forward](int j) { return forward.coefficient(0, j); },
                                 [precision, datum](double s) {
                                     const double r = datum - s;
                                     return std::exp(-0.5 * precision * r * r);
                                 }};
    }
    return DensityModel("posterior", std::move(raw), std::move(bounds), decay, std::move(structure), d);
}

} // namespace krt
