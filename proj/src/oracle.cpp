#include "krt/oracle.hpp"

#include <cmath>
#include <string>

#include "krt/errors.hpp"
#include "krt/parallel.hpp"
#include "krt/ridge.hpp"

namespace krt {

ConditionalSlice::ConditionalSlice(std::function<double(double)> unnormalized, int nodes)
    : value_(std::move(unnormalized)), nodes_(nodes) {
    mass_ = quad::integrate_interval(value_, -1.0, 1.0, nodes_);
    if (!(mass_ > 0.0) || !std::isfinite(mass_))
        throw ModelError("conditional density is not positive (slice mass " + std::to_string(mass_) + ")");
}

double ConditionalSlice::cdf(double t) const {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return quad::integrate_interval(value_, -1.0, t, nodes_) / mass_;
}

double ConditionalSlice::density(double t) const { return value_(t) / mass_; }

double ConditionalSlice::inverse(double u, const RootOptions& opt) const {
    if (u <= 0.0) return -1.0;
    if (u >= 1.0) return 1.0;
    auto eval = [this](double x) { return std::pair<double, double>{cdf(x), density(x)}; };
    return monotone_inverse(eval, u, -1.0, 1.0, opt);
}

struct MarginalDensity::RidgeData {
    RidgeTails tails;
    double z;
};

MarginalDensity::MarginalDensity(DensityModel model, const OracleOptions& options)
    : model_(std::move(model)), options_(options) {
    if (const auto* ridge = std::get_if<RidgeProfile>(&model_.structure())) {
        std::vector<double> w(model_.dim());
        for (int j = 1; j <= model_.dim(); ++j) w[j - 1] = ridge->weight(j);
        RidgeTails tails(std::move(w), ridge->profile);
        const double z = tails.total();
        ridge_ = std::make_shared<const RidgeData>(RidgeData{std::move(tails), z});
    }
}

double MarginalDensity::generic_tail(int k, std::span<const double> prefix, double t) const {
    const int d = model_.dim();
    const int rest = d - k;
    std::vector<double> y(d, 0.0);
    for (int j = 0; j < k - 1; ++j) y[j] = prefix[j];
    y[k - 1] = t;
    if (rest == 0) return model_.evaluate(y);
    const quad::Integrand tail = [&](std::span<const double> s) {
        std::vector<double> full(y);
        for (int j = 0; j < rest; ++j) full[k + j] = s[j];
        return model_.evaluate(full);
    };
    if (rest <= options_.tensor_max) return quad::integrate(tail, rest, options_.tensor, options_.tensor_max);
    return quad::integrate(tail, rest, options_.monte_carlo, options_.tensor_max);
}

double MarginalDensity::operator()(int k, std::span<const double> y) const {
    const int d = model_.dim();
    if (k < 0 || k > d) throw DomainError("marginal density: k = " + std::to_string(k) + " outside [0, d]");
    if (static_cast<int>(y.size()) < k) throw DomainError("marginal density: point shorter than k");
    if (k == 0) return 1.0;
    if (const auto* tilt = std::get_if<ProductTilt>(&model_.structure())) {
        double f = 1.0;
        for (int j = 0; j < std::min<int>(k, static_cast<int>(tilt->c.size())); ++j) f *= 1.0 + tilt->c[j] * y[j];
        return f;
    }
    if (ridge_) {
        double s = 0.0;
        for (int j = 1; j <= k; ++j) s += ridge_->tails.weight(j) * y[j - 1];
        return ridge_->tails.tail(k, s) / ridge_->z;
    }
    return generic_tail(k, y.first(k - 1), y[k - 1]);
}

ConditionalSlice MarginalDensity::conditional(int k, std::span<const double> prefix) const {
    const int d = model_.dim();
    if (k < 1 || k > d) throw DomainError("conditional: k = " + std::to_string(k) + " outside [1, d]");
    if (static_cast<int>(prefix.size()) < k - 1) throw DomainError("conditional: prefix shorter than k - 1");
    if (const auto* tilt = std::get_if<ProductTilt>(&model_.structure())) {
        const double c = k <= static_cast<int>(tilt->c.size()) ? tilt->c[k - 1] : 0.0;
        return ConditionalSlice([c](double t) { return 1.0 + c * t; }, options_.cdf_nodes);
    }
    if (ridge_) {
        double s = 0.0;
        for (int j = 1; j < k; ++j) s += ridge_->tails.weight(j) * prefix[j - 1];
        const double a = ridge_->tails.weight(k);
        auto data = ridge_;
        return ConditionalSlice([data, s, a, k](double t) { return data->tails.tail(k, s + a * t); },
                                options_.cdf_nodes);
    }
    std::vector<double> owned(prefix.begin(), prefix.begin() + (k - 1));
    return ConditionalSlice([this, k, owned](double t) { return generic_tail(k, owned, t); }, options_.cdf_nodes);
}

double marginal_density(const DensityModel& model, int k, std::span<const double> y, const OracleOptions& options) {
    return MarginalDensity(model, options)(k, y);
}

double conditional_cdf(const DensityModel& model, int k, std::span<const double> prefix, double t,
                       const OracleOptions& options) {
    if (!(t >= -1.0 && t <= 1.0)) throw DomainError("conditional_cdf: t outside [-1, 1]");
    return MarginalDensity(model, options).conditional(k, prefix).cdf(t);
}

ExactTransport::ExactTransport(DensityModel rho, DensityModel pi, OracleOptions options)
    : rho_(std::move(rho), options), pi_(std::move(pi), options), options_(options) {
    if (rho_.dim() != pi_.dim()) throw DomainError("exact transport: reference and target dimensions differ");
}

ExactTransport::Evaluation ExactTransport::evaluate(std::span<const double> y, int n) const {
    if (n < 1 || n > dim()) throw DomainError("exact transport: component count outside [1, d]");
    if (static_cast<int>(y.size()) < n) throw DomainError("exact transport: point shorter than component index");
    Evaluation out;
    out.value.resize(n);
    out.derivative.resize(n);
    for (int k = 1; k <= n; ++k) {
        const auto rs = rho_.conditional(k, y.first(k - 1));
        const auto ps = pi_.conditional(k, std::span<const double>(out.value).first(k - 1));
        const double yk = y[k - 1];
        if (!(yk >= -1.0 && yk <= 1.0)) throw DomainError("exact transport: coordinate outside [-1, 1]");
        const double x = ps.inverse(rs.cdf(yk), options_.root);
        out.value[k - 1] = x;
        out.derivative[k - 1] = rs.density(yk) / ps.density(x);
    }
    return out;
}

double ExactTransport::component(int k, std::span<const double> y) const { return evaluate(y, k).value[k - 1]; }

double ExactTransport::component_derivative(int k, std::span<const double> y) const {
    return evaluate(y, k).derivative[k - 1];
}

std::vector<double> ExactTransport::push(std::span<const double> y) const { return evaluate(y, dim()).value; }

std::vector<double> ExactTransport::pull(std::span<const double> x) const {
    const int d = dim();
    if (static_cast<int>(x.size()) < d) throw DomainError("exact transport: point shorter than d");
    std::vector<double> y(d);
    for (int k = 1; k <= d; ++k) {
        const auto ps = pi_.conditional(k, x.first(k - 1));
        const auto rs = rho_.conditional(k, std::span<const double>(y).first(k - 1));
        y[k - 1] = rs.inverse(ps.cdf(x[k - 1]), options_.root);
    }
    return y;
}

double ExactTransport::pushforward_residual(std::span<const double> y) const {
    const int d = dim();
    const auto ev = evaluate(y, d);
    double det = 1.0;
    for (double v : ev.derivative) det *= v;
    return target().evaluate(ev.value) * det - reference().evaluate(y.first(d));
}

std::vector<double> ExactTransport::derivative_on_grid(int k, const quad::TensorGrid& grid) const {
    if (grid.dim() != k) throw DomainError("derivative_on_grid: grid dimension must equal k");
    if (k < 1 || k > dim()) throw DomainError("derivative_on_grid: k outside [1, d]");
    std::vector<double> out(grid.size());

    // stride[j] = number of grid points sharing one node choice in coordinates 0..j.
    std::vector<std::size_t> stride(k, 1);
    for (int j = k - 2; j >= 0; --j) stride[j] = stride[j + 1] * grid.rule(j + 1).size();

    struct Walker {
        const ExactTransport& self;
        const quad::TensorGrid& grid;
        const std::vector<std::size_t>& stride;
        std::vector<double>& out;
        int k;

        void run(int level, std::vector<double>& y, std::vector<double>& x, std::size_t offset) const {
            const auto rs = self.rho_.conditional(level + 1, std::span<const double>(y).first(level));
            const auto ps = self.pi_.conditional(level + 1, std::span<const double>(x).first(level));
            const auto& rule = grid.rule(level);
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double yk = rule.nodes[i];
                const double xk = ps.inverse(rs.cdf(yk), self.options_.root);
                if (level + 1 == k) {
                    out[offset + i] = rs.density(yk) / ps.density(xk);
                } else {
                    y[level] = yk;
                    x[level] = xk;
                    run(level + 1, y, x, offset + i * stride[level]);
                }
            }
        }
    };

    const Walker walker{*this, grid, stride, out, k};
    if (k == 1) {
        std::vector<double> y(1), x(1);
        walker.run(0, y, x, 0);
        return out;
    }
    // Parallel over the first coordinate's nodes.
    const auto& first = grid.rule(0);
    const auto rs = rho_.conditional(1, {});
    const auto ps = pi_.conditional(1, {});
    parallel_for(first.size(), [&](std::size_t i) {
        std::vector<double> y(k), x(k);
        y[0] = first.nodes[i];
        x[0] = ps.inverse(rs.cdf(y[0]), options_.root);
        walker.run(1, y, x, i * stride[0]);
    });
    return out;
}

double kr_component(const ExactTransport& T, int k, std::span<const double> y) { return T.component(k, y); }

double kr_component_derivative(const ExactTransport& T, int k, std::span<const double> y) {
    return T.component_derivative(k, y);
}

double pushforward_residual(const ExactTransport& T, std::span<const double> y) { return T.pushforward_residual(y); }

} // namespace krt
