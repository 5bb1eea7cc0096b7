#include "krt/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "krt/errors.hpp"
#include "krt/random.hpp"

namespace krt {

std::string to_string(NormalizationMode mode) { return mode == NormalizationMode::Slice ? "slice" : "averaged"; }

NormalizationMode parse_mode(const std::string& name) {
    if (name == "slice") return NormalizationMode::Slice;
    if (name == "averaged") return NormalizationMode::Averaged;
    throw DomainError("unknown normalization mode '" + name + "' (expected slice or averaged)");
}

RationalComponent RationalComponent::identity(int k, NormalizationMode mode) {
    LegendreExpansion e(k);
    e.set(MultiIndex::zeros(k), 1.0);
    return RationalComponent(std::move(e), mode);
}

RationalComponent::RationalComponent(LegendreExpansion p_plus_one, NormalizationMode mode)
    : p_plus_one_(std::move(p_plus_one)), mode_(mode), slices_(p_plus_one_) {
    if (p_plus_one_.l2_norm() == 0.0) throw DomainError("rational component: p + 1 vanishes identically");
    if (mode_ == NormalizationMode::Averaged) averaged_ = slices_.averaged_square();
}

bool RationalComponent::is_identity() const {
    return p_plus_one_.size() == 1 && p_plus_one_.coefficient(MultiIndex::zeros(dim())) == 1.0;
}

std::vector<double> RationalComponent::squared_slice(std::span<const double> prefix) const {
    if (mode_ == NormalizationMode::Averaged) return averaged_;
    return square_legendre_series(slices_.slice_coefficients(prefix));
}

namespace {
void check_point(std::span<const double> y, int k) {
    if (static_cast<int>(y.size()) != k)
        throw DomainError("component " + std::to_string(k) + ": expected " + std::to_string(k) + " coordinates, got " +
                          std::to_string(y.size()));
}

double normalized_partial(std::span<const double> g, double t) {
    const double den = g[0];
    if (!(den > 0.0)) throw ModelError("invalid rational component: zero normalizing integral");
    if (t <= -1.0) return -1.0;
    if (t >= 1.0) return 1.0;
    const double v = -1.0 + 2.0 * legendre_series_partial_integral(g, t) / den;
    return std::clamp(v, -1.0, 1.0);
}
} // namespace

double RationalComponent::operator()(std::span<const double> y) const {
    const int k = dim();
    check_point(y, k);
    const double t = y[k - 1];
    if (t <= -1.0) return -1.0;
    if (t >= 1.0) return 1.0;
    return normalized_partial(squared_slice(y.first(k - 1)), t);
}

double RationalComponent::shifted(std::span<const double> y) const {
    check_point(y, dim());
    return p_plus_one_(y);
}

double RationalComponent::derivative(std::span<const double> y) const {
    const int k = dim();
    check_point(y, k);
    const double t = y[k - 1];
    if (mode_ == NormalizationMode::Averaged) return legendre_series_eval(averaged_, t) / averaged_[0];
    const auto beta = slices_.slice_coefficients(y.first(k - 1));
    double norm2 = 0.0;
    for (double b : beta) norm2 += b * b;
    if (!(norm2 > 0.0)) throw ModelError("invalid rational component: zero normalizing integral");
    const double q = legendre_series_eval(beta, t);
    return q * q / norm2;
}

double RationalComponent::inverse(std::span<const double> prefix, double x, const RootOptions& opt) const {
    if (static_cast<int>(prefix.size()) != dim() - 1) throw DomainError("component inverse: prefix must have k - 1 entries");
    if (x <= -1.0) return -1.0;
    if (x >= 1.0) return 1.0;
    const auto g = squared_slice(prefix);
    const double den = g[0];
    auto eval = [&](double t) {
        return std::pair<double, double>{normalized_partial(g, t), legendre_series_eval(g, t) / den};
    };
    return monotone_inverse(eval, x, -1.0, 1.0, opt);
}

double eval_component(const RationalComponent& c, std::span<const double> y) { return c(y); }

double eval_component_derivative(const RationalComponent& c, std::span<const double> y) { return c.derivative(y); }

RationalComponent build_component(const ExactTransport& oracle, int k, std::span<const MultiIndex> indices,
                                  const BuildOptions& options, ComponentDiagnostics* diagnostics) {
    if (k < 1 || k > oracle.dim())
        throw DomainError("build_component: k = " + std::to_string(k) + " outside the oracle dimension");
    ComponentDiagnostics diag;
    diag.k = k;
    if (indices.empty()) {
        if (diagnostics) *diagnostics = diag;
        return RationalComponent::identity(k, options.mode);
    }
    for (const auto& nu : indices)
        if (nu.size() != k) throw DomainError("build_component: index length differs from k");

    LegendreExpansion p(k);
    if (k <= options.projection.tensor_max) {
        const auto grid = projection_grid(k, indices, options.projection.margin);
        auto values = oracle.derivative_on_grid(k, grid);
        for (double& v : values) v = std::sqrt(v) - 1.0;
        p = project_on_grid(grid, values, indices);
    } else {
        const quad::Integrand target = [&](std::span<const double> y) {
            return std::sqrt(oracle.component_derivative(k, y)) - 1.0;
        };
        p = project(target, k, indices, options.projection);
    }
    p.add(MultiIndex::zeros(k), 1.0);
    diag.terms = p.size();

    const auto probe = LowDiscrepancySequence(k, options.probe_seed).take(options.positivity_probe);
    double lowest = p(std::vector<double>(k, -1.0));
    lowest = std::min(lowest, p(std::vector<double>(k, 1.0)));
    for (std::size_t i = 0; i < options.positivity_probe; ++i)
        lowest = std::min(lowest, p(std::span<const double>(probe).subspan(i * k, k)));
    diag.min_shifted = lowest;
    if (lowest <= options.warn_threshold) {
        diag.warned = true;
        std::fprintf(stderr, "warning: component %d is ill-conditioned, min(p + 1) = %.3g on the probe\n", k, lowest);
    }
    if (lowest <= 0.0) {
        diag.fell_back = true;
        std::fprintf(stderr, "warning: component %d replaced by the identity\n", k);
        if (diagnostics) *diagnostics = diag;
        return RationalComponent::identity(k, options.mode);
    }
    if (diagnostics) *diagnostics = diag;
    return RationalComponent(std::move(p), options.mode);
}

ApproxTransport::ApproxTransport(std::vector<RationalComponent> components, TransportInfo info, NormalizationMode mode)
    : components_(std::move(components)), info_(info), mode_(mode) {
    for (std::size_t i = 0; i < components_.size(); ++i)
        if (components_[i].dim() != static_cast<int>(i) + 1)
            throw DomainError("approximate transport: component " + std::to_string(i + 1) + " has wrong dimension");
    if (info_.d < k_max()) info_.d = k_max();
}

ApproxTransport ApproxTransport::identity(int d, double eps, double alpha) {
    return ApproxTransport({}, TransportInfo{eps, alpha, d});
}

double ApproxTransport::value(int k, std::span<const double> y) const {
    if (k < 1 || static_cast<int>(y.size()) < k) throw DomainError("transport: point shorter than component index");
    if (k > k_max()) return y[k - 1];
    return components_[k - 1](y.first(k));
}

double ApproxTransport::derivative(int k, std::span<const double> y) const {
    if (k < 1 || static_cast<int>(y.size()) < k) throw DomainError("transport: point shorter than component index");
    if (k > k_max()) return 1.0;
    return components_[k - 1].derivative(y.first(k));
}

std::vector<double> ApproxTransport::push(std::span<const double> y) const {
    for (double v : y)
        if (!(v >= -1.0 && v <= 1.0)) throw DomainError("transport: coordinate outside [-1, 1]");
    std::vector<double> out(y.begin(), y.end());
    const int n = std::min<int>(k_max(), static_cast<int>(y.size()));
    for (int k = 1; k <= n; ++k) out[k - 1] = components_[k - 1](y.first(k));
    return out;
}

std::vector<double> ApproxTransport::pull(std::span<const double> x, const RootOptions& opt) const {
    for (double v : x)
        if (!(v >= -1.0 && v <= 1.0)) throw DomainError("transport: coordinate outside [-1, 1]");
    std::vector<double> y(x.begin(), x.end());
    const int n = std::min<int>(k_max(), static_cast<int>(x.size()));
    for (int k = 1; k <= n; ++k)
        y[k - 1] = components_[k - 1].inverse(std::span<const double>(y).first(k - 1), x[k - 1], opt);
    return y;
}

double ApproxTransport::pushforward_density(const DensityModel& rho, std::span<const double> y,
                                            const RootOptions& opt) const {
    if (static_cast<int>(y.size()) != rho.dim()) throw DomainError("pushforward density: point dimension mismatch");
    const auto s = pull(y, opt);
    double det = 1.0;
    const int n = std::min(k_max(), rho.dim());
    for (int k = 1; k <= n; ++k) det *= components_[k - 1].derivative(std::span<const double>(s).first(k));
    return rho.evaluate(s) / det;
}

double pushforward_density(const ApproxTransport& T, const DensityModel& rho, std::span<const double> y) {
    return T.pushforward_density(rho, y);
}

void ApproxTransport::write(std::ostream& os) const {
    char buf[64];
    os << "# krt transport v1\n";
    std::snprintf(buf, sizeof buf, "%.17g", info_.eps);
    os << "eps " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", info_.alpha);
    os << "alpha " << buf << '\n';
    os << "d " << info_.d << '\n';
    os << "mode " << to_string(mode_) << '\n';
    os << "k_max " << k_max() << '\n';
    for (const auto& c : components_) {
        os << "component " << c.dim() << ' ' << c.p_plus_one().size() << '\n';
        c.p_plus_one().write(os);
    }
}

namespace {
std::string expect_key(std::istream& is, const std::string& key) {
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string k, value;
        ls >> k;
        std::getline(ls >> std::ws, value);
        if (k != key) throw IoError("transport file: expected '" + key + "', found '" + line + "'");
        return value;
    }
    throw IoError("transport file: missing '" + key + "'");
}
} // namespace

ApproxTransport ApproxTransport::read(std::istream& is) {
    try {
        TransportInfo info;
        info.eps = std::stod(expect_key(is, "eps"));
        info.alpha = std::stod(expect_key(is, "alpha"));
        info.d = std::stoi(expect_key(is, "d"));
        const auto mode = parse_mode(expect_key(is, "mode"));
        const int k_max = std::stoi(expect_key(is, "k_max"));
        std::vector<RationalComponent> comps;
        for (int k = 1; k <= k_max; ++k) {
            std::istringstream header(expect_key(is, "component"));
            int dim = 0;
            std::size_t count = 0;
            if (!(header >> dim >> count) || dim != k)
                throw IoError("transport file: malformed header of component " + std::to_string(k));
            comps.emplace_back(LegendreExpansion::read(is, k, count), mode);
        }
        return ApproxTransport(std::move(comps), info, mode);
    } catch (const std::invalid_argument&) {
        throw IoError("transport file: malformed number");
    } catch (const std::out_of_range&) {
        throw IoError("transport file: number out of range");
    }
}

void ApproxTransport::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write transport file '" + path + "'");
    write(os);
    if (!os) throw IoError("failed writing transport file '" + path + "'");
}

ApproxTransport ApproxTransport::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open transport file '" + path + "'");
    return read(is);
}

ApproxTransport build_transport(const ExactTransport& oracle, const IndexSetFamily& family, double alpha,
                                const BuildOptions& options, BuildReport* report) {
    const int n = std::min(family.k_max, oracle.dim());
    std::vector<RationalComponent> comps;
    comps.reserve(n);
    BuildReport local;
    for (int k = 1; k <= n; ++k) {
        ComponentDiagnostics diag;
        comps.push_back(build_component(oracle, k, family.set(k), options, &diag));
        local.warnings += diag.warned;
        local.fallbacks += diag.fell_back;
        local.components.push_back(diag);
    }
    if (report) *report = std::move(local);
    return ApproxTransport(std::move(comps), TransportInfo{family.eps, alpha, oracle.dim()}, options.mode);
}

} // namespace krt
