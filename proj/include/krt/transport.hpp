#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "krt/model.hpp"
#include "krt/oracle.hpp"
#include "krt/polys.hpp"
#include "krt/roots.hpp"
#include "krt/sparse.hpp"

namespace krt {

enum class NormalizationMode {
    /// Per-prefix normalization of the squared slice.
    Slice,
    /// Prefix integrated out of numerator and denominator; the map then depends on y_k only.
    Averaged,
};

std::string to_string(NormalizationMode mode);
NormalizationMode parse_mode(const std::string& name);

/// Monotone rational component
///   T_k(y) = -1 + 2 int_{-1}^{y_k} (p(y_[k-1], t) + 1)^2 dmu(t) / int_{-1}^{1} (p(y_[k-1], t) + 1)^2 dmu(t).
class RationalComponent {
public:
    /// The identity slice map on U_k.
    static RationalComponent identity(int k, NormalizationMode mode = NormalizationMode::Slice);
    RationalComponent(LegendreExpansion p_plus_one, NormalizationMode mode = NormalizationMode::Slice);

    int dim() const { return p_plus_one_.dim(); }
    NormalizationMode mode() const { return mode_; }
    const LegendreExpansion& p_plus_one() const { return p_plus_one_; }
    /// True when p = 0, i.e. the stored expansion is the single constant 1.
    bool is_identity() const;

    double operator()(std::span<const double> y) const;
    double derivative(std::span<const double> y) const;
    /// (p + 1)(y).
    double shifted(std::span<const double> y) const;
    /// Solves T_k(prefix, t) = x for t.
    double inverse(std::span<const double> prefix, double x, const RootOptions& opt = {}) const;

    /// Legendre coefficients in t of the squared slice (p(prefix, .) + 1)^2 (prefix ignored in averaged mode).
    std::vector<double> squared_slice(std::span<const double> prefix) const;

private:
    LegendreExpansion p_plus_one_;
    NormalizationMode mode_;
    SliceEvaluator slices_;
    std::vector<double> averaged_;
};

double eval_component(const RationalComponent& c, std::span<const double> y);
double eval_component_derivative(const RationalComponent& c, std::span<const double> y);

struct BuildOptions {
    NormalizationMode mode = NormalizationMode::Slice;
    ProjectionBudget projection{};
    /// Points of the low-discrepancy positivity probe for p + 1.
    std::size_t positivity_probe = 1024;
    std::uint64_t probe_seed = 0xB0B;
    /// min(p + 1) at or below this value is reported as ill-conditioned.
    double warn_threshold = 0.05;
};

struct ComponentDiagnostics {
    int k = 0;
    std::size_t terms = 0;
    double min_shifted = 1.0;  ///< probe minimum of p + 1
    bool warned = false;
    bool fell_back = false;    ///< replaced by the identity because p + 1 reached zero
};

/// Projects sqrt(d_k T_k) - 1 of the exact map onto span{L_nu : nu in indices}.
RationalComponent build_component(const ExactTransport& oracle, int k, std::span<const MultiIndex> indices,
                                  const BuildOptions& options = {}, ComponentDiagnostics* diagnostics = nullptr);

struct TransportInfo {
    double eps = 1.0;
    double alpha = 1.0;
    int d = 0;  ///< dimension of the oracle the map was built from
};

/// Triangular map y -> (T_1(y_[1]), ..., T_kmax(y_[kmax]), y_{kmax+1}, ...).
class ApproxTransport {
public:
    ApproxTransport(std::vector<RationalComponent> components, TransportInfo info,
                    NormalizationMode mode = NormalizationMode::Slice);
    static ApproxTransport identity(int d, double eps = 1.0, double alpha = 1.0);

    int k_max() const { return static_cast<int>(components_.size()); }
    int dim() const { return info_.d; }
    const TransportInfo& info() const { return info_; }
    NormalizationMode mode() const { return mode_; }
    const RationalComponent& component(int k) const { return components_.at(k - 1); }

    /// T_k(y_[k]); identity for k > k_max.
    double value(int k, std::span<const double> y) const;
    double derivative(int k, std::span<const double> y) const;

    /// Any input length; coordinates past k_max pass through.
    std::vector<double> push(std::span<const double> y) const;
    std::vector<double> pull(std::span<const double> x, const RootOptions& opt = {}) const;
    /// f_rho(S(y)) prod_k d_k S_k(y), S = T^{-1}; y has the reference's dimension.
    double pushforward_density(const DensityModel& rho, std::span<const double> y,
                               const RootOptions& opt = {}) const;

    void write(std::ostream& os) const;
    static ApproxTransport read(std::istream& is);
    void save(const std::string& path) const;
    static ApproxTransport load(const std::string& path);

private:
    std::vector<RationalComponent> components_;
    TransportInfo info_;
    NormalizationMode mode_;
};

double pushforward_density(const ApproxTransport& T, const DensityModel& rho, std::span<const double> y);

struct BuildReport {
    std::vector<ComponentDiagnostics> components;
    std::size_t warnings = 0;
    std::size_t fallbacks = 0;
};

/// Builds every component k <= family.k_max (and <= oracle.dim()).
ApproxTransport build_transport(const ExactTransport& oracle, const IndexSetFamily& family, double alpha,
                                const BuildOptions& options = {}, BuildReport* report = nullptr);

} // namespace krt
