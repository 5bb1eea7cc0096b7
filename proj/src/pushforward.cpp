#include "krt/pushforward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "krt/errors.hpp"
#include "krt/oracle.hpp"
#include "krt/parallel.hpp"
#include "krt/random.hpp"

namespace krt {

FunctionBasis::FunctionBasis(const BasisDecay& decay, int size, int grid_points) : size_(size), g_(grid_points) {
    if (size < 0) throw DomainError("function basis size must be non-negative");
    if (grid_points < 2) throw DomainError("function basis needs at least 2 grid points");
    x_.resize(g_);
    for (int i = 0; i < g_; ++i) x_[i] = static_cast<double>(i) / (g_ - 1);
    values_.resize(static_cast<std::size_t>(size_) * g_);
    for (int j = 1; j <= size_; ++j) {
        const double b = decay.b(j);
        for (int i = 0; i < g_; ++i) values_[(j - 1) * g_ + i] = b * std::cos(j * std::numbers::pi * x_[i]);
    }
}

std::span<const double> FunctionBasis::psi(int j) const {
    if (j < 1 || j > size_) throw CapabilityError("function basis holds " + std::to_string(size_) + " functions");
    return std::span<const double>(values_).subspan((j - 1) * g_, g_);
}

std::vector<double> phi_expand(const FunctionBasis& basis, std::span<const double> y, int s) {
    if (s < 0) throw DomainError("phi_expand: negative truncation");
    if (s > static_cast<int>(y.size()))
        throw CapabilityError("phi_expand: truncation " + std::to_string(s) + " exceeds the coefficient length");
    if (s > basis.size())
        throw CapabilityError("phi_expand: truncation " + std::to_string(s) + " exceeds the basis size " +
                              std::to_string(basis.size()));
    std::vector<double> out(basis.grid_points(), 0.0);
    for (int j = 1; j <= s; ++j) {
        const auto psi = basis.psi(j);
        for (int i = 0; i < basis.grid_points(); ++i) out[i] += y[j - 1] * psi[i];
    }
    return out;
}

BanachSamples sample_banach(const ApproxTransport& T, const FunctionBasis& basis, std::size_t n, int s,
                            std::uint64_t seed, const std::optional<DensityModel>& reference) {
    if (s < 1) throw DomainError("sample_banach: truncation must be >= 1");
    if (s > basis.size()) throw CapabilityError("sample_banach: truncation exceeds the basis size");
    std::optional<MarginalDensity> ref;
    if (reference) {
        if (reference->dim() < s) throw DomainError("sample_banach: reference dimension below truncation");
        ref.emplace(reference->truncate(s));
    }
    BanachSamples out;
    out.s = s;
    out.grid_points = basis.grid_points();
    out.latent.resize(n * s);
    out.transported.resize(n * s);
    out.functions.resize(n * basis.grid_points());
    parallel_for(n, [&](std::size_t i) {
        auto rng = make_engine(seed, i);
        std::span<double> y(out.latent.data() + i * s, s);
        if (ref) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (int k = 1; k <= s; ++k) y[k - 1] = ref->conditional(k, y.first(k - 1)).inverse(unit(rng), RootOptions{});
        } else {
            for (double& v : y) v = uniform_pm1(rng);
        }
        const auto x = T.push(y);
        std::copy(x.begin(), x.end(), out.transported.begin() + i * s);
        const auto f = phi_expand(basis, x, s);
        std::copy(f.begin(), f.end(), out.functions.begin() + i * basis.grid_points());
    });
    return out;
}

} // namespace krt
