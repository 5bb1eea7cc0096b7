#include "krt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "krt/errors.hpp"
#include "krt/parallel.hpp"

namespace krt {

namespace {
// Relative slack on the log threshold so that exact ties gamma == eps survive rounding.
constexpr double tie_slack = 1e-12;
} // namespace

WeightSequence::WeightSequence(std::vector<double> rho, double alpha) : rho_(std::move(rho)), alpha_(alpha) {
    log_rho_.reserve(rho_.size());
    for (double r : rho_) {
        if (!(r > 1.0) || !std::isfinite(r)) throw DomainError("weights must satisfy rho_j > 1");
        log_rho_.push_back(std::log(r));
    }
}

WeightSequence WeightSequence::from_decay(const BasisDecay& decay, double alpha, int j_max) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    if (j_max < 1) throw DomainError("j_max must be >= 1");
    std::vector<double> rho(j_max);
    for (int j = 1; j <= j_max; ++j) rho[j - 1] = 1.0 + alpha / decay.b(j);
    return WeightSequence(std::move(rho), alpha);
}

WeightSequence WeightSequence::geometric(double base, int j_max) {
    if (!(base > 1.0)) throw DomainError("geometric weights need base > 1");
    std::vector<double> rho(j_max);
    for (int j = 1; j <= j_max; ++j) rho[j - 1] = std::pow(base, j);
    return WeightSequence(std::move(rho), 0.0);
}

WeightSequence WeightSequence::from_values(std::vector<double> rho) { return WeightSequence(std::move(rho), 0.0); }

int required_j_max(const BasisDecay& decay, double alpha, double eps, int limit) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
    const int available = std::min(limit, decay.available());
    for (int j = 1; j <= available; ++j)
        if (1.0 / (1.0 + alpha / decay.b(j)) < eps) return j;
    throw CapabilityError("no j <= " + std::to_string(available) + " has 1/rho_j < eps = " + std::to_string(eps));
}

double log_gamma(const WeightSequence& w, const MultiIndex& nu) {
    const int k = nu.size();
    if (k < 1) throw DomainError("gamma: empty multi-index");
    if (k > w.j_max())
        throw CapabilityError("gamma: index of length " + std::to_string(k) + " exceeds j_max = " +
                              std::to_string(w.j_max()));
    double s = -std::max(1, nu[k - 1]) * w.log_rho(k);
    for (int j = 1; j < k; ++j) s -= nu[j - 1] * w.log_rho(j);
    return s;
}

double gamma(const WeightSequence& w, const MultiIndex& nu) { return std::exp(log_gamma(w, nu)); }

std::span<const MultiIndex> IndexSetFamily::set(int k) const {
    if (k < 1) throw DomainError("index sets are 1-based");
    if (k > static_cast<int>(sets.size())) return {};
    return sets[k - 1];
}

std::vector<std::size_t> IndexSetFamily::sizes() const {
    std::vector<std::size_t> out;
    for (const auto& s : sets) out.push_back(s.size());
    return out;
}

void IndexSetFamily::write(std::ostream& os, const WeightSequence& w) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", eps);
    os << "eps " << buf << "\nk_max " << k_max << "\nn_eps " << n_eps << '\n';
    for (int k = 1; k <= k_max; ++k) {
        os << "set " << k << ' ' << sets[k - 1].size() << '\n';
        for (const auto& nu : sets[k - 1]) {
            for (int j = 0; j < k; ++j) os << (j ? " " : "") << nu[j];
            std::snprintf(buf, sizeof buf, "%.17g", gamma(w, nu));
            os << "  " << buf << '\n';
        }
    }
}

namespace {

// Enumerates nu_1..nu_{k-1} with sum nu_j log rho_j <= budget, given nu_k fixed.
void enumerate_prefix(const WeightSequence& w, int k, int j, double budget, std::vector<int>& nu,
                      std::vector<MultiIndex>& out) {
    if (j == k) {
        out.emplace_back(nu);
        return;
    }
    const double step = w.log_rho(j);
    for (int v = 0;; ++v) {
        const double cost = v * step;
        if (cost > budget) break;
        nu[j - 1] = v;
        enumerate_prefix(w, k, j + 1, budget - cost, nu, out);
    }
    nu[j - 1] = 0;
}

std::vector<MultiIndex> enumerate_component(const WeightSequence& w, int k, double log_inv_eps) {
    std::vector<MultiIndex> out;
    std::vector<int> nu(k, 0);
    const double limit = log_inv_eps + tie_slack * std::max(1.0, log_inv_eps);
    for (int last = 0;; ++last) {
        const double cost = std::max(1, last) * w.log_rho(k);
        if (cost > limit) break;
        nu[k - 1] = last;
        enumerate_prefix(w, k, 1, limit - cost, nu, out);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

IndexSetFamily build_index_sets(const WeightSequence& w, double eps, int dim_cap) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
    if (dim_cap < 0) throw DomainError("dimension cap must be non-negative");
    const double log_inv_eps = -std::log(eps);
    const double limit = log_inv_eps + tie_slack * std::max(1.0, log_inv_eps);

    // k is active iff gamma(0,...,0) = 1/rho_k >= eps.
    int k_max = 0;
    const int scan = std::min(w.j_max(), dim_cap);
    for (int k = 1; k <= scan; ++k)
        if (w.log_rho(k) <= limit) k_max = k;
    if (dim_cap > w.j_max() && w.log_rho(w.j_max()) <= limit)
        throw CapabilityError("weight sequence too short: 1/rho_" + std::to_string(w.j_max()) +
                              " >= eps; extend j_max until 1/rho_j < " + std::to_string(eps));

    IndexSetFamily fam;
    fam.eps = eps;
    fam.k_max = k_max;
    fam.sets.resize(k_max);
    parallel_for(static_cast<std::size_t>(k_max), [&](std::size_t i) {
        const int k = static_cast<int>(i) + 1;
        if (w.log_rho(k) <= limit) fam.sets[i] = enumerate_component(w, k, log_inv_eps);
    });
    for (const auto& s : fam.sets) fam.n_eps += s.size();
    return fam;
}

std::vector<CardinalityRow> cardinality_scaling(const WeightSequence& w, std::span<const double> eps_list, double p) {
    std::vector<CardinalityRow> rows;
    for (double eps : eps_list) {
        const auto fam = build_index_sets(w, eps);
        rows.push_back({eps, fam.n_eps, static_cast<double>(fam.n_eps) * std::pow(eps, p)});
    }
    return rows;
}

} // namespace krt
