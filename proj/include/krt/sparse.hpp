#pragma once

#include <climits>
#include <iosfwd>
#include <span>
#include <vector>

#include "krt/model.hpp"
#include "krt/polys.hpp"

namespace krt {

/// Anisotropy weights rho_j > 1, j = 1..j_max.
class WeightSequence {
public:
    /// rho_j = 1 + alpha / b_j for j = 1..j_max.
    static WeightSequence from_decay(const BasisDecay& decay, double alpha, int j_max);
    /// rho_j = base^j (surrogate families for enumeration tests).
    static WeightSequence geometric(double base, int j_max);
    static WeightSequence from_values(std::vector<double> rho);

    int j_max() const { return static_cast<int>(rho_.size()); }
    /// 1-based.
    double rho(int j) const { return rho_[j - 1]; }
    double log_rho(int j) const { return log_rho_[j - 1]; }
    double alpha() const { return alpha_; }
    const std::vector<double>& values() const { return rho_; }

private:
    explicit WeightSequence(std::vector<double> rho, double alpha);
    std::vector<double> rho_;
    std::vector<double> log_rho_;
    double alpha_ = 0.0;
};

/// Smallest j with 1/rho_j < eps for rho_j = 1 + alpha / b_j. CapabilityError if the decay
/// rule runs out (explicit sequences) or j would exceed `limit`.
int required_j_max(const BasisDecay& decay, double alpha, double eps, int limit = 1 << 20);

/// gamma(rho, nu) = rho_k^{-max(1, nu_k)} prod_{j<k} rho_j^{-nu_j}, k = |nu|.
double gamma(const WeightSequence& w, const MultiIndex& nu);
double log_gamma(const WeightSequence& w, const MultiIndex& nu);

struct IndexSetFamily {
    double eps = 1.0;
    /// sets[k-1] = Lambda_{eps,k}, sorted.
    std::vector<std::vector<MultiIndex>> sets;
    std::size_t n_eps = 0;
    int k_max = 0;

    /// Lambda_{eps,k}; empty for k > k_max.
    std::span<const MultiIndex> set(int k) const;
    std::vector<std::size_t> sizes() const;

    /// Header lines `eps`, `k_max`, `n_eps`, then per k a line `set k count` followed by
    /// `nu_1 ... nu_k  gamma` lines.
    void write(std::ostream& os, const WeightSequence& w) const;
};

/// All Lambda_{eps,k} = {nu in N_0^k : gamma(rho, nu) >= eps} by pruned depth-first search.
/// Components past `dim_cap` are left empty. Requires 1/rho_{j_max} < eps unless the cap
/// already stops below j_max.
IndexSetFamily build_index_sets(const WeightSequence& w, double eps, int dim_cap = INT_MAX);

struct CardinalityRow {
    double eps;
    std::size_t n_eps;
    double scaled;  ///< n_eps * eps^p
};

std::vector<CardinalityRow> cardinality_scaling(const WeightSequence& w, std::span<const double> eps_list, double p);

} // namespace krt
