#pragma once

#include <functional>
#include <vector>

#include "krt/chebyshev.hpp"

namespace krt {

/// Tail integrals of a ridge density f(y_[d]) = g(sum_j a_j y_j).
///
/// tail(k, s) = int_{U_{d-k}} g(s + sum_{j>k} a_j t_j) dmu(t), so the marginal of f in the
/// first k coordinates is tail(k, sum_{j<=k} a_j y_j). Computed backwards from k = d by
/// one-dimensional Gauss convolution and stored as Chebyshev series on [-R_k, R_k],
/// R_k = sum_{j<=k} |a_j|.
class RidgeTails {
public:
    RidgeTails(std::vector<double> weights, std::function<double(double)> profile);

    int dim() const { return static_cast<int>(weights_.size()); }
    double weight(int j) const { return weights_[j - 1]; }
    double tail(int k, double s) const;
    /// tail(0, 0): the integral of g(a . y) over U_d.
    double total() const { return total_; }
    /// Node count used for the backward convolutions.
    int convolution_nodes() const { return nodes_; }

private:
    double convolve(int k, double s, int nodes) const;

    std::vector<double> weights_;
    std::function<double(double)> profile_;
    std::vector<ChebyshevSeries> tails_;  // index k = 1..d-1 used
    double total_ = 0.0;
    int nodes_ = 64;
};

} // namespace krt
