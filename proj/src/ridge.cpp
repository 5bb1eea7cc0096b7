#include "krt/ridge.hpp"

#include <cmath>

#include "krt/errors.hpp"
#include "krt/quad.hpp"

namespace krt {

RidgeTails::RidgeTails(std::vector<double> weights, std::function<double(double)> profile)
    : weights_(std::move(weights)), profile_(std::move(profile)) {
    const int d = dim();
    if (d < 1) throw DomainError("ridge tails: dimension must be >= 1");
    tails_.resize(d + 1);

    std::vector<double> radius(d + 1, 0.0);
    for (int k = 1; k <= d; ++k) radius[k] = radius[k - 1] + std::abs(weights_[k - 1]);

    // Pick the convolution rule on the sharpest stage (k = d - 1 integrates g directly)
    // by doubling until probe values agree.
    for (nodes_ = 32; nodes_ <= 256; nodes_ *= 2) {
        if (nodes_ == 256) break;
        double worst = 0.0;
        for (double frac : {-1.0, -0.6, -0.2, 0.1, 0.45, 0.9}) {
            const double s = frac * radius[d - 1];
            const double a = convolve(d - 1, s, nodes_);
            const double b = convolve(d - 1, s, 2 * nodes_);
            worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
        }
        if (worst < 1e-14) break;
    }

    for (int k = d - 1; k >= 1; --k) {
        tails_[k] = ChebyshevSeries::fit([&](double s) { return convolve(k, s, nodes_); }, -radius[k], radius[k], 1e-13);
    }
    total_ = convolve(0, 0.0, nodes_);
    if (!(total_ > 0.0) || !std::isfinite(total_)) throw ModelError("ridge tails: non-positive total mass");
}

double RidgeTails::convolve(int k, double s, int nodes) const {
    const auto& rule = quad::gauss_legendre_cached(nodes);
    const double a = weights_[k];  // a_{k+1}
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * tail(k + 1, s + a * rule.nodes[i]);
    return sum;
}

double RidgeTails::tail(int k, double s) const {
    if (k == dim()) return profile_(s);
    if (k == 0) return total_;
    return tails_[k](s);
}

} // namespace krt
