#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace krt {

/// SplitMix64 finalizer. Used to derive independent stream seeds from (master seed, counter).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return splitmix64(master ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Engine for stream `stream` of master seed `master`.
inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
    return std::mt19937_64{stream_seed(master, stream)};
}

/// Uniform draw on [-1, 1].
inline double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) - 1.0;
}

/// Randomly shifted Kronecker (R_d) low-discrepancy sequence on [-1,1]^dim.
/// The generator is 1/phi_dim^(j+1) with phi_dim the unique positive root of x^(dim+1) = x + 1.
class LowDiscrepancySequence {
public:
    LowDiscrepancySequence(int dim, std::uint64_t seed) : alpha_(dim), shift_(dim) {
        double phi = 2.0;
        for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dim + 1));
        auto rng = make_engine(seed, 0x10);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int j = 0; j < dim; ++j) {
            alpha_[j] = std::fmod(std::pow(1.0 / phi, j + 1), 1.0);
            shift_[j] = u(rng);
        }
    }

    int dim() const { return static_cast<int>(alpha_.size()); }

    /// Point i, written into out (size dim).
    void point(std::uint64_t i, double* out) const {
        for (std::size_t j = 0; j < alpha_.size(); ++j) {
            double v = shift_[j] + static_cast<double>(i + 1) * alpha_[j];
            v -= std::floor(v);
            out[j] = 2.0 * v - 1.0;
        }
    }

    /// The first n points, row-major n x dim.
    std::vector<double> take(std::size_t n) const {
        std::vector<double> pts(n * alpha_.size());
        for (std::size_t i = 0; i < n; ++i) point(i, pts.data() + i * alpha_.size());
        return pts;
    }

private:
    std::vector<double> alpha_;
    std::vector<double> shift_;
};

} // namespace krt
