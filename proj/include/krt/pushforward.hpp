#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "krt/model.hpp"
#include "krt/transport.hpp"

namespace krt {

/// psi_j(x) = b_j cos(j pi x) sampled at G uniform points of [0, 1], j = 1..size.
class FunctionBasis {
public:
    FunctionBasis(const BasisDecay& decay, int size, int grid_points = 256);

    int size() const { return size_; }
    int grid_points() const { return g_; }
    const std::vector<double>& grid() const { return x_; }
    /// psi_j on the grid (1-based j).
    std::span<const double> psi(int j) const;

private:
    int size_;
    int g_;
    std::vector<double> x_;
    std::vector<double> values_;  // size_ x g_
};

/// sum_{j<=s} y_j psi_j on the grid.
std::vector<double> phi_expand(const FunctionBasis& basis, std::span<const double> y, int s);

struct BanachSamples {
    int s = 0;
    int grid_points = 0;
    /// n x s reference draws and their images under the transport, row-major.
    std::vector<double> latent;
    std::vector<double> transported;
    /// n x G grid functions.
    std::vector<double> functions;

    std::size_t size() const { return s ? latent.size() / s : 0; }
    std::span<const double> function(std::size_t i) const {
        return std::span<const double>(functions).subspan(i * grid_points, grid_points);
    }
};

/// Draws y_[s] from the reference (uniform unless `reference` is given), pushes through T and
/// expands with the first s basis functions. Sample i uses stream i of `seed`.
BanachSamples sample_banach(const ApproxTransport& T, const FunctionBasis& basis, std::size_t n, int s,
                            std::uint64_t seed, const std::optional<DensityModel>& reference = std::nullopt);

} // namespace krt
