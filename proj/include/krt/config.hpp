#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "krt/model.hpp"
#include "krt/transport.hpp"

namespace krt {

struct ModelSpec {
    std::string family = "uniform";  ///< uniform | tilt | posterior
    std::vector<double> tilt;
    int m = 1;
    std::vector<double> data;
    double noise_variance = 1.0;
};

struct ExperimentConfig {
    ModelSpec target;
    ModelSpec reference;
    int d = 1;
    BasisDecay decay = BasisDecay::algebraic(1.0, 3.0, 0.4);
    double alpha = 1.0;
    /// When set, rho_j = base^j replaces 1 + alpha / b_j.
    std::optional<double> rho_geometric;
    std::vector<double> eps_list = {1e-1, 1e-2, 1e-3, 1e-4};
    NormalizationMode mode = NormalizationMode::Slice;

    int projection_margin = 10;
    int cdf_nodes = 64;
    int tensor_nodes = 16;
    std::size_t mc_samples = 20000;
    std::vector<int> distance_nodes;  ///< empty: 12 per coordinate up to d = 6, Monte Carlo beyond
    std::size_t distance_mc_samples = 100000;

    std::size_t probe_points = 1024;
    std::size_t w1_samples = 10000;
    std::size_t check_points = 200;

    int grid_points = 256;
    std::uint64_t seed = 1234;
    std::string out = "out";
};

/// Parses the JSON config text. ConfigError carries "line N: ..." diagnostics.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

DensityModel make_model(const ModelSpec& spec, const ExperimentConfig& cfg);

} // namespace krt
