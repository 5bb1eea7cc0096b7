#pragma once

#include <optional>
#include <string>
#include <vector>

#include "krt/config.hpp"
#include "krt/metrics.hpp"
#include "krt/oracle.hpp"
#include "krt/sparse.hpp"
#include "krt/transport.hpp"

namespace krt {

/// Reference, target and exact map of one configured experiment.
struct Problem {
    ExperimentConfig config;
    DensityModel reference;
    DensityModel target;
    ExactTransport oracle;
};

Problem make_problem(const ExperimentConfig& cfg);
OracleOptions oracle_options(const ExperimentConfig& cfg);
BuildOptions build_options(const ExperimentConfig& cfg);

/// Weights long enough that 1/rho_{j_max} < eps.
WeightSequence weights_for(const ExperimentConfig& cfg, double eps);
/// Index sets capped at the oracle dimension (the truncated models are uniform beyond d).
IndexSetFamily index_sets_for(const ExperimentConfig& cfg, double eps);

struct CheckRow {
    std::string check;
    double value;
    double tolerance;
    bool pass;
};

/// Pushforward residual, monotonicity, endpoint and roundtrip checks of the exact map.
/// Writes <out>/oracle_check.csv.
std::vector<CheckRow> cmd_oracle_check(const ExperimentConfig& cfg);

struct BuildSummary {
    std::size_t n_eps = 0;
    int k_max = 0;
    std::size_t warnings = 0;
    std::size_t fallbacks = 0;
    std::string path;
};

/// Builds the transport for one eps and writes <out>/transport_eps<eps>.txt.
BuildSummary cmd_build(const ExperimentConfig& cfg, double eps);

struct SweepRowDetail {
    std::vector<ComponentError> errors;
    EmpiricalW1 w1;
    std::size_t warnings = 0;
    std::size_t fallbacks = 0;
    double seconds = 0.0;
};

struct SweepResult {
    RateReport report;
    std::vector<SweepRowDetail> details;
    std::optional<std::string> fit_error;
};

/// One row per eps: build, probe errors, distances, Wasserstein bound. Writes
/// <out>/rate_report.csv (flushed per row), <out>/rate_fit.csv and <out>/sweep_details.csv.
SweepResult cmd_sweep(const ExperimentConfig& cfg);

/// Loads a transport and writes n function samples at truncation s to <out>/samples.csv.
std::string cmd_sample(const ExperimentConfig& cfg, const std::string& transport_path, std::size_t n, int s);

/// Index-set sizes for every eps in the list, written to <out>/index_stats.csv; with `eps`
/// given, also the full family to <out>/index_set_eps<eps>.txt.
std::vector<CardinalityRow> cmd_index_stats(const ExperimentConfig& cfg, std::optional<double> eps = std::nullopt);

/// "%g" of eps with characters safe for file names.
std::string eps_tag(double eps);

} // namespace krt
