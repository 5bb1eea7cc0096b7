#include "krt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "krt/errors.hpp"
#include "krt/parallel.hpp"
#include "krt/pushforward.hpp"
#include "krt/random.hpp"

namespace krt {

namespace {

std::filesystem::path output_dir(const ExperimentConfig& cfg) {
    std::filesystem::path dir(cfg.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.out + "': " + ec.message());
    return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    return os;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

} // namespace

std::string eps_tag(double eps) { return fmt("%g", eps); }

OracleOptions oracle_options(const ExperimentConfig& cfg) {
    OracleOptions o;
    o.cdf_nodes = cfg.cdf_nodes;
    o.tensor = quad::TensorScheme{cfg.tensor_nodes};
    o.monte_carlo = quad::MonteCarloScheme{stream_seed(cfg.seed, 0x0A), cfg.mc_samples};
    return o;
}

BuildOptions build_options(const ExperimentConfig& cfg) {
    BuildOptions b;
    b.mode = cfg.mode;
    b.projection.margin = cfg.projection_margin;
    b.projection.monte_carlo = quad::MonteCarloScheme{stream_seed(cfg.seed, 0x0B), cfg.mc_samples};
    b.probe_seed = stream_seed(cfg.seed, 0x0C);
    return b;
}

Problem make_problem(const ExperimentConfig& cfg) {
    auto rho = make_model(cfg.reference, cfg);
    auto pi = make_model(cfg.target, cfg);
    ExactTransport oracle(rho, pi, oracle_options(cfg));
    return Problem{cfg, std::move(rho), std::move(pi), std::move(oracle)};
}

WeightSequence weights_for(const ExperimentConfig& cfg, double eps) {
    if (cfg.rho_geometric) {
        const double base = *cfg.rho_geometric;
        const int j_max = static_cast<int>(std::floor(std::log(1.0 / eps) / std::log(base))) + 1;
        return WeightSequence::geometric(base, std::max(1, j_max));
    }
    return WeightSequence::from_decay(cfg.decay, cfg.alpha, required_j_max(cfg.decay, cfg.alpha, eps));
}

IndexSetFamily index_sets_for(const ExperimentConfig& cfg, double eps) {
    return build_index_sets(weights_for(cfg, eps), eps, cfg.d);
}

std::vector<CheckRow> cmd_oracle_check(const ExperimentConfig& cfg) {
    const auto problem = make_problem(cfg);
    const auto& T = problem.oracle;
    const int d = cfg.d;

    ProbeSet probe;
    if (d == 1) {
        probe.dim = 1;
        for (int i = 0; i <= 100; ++i) probe.points.push_back(-1.0 + 0.02 * i);
    } else {
        probe = low_discrepancy_probe(d, cfg.check_points, stream_seed(cfg.seed, 0x01));
    }
    const std::size_t n = probe.size();
    std::vector<double> residual(n), mono(n, INFINITY), endpoint(n), roundtrip(n);
    parallel_for(n, [&](std::size_t i) {
        const auto y = probe.point(i);
        residual[i] = std::abs(T.pushforward_residual(y));
        std::vector<double> z(y.begin(), y.end());
        for (int k = 1; k <= d; ++k) {
            const double a = y[k - 1];
            const double b = a < 0.99 ? a + 0.01 : a - 0.01;
            z[k - 1] = std::min(a, b);
            const double lo = T.component(k, z);
            z[k - 1] = std::max(a, b);
            const double hi = T.component(k, z);
            mono[i] = std::min(mono[i], hi - lo);
            z[k - 1] = -1.0;
            endpoint[i] = std::max(endpoint[i], std::abs(T.component(k, z) + 1.0));
            z[k - 1] = 1.0;
            endpoint[i] = std::max(endpoint[i], std::abs(T.component(k, z) - 1.0));
            z[k - 1] = a;
        }
        const auto back = T.pull(T.push(y));
        for (int k = 0; k < d; ++k) roundtrip[i] = std::max(roundtrip[i], std::abs(back[k] - y[k]));
    });
    auto max_of = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
    const double min_step = *std::min_element(mono.begin(), mono.end());

    std::vector<CheckRow> rows;
    rows.push_back({"pushforward_residual", max_of(residual), 1e-6, max_of(residual) <= 1e-6});
    rows.push_back({"monotonicity_min_increment", min_step, 0.0, min_step > 0.0});
    rows.push_back({"endpoint_error", max_of(endpoint), 1e-12, max_of(endpoint) <= 1e-12});
    rows.push_back({"roundtrip_error", max_of(roundtrip), 1e-8, max_of(roundtrip) <= 1e-8});

    auto os = open_output(output_dir(cfg) / "oracle_check.csv");
    os << "check,value,tolerance,pass\n";
    for (const auto& r : rows)
        os << r.check << ',' << fmt("%.6e", r.value) << ',' << fmt("%g", r.tolerance) << ','
           << (r.pass ? "true" : "false") << '\n';
    return rows;
}

BuildSummary cmd_build(const ExperimentConfig& cfg, double eps) {
    const auto problem = make_problem(cfg);
    const auto family = index_sets_for(cfg, eps);
    BuildReport report;
    const auto T = build_transport(problem.oracle, family, cfg.alpha, build_options(cfg), &report);
    BuildSummary s;
    s.n_eps = family.n_eps;
    s.k_max = family.k_max;
    s.warnings = report.warnings;
    s.fallbacks = report.fallbacks;
    s.path = (output_dir(cfg) / ("transport_eps" + eps_tag(eps) + ".txt")).string();
    T.save(s.path);
    return s;
}

SweepResult cmd_sweep(const ExperimentConfig& cfg) {
    const auto problem = make_problem(cfg);
    const int d = cfg.d;
    const auto dir = output_dir(cfg);
    const auto probe = low_discrepancy_probe(d, cfg.probe_points, stream_seed(cfg.seed, 0x02));
    const auto metric = ProductMetric::from_decay(cfg.decay, d);

    DistanceBudget budget;
    budget.monte_carlo = quad::MonteCarloScheme{stream_seed(cfg.seed, 0x03), cfg.distance_mc_samples};
    if (!cfg.distance_nodes.empty())
        budget.nodes = cfg.distance_nodes;
    else if (d <= quad::k_tensor_max)
        budget.nodes.assign(d, 12);

    SweepResult result;
    result.report.theoretical_slope = -(1.0 / cfg.decay.p - 1.0);
    auto csv = open_output(dir / "rate_report.csv");
    RateReport::write_header(csv);
    csv.flush();
    auto details = open_output(dir / "sweep_details.csv");
    details << "eps,k,sup_error,sup_derivative_error\n";

    for (double eps : cfg.eps_list) {
        const auto start = std::chrono::steady_clock::now();
        const auto family = index_sets_for(cfg, eps);
        BuildReport build;
        const auto T = build_transport(problem.oracle, family, cfg.alpha, build_options(cfg), &build);

        SweepRowDetail detail;
        detail.errors = component_sup_errors(problem.oracle, T, probe);
        detail.warnings = build.warnings;
        detail.fallbacks = build.fallbacks;
        RateRow row;
        row.eps = eps;
        row.n_eps = family.n_eps;
        for (const auto& e : detail.errors) row.sup_error_sum += e.value;
        const auto dist = statistical_distances(
            problem.target, [&](std::span<const double> y) { return T.pushforward_density(problem.reference, y); }, d,
            budget);
        row.hellinger = dist.hellinger;
        row.tv = dist.tv;
        row.kl = dist.kl;
        row.w_bound = wasserstein_upper_bound(detail.errors, metric);
        detail.w1 = first_marginal_w1(problem.oracle, T, cfg.w1_samples, stream_seed(cfg.seed, 0x04), metric.c[0]);
        detail.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        RateReport::write_row(csv, row);
        csv.flush();
        for (int k = 1; k <= d; ++k)
            details << fmt("%g", eps) << ',' << k << ',' << fmt("%.10e", detail.errors[k - 1].value) << ','
                    << fmt("%.10e", detail.errors[k - 1].derivative) << '\n';
        details.flush();
        result.report.rows.push_back(row);
        result.details.push_back(std::move(detail));
    }

    auto fit = open_output(dir / "rate_fit.csv");
    try {
        result.report.slope = fit_rate(result.report.rows);
    } catch (const FitError& e) {
        result.report.slope = NAN;
        result.fit_error = e.what();
    }
    result.report.write_fit_csv(fit);

    auto w1 = open_output(dir / "wasserstein_check.csv");
    w1 << "eps,w_bound,w1_first_marginal,w1_std_error\n";
    for (std::size_t i = 0; i < result.details.size(); ++i)
        w1 << fmt("%g", result.report.rows[i].eps) << ',' << fmt("%.10e", result.report.rows[i].w_bound) << ','
           << fmt("%.10e", result.details[i].w1.value) << ',' << fmt("%.10e", result.details[i].w1.std_error) << '\n';
    return result;
}

std::string cmd_sample(const ExperimentConfig& cfg, const std::string& transport_path, std::size_t n, int s) {
    const auto T = ApproxTransport::load(transport_path);
    const FunctionBasis basis(cfg.decay, s, cfg.grid_points);
    std::optional<DensityModel> reference;
    if (cfg.reference.family != "uniform") {
        ExperimentConfig wide = cfg;
        wide.d = std::max(cfg.d, s);
        reference = make_model(cfg.reference, wide);
    }
    const auto samples = sample_banach(T, basis, n, s, cfg.seed, reference);

    const auto path = output_dir(cfg) / "samples.csv";
    auto os = open_output(path);
    os << "# seed=" << cfg.seed << " s=" << s << " eps=" << fmt("%.17g", T.info().eps) << '\n';
    for (int i = 0; i < basis.grid_points(); ++i) os << (i ? "," : "") << 'g' << i;
    os << '\n';
    std::string line;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto f = samples.function(i);
        line.clear();
        for (int g = 0; g < basis.grid_points(); ++g) {
            if (g) line += ',';
            line += fmt("%.17g", f[g]);
        }
        os << line << '\n';
    }
    if (!os) throw IoError("failed writing '" + path.string() + "'");
    return path.string();
}

std::vector<CardinalityRow> cmd_index_stats(const ExperimentConfig& cfg, std::optional<double> eps) {
    const auto dir = output_dir(cfg);
    std::vector<double> list = cfg.eps_list;
    if (eps) list = {*eps};
    auto os = open_output(dir / "index_stats.csv");
    os << "eps,n_eps,k_max,n_eps_scaled,sizes\n";
    std::vector<CardinalityRow> rows;
    for (double e : list) {
        const auto w = weights_for(cfg, e);
        const auto family = build_index_sets(w, e);
        const CardinalityRow row{e, family.n_eps, static_cast<double>(family.n_eps) * std::pow(e, cfg.decay.p)};
        rows.push_back(row);
        std::string sizes;
        for (auto sz : family.sizes()) sizes += (sizes.empty() ? "" : ";") + std::to_string(sz);
        os << fmt("%g", e) << ',' << family.n_eps << ',' << family.k_max << ',' << fmt("%.10e", row.scaled) << ','
           << sizes << '\n';
        if (eps) {
            auto fs = open_output(dir / ("index_set_eps" + eps_tag(e) + ".txt"));
            family.write(fs, w);
        }
    }
    return rows;
}

} // namespace krt
