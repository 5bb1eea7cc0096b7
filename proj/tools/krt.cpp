#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "krt/errors.hpp"
#include "krt/experiment.hpp"
#include "krt/parallel.hpp"

namespace {

struct Common {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "experiment config (JSON)")->required();
    cmd->add_option("--out", c.out, "output directory (overrides config)");
    cmd->add_option("--seed", c.seed, "master seed (overrides config)");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

krt::ExperimentConfig resolve(const Common& c) {
    auto cfg = krt::load_config(c.config);
    if (c.out) cfg.out = *c.out;
    if (c.seed) cfg.seed = *c.seed;
    if (c.jobs) krt::set_thread_count(*c.jobs);
    return cfg;
}

int run_oracle_check(const krt::ExperimentConfig& cfg) {
    const auto rows = krt::cmd_oracle_check(cfg);
    bool ok = true;
    for (const auto& r : rows) {
        std::printf("%-28s %.3e  (tol %g)  %s\n", r.check.c_str(), r.value, r.tolerance, r.pass ? "pass" : "FAIL");
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

int run_build(const krt::ExperimentConfig& cfg, double eps) {
    const auto s = krt::cmd_build(cfg, eps);
    std::printf("N_eps=%zu k_max=%d\n", s.n_eps, s.k_max);
    if (s.warnings) std::printf("conditioning warnings: %zu, identity fallbacks: %zu\n", s.warnings, s.fallbacks);
    std::printf("wrote %s\n", s.path.c_str());
    return 0;
}

int run_sweep(const krt::ExperimentConfig& cfg) {
    const auto r = krt::cmd_sweep(cfg);
    std::printf("%10s %8s %14s %12s %12s %12s %12s\n", "eps", "N_eps", "sup_err_sum", "hellinger", "tv", "kl", "w_bound");
    for (const auto& row : r.report.rows)
        std::printf("%10g %8zu %14.4e %12.4e %12.4e %12.4e %12.4e\n", row.eps, row.n_eps, row.sup_error_sum,
                    row.hellinger, row.tv, row.kl, row.w_bound);
    if (r.fit_error)
        std::printf("slope: not available (%s)\n", r.fit_error->c_str());
    else
        std::printf("slope %.4f (theory %.4f)\n", r.report.slope, r.report.theoretical_slope);
    return 0;
}

int run_index_stats(const krt::ExperimentConfig& cfg, std::optional<double> eps) {
    const auto rows = krt::cmd_index_stats(cfg, eps);
    for (const auto& r : rows) std::printf("eps=%g N_eps=%zu N_eps*eps^p=%.4f\n", r.eps, r.n_eps, r.scaled);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse Knothe-Rosenblatt transport experiments"};
    app.require_subcommand(1);

    Common check_opts, build_opts, sweep_opts, sample_opts, stats_opts;
    double build_eps = 0.0;
    std::optional<double> stats_eps;
    std::string transport;
    std::size_t n_samples = 0;
    int s = 0;

    auto* check = app.add_subcommand("oracle-check", "verify the exact transport");
    add_common(check, check_opts);
    auto* build = app.add_subcommand("build", "build and serialize the sparse transport");
    add_common(build, build_opts);
    build->add_option("--eps", build_eps, "threshold eps in (0, 1]")->required();
    auto* sweep = app.add_subcommand("sweep", "error and distance sweep over eps_list");
    add_common(sweep, sweep_opts);
    auto* sample = app.add_subcommand("sample", "function-space samples from a serialized transport");
    add_common(sample, sample_opts);
    sample->add_option("--transport", transport, "transport file")->required();
    sample->add_option("--n", n_samples, "sample count")->required();
    sample->add_option("--s", s, "truncation dimension")->required()->check(CLI::PositiveNumber);
    auto* stats = app.add_subcommand("index-stats", "index-set cardinalities");
    add_common(stats, stats_opts);
    stats->add_option("--eps", stats_eps, "single eps (also writes the index family)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*check) return run_oracle_check(resolve(check_opts));
        if (*build) return run_build(resolve(build_opts), build_eps);
        if (*sweep) return run_sweep(resolve(sweep_opts));
        if (*sample) {
            const auto path = krt::cmd_sample(resolve(sample_opts), transport, n_samples, s);
            std::printf("wrote %s\n", path.c_str());
            return 0;
        }
        if (*stats) return run_index_stats(resolve(stats_opts), stats_eps);
    } catch (const krt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const krt::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
