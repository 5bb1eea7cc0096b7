#include "krt/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "krt/errors.hpp"

namespace krt {

namespace {

using json = nlohmann::json;

int line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Line of the first occurrence of "key" in the text; 0 when not found.
int line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find('"' + key + '"');
    return pos == std::string::npos ? 0 : line_of(text, pos);
}

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        const int line = line_of_key(text_, key);
        throw ConfigError(line ? "line " + std::to_string(line) + ": " + message : message);
    }

    void allow(const json& obj, const std::set<std::string>& keys, const std::string& where) const {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!keys.count(it.key())) fail(it.key(), "unknown key '" + it.key() + "' in " + where);
    }

    template <class T>
    T get(const json& obj, const std::string& key, T fallback) const {
        if (!obj.contains(key)) return fallback;
        try {
            return obj.at(key).get<T>();
        } catch (const json::exception&) {
            fail(key, "key '" + key + "' has the wrong type");
        }
    }

    double positive(const json& obj, const std::string& key, double fallback) const {
        const double v = get<double>(obj, key, fallback);
        if (!(v > 0.0)) fail(key, "key '" + key + "' must be positive");
        return v;
    }

    template <class T>
    T positive_int(const json& obj, const std::string& key, T fallback) const {
        const auto v = get<long long>(obj, key, static_cast<long long>(fallback));
        if (v <= 0) fail(key, "key '" + key + "' must be a positive integer");
        return static_cast<T>(v);
    }

private:
    const std::string& text_;
};

ModelSpec read_model(const Reader& r, const json& obj, const std::string& where) {
    ModelSpec spec;
    spec.family = r.get<std::string>(obj, "family", "uniform");
    if (spec.family != "uniform" && spec.family != "tilt" && spec.family != "posterior")
        r.fail("family", "unknown family '" + spec.family + "' in " + where + " (expected uniform, tilt or posterior)");
    spec.tilt = r.get<std::vector<double>>(obj, "tilt", {});
    for (double c : spec.tilt)
        if (!(std::abs(c) < 1.0)) r.fail("tilt", "tilt coefficients must satisfy |c| < 1");
    if (spec.family == "tilt" && spec.tilt.empty()) r.fail("family", "family 'tilt' needs a non-empty 'tilt' list");
    if (obj.contains("posterior")) {
        const auto& p = obj.at("posterior");
        if (!p.is_object()) r.fail("posterior", "'posterior' must be an object");
        r.allow(p, {"m", "data", "noise_variance"}, "posterior");
        spec.m = r.positive_int<int>(p, "m", 1);
        spec.data = r.get<std::vector<double>>(p, "data", std::vector<double>(spec.m, 0.0));
        if (static_cast<int>(spec.data.size()) != spec.m) r.fail("data", "posterior 'data' must have m entries");
        spec.noise_variance = r.positive(p, "noise_variance", 1.0);
    } else if (spec.family == "posterior") {
        r.fail("family", "family 'posterior' needs a 'posterior' object");
    }
    return spec;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                          ": malformed config: " + e.what());
    }
    if (!root.is_object()) throw ConfigError("line 1: config must be a JSON object");
    const Reader r(text);
    r.allow(root,
            {"family", "tilt", "posterior", "reference", "d", "decay", "alpha", "rho_geometric", "eps_list", "mode",
             "quadrature", "probe", "basis", "seed", "out"},
            "config");

    ExperimentConfig cfg;
    cfg.target = read_model(r, root, "config");
    if (root.contains("reference")) {
        const auto& ref = root.at("reference");
        if (!ref.is_object()) r.fail("reference", "'reference' must be an object");
        r.allow(ref, {"family", "tilt", "posterior"}, "reference");
        cfg.reference = read_model(r, ref, "reference");
    }
    cfg.d = r.positive_int<int>(root, "d", 1);

    if (root.contains("decay")) {
        const auto& dj = root.at("decay");
        if (!dj.is_object()) r.fail("decay", "'decay' must be an object");
        r.allow(dj, {"c", "r", "p", "values"}, "decay");
        try {
            if (dj.contains("values")) {
                const auto values = r.get<std::vector<double>>(dj, "values", {});
                cfg.decay = BasisDecay::explicit_values(values, r.get<double>(dj, "p", 0.5));
            } else {
                const double c = r.positive(dj, "c", 1.0);
                const double rr = r.positive(dj, "r", 3.0);
                cfg.decay = BasisDecay::algebraic(c, rr, r.get<double>(dj, "p", 1.2 / rr));
            }
        } catch (const DomainError& e) {
            r.fail("decay", e.what());
        }
    }
    cfg.alpha = r.positive(root, "alpha", 1.0);
    if (root.contains("rho_geometric")) {
        const double base = r.get<double>(root, "rho_geometric", 2.0);
        if (!(base > 1.0)) r.fail("rho_geometric", "'rho_geometric' must exceed 1");
        cfg.rho_geometric = base;
    }
    if (root.contains("eps_list")) {
        cfg.eps_list = r.get<std::vector<double>>(root, "eps_list", {});
        if (cfg.eps_list.empty()) r.fail("eps_list", "'eps_list' must not be empty");
        for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
            if (!(cfg.eps_list[i] > 0.0 && cfg.eps_list[i] <= 1.0)) r.fail("eps_list", "eps values must lie in (0, 1]");
            if (i && !(cfg.eps_list[i] < cfg.eps_list[i - 1])) r.fail("eps_list", "'eps_list' must be strictly decreasing");
        }
    }
    try {
        cfg.mode = parse_mode(r.get<std::string>(root, "mode", "slice"));
    } catch (const DomainError& e) {
        r.fail("mode", e.what());
    }
    if (root.contains("quadrature")) {
        const auto& q = root.at("quadrature");
        if (!q.is_object()) r.fail("quadrature", "'quadrature' must be an object");
        r.allow(q, {"margin", "cdf_nodes", "tensor_nodes", "mc_samples", "distance_nodes", "distance_mc_samples"},
                "quadrature");
        cfg.projection_margin = r.get<int>(q, "margin", cfg.projection_margin);
        if (cfg.projection_margin < 0) r.fail("margin", "'margin' must be non-negative");
        cfg.cdf_nodes = r.positive_int<int>(q, "cdf_nodes", cfg.cdf_nodes);
        cfg.tensor_nodes = r.positive_int<int>(q, "tensor_nodes", cfg.tensor_nodes);
        if (cfg.cdf_nodes > 256 || cfg.tensor_nodes > 256) r.fail("cdf_nodes", "node counts must not exceed 256");
        cfg.mc_samples = r.positive_int<std::size_t>(q, "mc_samples", cfg.mc_samples);
        cfg.distance_nodes = r.get<std::vector<int>>(q, "distance_nodes", {});
        for (int n : cfg.distance_nodes)
            if (n < 1 || n > 256) r.fail("distance_nodes", "'distance_nodes' entries must lie in [1, 256]");
        cfg.distance_mc_samples = r.positive_int<std::size_t>(q, "distance_mc_samples", cfg.distance_mc_samples);
    }
    if (!cfg.distance_nodes.empty() && static_cast<int>(cfg.distance_nodes.size()) != cfg.d)
        r.fail("distance_nodes", "'distance_nodes' needs one entry per coordinate (d)");
    if (root.contains("probe")) {
        const auto& p = root.at("probe");
        if (!p.is_object()) r.fail("probe", "'probe' must be an object");
        r.allow(p, {"points", "w1_samples", "check_points"}, "probe");
        cfg.probe_points = r.positive_int<std::size_t>(p, "points", cfg.probe_points);
        cfg.w1_samples = r.positive_int<std::size_t>(p, "w1_samples", cfg.w1_samples);
        cfg.check_points = r.positive_int<std::size_t>(p, "check_points", cfg.check_points);
        if (cfg.w1_samples < 2) r.fail("w1_samples", "'w1_samples' must be at least 2");
    }
    if (root.contains("basis")) {
        const auto& b = root.at("basis");
        if (!b.is_object()) r.fail("basis", "'basis' must be an object");
        r.allow(b, {"grid"}, "basis");
        cfg.grid_points = r.positive_int<int>(b, "grid", cfg.grid_points);
        if (cfg.grid_points < 2) r.fail("grid", "'grid' must be at least 2");
    }
    cfg.seed = r.get<std::uint64_t>(root, "seed", cfg.seed);
    cfg.out = r.get<std::string>(root, "out", cfg.out);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

DensityModel make_model(const ModelSpec& spec, const ExperimentConfig& cfg) {
    if (spec.family == "uniform") return uniform_model(cfg.d, cfg.decay);
    if (spec.family == "tilt") return tilt_model(spec.tilt, cfg.d, cfg.decay);
    auto pm = PosteriorModel::with_noise_variance(sensor_forward_map(cfg.decay, spec.m), spec.data, spec.noise_variance);
    return posterior_model(pm, cfg.decay, cfg.d);
}

} // namespace krt
