#include "krt/polys.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "krt/errors.hpp"
#include "krt/parallel.hpp"
#include "krt/random.hpp"

namespace krt {

MultiIndex::MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
    for (int v : e_)
        if (v < 0) throw DomainError("multi-index entries must be non-negative");
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents) : MultiIndex(std::vector<int>(exponents)) {}

int MultiIndex::total_degree() const {
    int s = 0;
    for (int v : e_) s += v;
    return s;
}

bool MultiIndex::dominated_by(const MultiIndex& other) const {
    if (other.size() != size()) return false;
    for (int j = 0; j < size(); ++j)
        if (e_[j] > other.e_[j]) return false;
    return true;
}

std::ostream& operator<<(std::ostream& os, const MultiIndex& nu) {
    os << '(';
    for (int j = 0; j < nu.size(); ++j) os << (j ? "," : "") << nu[j];
    return os << ')';
}

void legendre_table(int n, double x, double* out) {
    // Orthonormal recurrence:
    // L_{k+1} = a_k x L_k - a_k / a_{k-1} L_{k-1},  a_k = sqrt((2k+1)(2k+3)) / (k+1).
    out[0] = 1.0;
    if (n == 0) return;
    out[1] = std::sqrt(3.0) * x;
    double a_prev = std::sqrt(3.0);
    for (int k = 1; k < n; ++k) {
        const double a = std::sqrt((2.0 * k + 1.0) * (2.0 * k + 3.0)) / (k + 1.0);
        out[k + 1] = a * x * out[k] - (a / a_prev) * out[k - 1];
        a_prev = a;
    }
}

double legendre_eval(int n, double x) {
    if (n < 0 || n > 200) throw DomainError("legendre_eval: degree outside [0, 200]");
    double buf[201];
    legendre_table(n, x, buf);
    return buf[n];
}

LegendreExpansion::LegendreExpansion(int k) : k_(k) {
    if (k < 1) throw DomainError("expansion dimension must be >= 1");
}

void LegendreExpansion::set(const MultiIndex& nu, double value) {
    if (nu.size() != k_) throw DomainError("multi-index length does not match expansion dimension");
    coeffs_[nu] = value;
}

void LegendreExpansion::add(const MultiIndex& nu, double value) {
    if (nu.size() != k_) throw DomainError("multi-index length does not match expansion dimension");
    coeffs_[nu] += value;
}

double LegendreExpansion::coefficient(const MultiIndex& nu) const {
    const auto it = coeffs_.find(nu);
    return it == coeffs_.end() ? 0.0 : it->second;
}

double LegendreExpansion::operator()(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != k_)
        throw DomainError("expansion_eval: point has " + std::to_string(y.size()) + " coordinates, expected " +
                          std::to_string(k_));
    if (coeffs_.empty()) return 0.0;
    std::vector<std::vector<double>> tables(k_);
    for (int j = 0; j < k_; ++j) {
        tables[j].resize(max_degree(j) + 1);
        legendre_table(max_degree(j), y[j], tables[j].data());
    }
    double s = 0.0;
    for (const auto& [nu, c] : coeffs_) {
        double term = c;
        for (int j = 0; j < k_; ++j) term *= tables[j][nu[j]];
        s += term;
    }
    return s;
}

double LegendreExpansion::l2_norm() const {
    double s = 0.0;
    for (const auto& [nu, c] : coeffs_) s += c * c;
    return std::sqrt(s);
}

int LegendreExpansion::max_degree(int j) const {
    int m = 0;
    for (const auto& [nu, c] : coeffs_) m = std::max(m, nu[j]);
    return m;
}

void LegendreExpansion::write(std::ostream& os) const {
    char buf[64];
    for (const auto& [nu, c] : coeffs_) {
        for (int j = 0; j < k_; ++j) os << (j ? " " : "") << nu[j];
        std::snprintf(buf, sizeof buf, "%.17g", c);
        os << "  " << buf << '\n';
    }
}

LegendreExpansion LegendreExpansion::read(std::istream& is, int k, std::size_t count) {
    LegendreExpansion e(k);
    std::string line;
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(is, line)) throw IoError("expansion block truncated");
        std::istringstream ls(line);
        std::vector<int> nu(k);
        for (int j = 0; j < k; ++j)
            if (!(ls >> nu[j])) throw IoError("malformed expansion line: '" + line + "'");
        std::string coeff;
        if (!(ls >> coeff)) throw IoError("malformed expansion line: '" + line + "'");
        e.set(MultiIndex(std::move(nu)), std::strtod(coeff.c_str(), nullptr));
    }
    return e;
}

double expansion_eval(const LegendreExpansion& e, std::span<const double> y) { return e(y); }

quad::TensorGrid projection_grid(int k, std::span<const MultiIndex> indices, int margin) {
    std::vector<int> degree(k, 0);
    for (const auto& nu : indices) {
        if (nu.size() != k) throw DomainError("projection: index length does not match dimension");
        for (int j = 0; j < k; ++j) degree[j] = std::max(degree[j], nu[j]);
    }
    std::vector<quad::QuadratureRule> rules;
    rules.reserve(k);
    for (int j = 0; j < k; ++j) rules.push_back(quad::gauss_legendre_cached(std::min(256, degree[j] + 1 + margin)));
    return quad::TensorGrid(std::move(rules));
}

namespace {

// Per-dimension Legendre tables at the nodes of each rule: tables[j][node * (deg_j+1) + n].
std::vector<std::vector<double>> node_tables(const quad::TensorGrid& grid, const std::vector<int>& degree) {
    std::vector<std::vector<double>> tables(grid.dim());
    for (int j = 0; j < grid.dim(); ++j) {
        const auto& rule = grid.rule(j);
        const int stride = degree[j] + 1;
        tables[j].resize(rule.size() * stride);
        for (std::size_t i = 0; i < rule.size(); ++i) legendre_table(degree[j], rule.nodes[i], &tables[j][i * stride]);
    }
    return tables;
}

} // namespace

LegendreExpansion project_on_grid(const quad::TensorGrid& grid, std::span<const double> values,
                                  std::span<const MultiIndex> indices) {
    const int k = grid.dim();
    if (values.size() != grid.size()) throw DomainError("project_on_grid: value count does not match grid");
    LegendreExpansion out(k);
    if (indices.empty()) return out;

    std::vector<int> degree(k, 0);
    for (const auto& nu : indices) {
        if (nu.size() != k) throw DomainError("projection: index length does not match dimension");
        for (int j = 0; j < k; ++j) degree[j] = std::max(degree[j], nu[j]);
    }
    const auto tables = node_tables(grid, degree);

    const std::size_t n_idx = indices.size();
    std::vector<double> coeffs(n_idx, 0.0);
    std::vector<int> pos(k);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.unflatten(i, pos);
        double wv = values[i];
        for (int j = 0; j < k; ++j) wv *= grid.rule(j).weights[pos[j]];
        for (std::size_t a = 0; a < n_idx; ++a) {
            const auto& nu = indices[a];
            double basis = 1.0;
            for (int j = 0; j < k; ++j) basis *= tables[j][pos[j] * (degree[j] + 1) + nu[j]];
            coeffs[a] += wv * basis;
        }
    }
    for (std::size_t a = 0; a < n_idx; ++a) out.set(indices[a], coeffs[a]);
    return out;
}

LegendreExpansion project(const quad::Integrand& target, int k, std::span<const MultiIndex> indices,
                          const ProjectionBudget& budget) {
    if (k <= budget.tensor_max) {
        const auto grid = projection_grid(k, indices, budget.margin);
        std::vector<double> values(grid.size());
        parallel_for(grid.size(), [&](std::size_t i) {
            std::vector<double> y(k);
            grid.point(i, y);
            values[i] = target(y);
        });
        return project_on_grid(grid, values, indices);
    }
    // Monte Carlo projection: one shared sample set for all coefficients.
    LegendreExpansion out(k);
    std::vector<double> sums(indices.size(), 0.0);
    const auto& mc = budget.monte_carlo;
    auto rng = make_engine(mc.seed, 0);
    std::vector<double> y(k);
    for (std::size_t s = 0; s < mc.samples; ++s) {
        for (int j = 0; j < k; ++j) y[j] = uniform_pm1(rng);
        const double v = target(y);
        for (std::size_t a = 0; a < indices.size(); ++a) {
            double basis = 1.0;
            for (int j = 0; j < k; ++j) basis *= legendre_eval(indices[a][j], y[j]);
            sums[a] += v * basis;
        }
    }
    for (std::size_t a = 0; a < indices.size(); ++a) out.set(indices[a], sums[a] / static_cast<double>(mc.samples));
    return out;
}

SliceEvaluator::SliceEvaluator(const LegendreExpansion& e) : k_(e.dim()), prefix_degree_(e.dim() - 1, 0) {
    terms_.reserve(e.size());
    for (const auto& [nu, c] : e.coefficients()) {
        Term t{c, nu[k_ - 1], std::vector<int>(nu.exponents().begin(), nu.exponents().end() - 1)};
        last_degree_ = std::max(last_degree_, t.last);
        for (int j = 0; j + 1 < k_; ++j) prefix_degree_[j] = std::max(prefix_degree_[j], t.prefix[j]);
        terms_.push_back(std::move(t));
    }
}

void SliceEvaluator::slice_coefficients(std::span<const double> prefix, std::span<double> beta) const {
    if (static_cast<int>(prefix.size()) != k_ - 1) throw DomainError("slice: prefix length must be k - 1");
    std::fill(beta.begin(), beta.end(), 0.0);
    std::vector<std::vector<double>> tables(k_ - 1);
    for (int j = 0; j + 1 < k_; ++j) {
        tables[j].resize(prefix_degree_[j] + 1);
        legendre_table(prefix_degree_[j], prefix[j], tables[j].data());
    }
    for (const auto& t : terms_) {
        double v = t.coeff;
        for (int j = 0; j + 1 < k_; ++j) v *= tables[j][t.prefix[j]];
        beta[t.last] += v;
    }
}

std::vector<double> SliceEvaluator::slice_coefficients(std::span<const double> prefix) const {
    std::vector<double> beta(last_degree_ + 1, 0.0);
    slice_coefficients(prefix, beta);
    return beta;
}

std::vector<double> SliceEvaluator::averaged_square() const {
    std::map<std::vector<int>, std::vector<double>> groups;
    for (const auto& t : terms_) {
        auto& beta = groups[t.prefix];
        beta.resize(last_degree_ + 1, 0.0);
        beta[t.last] += t.coeff;
    }
    std::vector<double> total(2 * last_degree_ + 1, 0.0);
    for (const auto& [prefix, beta] : groups) {
        const auto sq = square_legendre_series(beta);
        for (std::size_t n = 0; n < sq.size(); ++n) total[n] += sq[n];
    }
    return total;
}

std::vector<double> square_legendre_series(std::span<const double> beta) {
    const int D = beta.empty() ? 0 : static_cast<int>(beta.size()) - 1;
    const auto& rule = quad::gauss_legendre_cached(2 * D + 1);
    std::vector<double> g(2 * D + 1, 0.0);
    std::vector<double> table(2 * D + 1);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        legendre_table(2 * D, rule.nodes[i], table.data());
        double q = 0.0;
        for (int n = 0; n <= D && n < static_cast<int>(beta.size()); ++n) q += beta[n] * table[n];
        const double wq2 = rule.weights[i] * q * q;
        for (int m = 0; m <= 2 * D; ++m) g[m] += wq2 * table[m];
    }
    return g;
}

double legendre_series_eval(std::span<const double> coeffs, double x) {
    if (coeffs.empty()) return 0.0;
    std::vector<double> table(coeffs.size());
    legendre_table(static_cast<int>(coeffs.size()) - 1, x, table.data());
    double s = 0.0;
    for (std::size_t n = 0; n < coeffs.size(); ++n) s += coeffs[n] * table[n];
    return s;
}

double legendre_series_partial_integral(std::span<const double> coeffs, double y) {
    if (coeffs.empty()) return 0.0;
    const int n_max = static_cast<int>(coeffs.size());
    // Classical P_0..P_{n_max} at y.
    std::vector<double> P(n_max + 1);
    P[0] = 1.0;
    if (n_max >= 1) P[1] = y;
    for (int k = 1; k < n_max; ++k) P[k + 1] = ((2.0 * k + 1.0) * y * P[k] - k * P[k - 1]) / (k + 1.0);
    double s = coeffs[0] * 0.5 * (y + 1.0);
    for (int n = 1; n < n_max; ++n) s += coeffs[n] * (P[n + 1] - P[n - 1]) / (2.0 * std::sqrt(2.0 * n + 1.0));
    return s;
}

SquaredSliceMarginal squared_slice_marginal(const LegendreExpansion& p_plus_one) {
    return SquaredSliceMarginal(p_plus_one);
}

} // namespace krt
