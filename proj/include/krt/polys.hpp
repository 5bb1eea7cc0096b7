#pragma once

#include <compare>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "krt/quad.hpp"

namespace krt {

/// Exponent tuple (nu_1, ..., nu_k). Trailing zeros are significant: the length is the
/// component index k and the last slot is treated specially by the sparse weights.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> exponents);
    MultiIndex(std::initializer_list<int> exponents);
    static MultiIndex zeros(int k) { return MultiIndex(std::vector<int>(k, 0)); }

    int size() const { return static_cast<int>(e_.size()); }
    int operator[](int j) const { return e_[j]; }
    const std::vector<int>& exponents() const { return e_; }
    int total_degree() const;
    /// Componentwise <=.
    bool dominated_by(const MultiIndex& other) const;

    auto operator<=>(const MultiIndex&) const = default;
    bool operator==(const MultiIndex&) const = default;

private:
    std::vector<int> e_;
};

std::ostream& operator<<(std::ostream& os, const MultiIndex& nu);

/// L_n(x) = sqrt(2n+1) P_n(x), orthonormal in L^2([-1,1], dx/2). 0 <= n <= 200.
double legendre_eval(int n, double x);
/// L_0(x), ..., L_n(x) into out[0..n].
void legendre_table(int n, double x, double* out);

/// Finite tensor Legendre expansion sum_nu l_nu L_nu(y) over U_k.
class LegendreExpansion {
public:
    explicit LegendreExpansion(int k = 1);

    int dim() const { return k_; }
    std::size_t size() const { return coeffs_.size(); }
    bool empty() const { return coeffs_.empty(); }
    const std::map<MultiIndex, double>& coefficients() const { return coeffs_; }

    void set(const MultiIndex& nu, double value);
    void add(const MultiIndex& nu, double value);
    double coefficient(const MultiIndex& nu) const;

    /// Checked evaluation (DomainError on length mismatch).
    double operator()(std::span<const double> y) const;
    /// Parseval: sqrt(sum l_nu^2).
    double l2_norm() const;
    int max_degree(int j) const;

    /// One line per term: "nu_1 ... nu_k  coefficient", coefficient with 17 significant digits.
    void write(std::ostream& os) const;
    /// Reads `count` lines of the format produced by write().
    static LegendreExpansion read(std::istream& is, int k, std::size_t count);

private:
    int k_;
    std::map<MultiIndex, double> coeffs_;
};

double expansion_eval(const LegendreExpansion& e, std::span<const double> y);

struct ProjectionBudget {
    /// Extra Gauss nodes per coordinate beyond those integrating L_nu exactly.
    int margin = 10;
    int tensor_max = quad::k_tensor_max;
    /// Used for k > tensor_max.
    quad::MonteCarloScheme monte_carlo{};
};

/// Tensor grid with max_nu nu_j + 1 + margin nodes in coordinate j.
quad::TensorGrid projection_grid(int k, std::span<const MultiIndex> indices, int margin);

/// Coefficients sum_i w_i values[i] L_nu(x_i) for target values given on the grid points.
LegendreExpansion project_on_grid(const quad::TensorGrid& grid, std::span<const double> values,
                                  std::span<const MultiIndex> indices);

/// L^2(mu) projection of target onto span{L_nu : nu in indices}.
LegendreExpansion project(const quad::Integrand& target, int k, std::span<const MultiIndex> indices,
                          const ProjectionBudget& budget = {});

/// Evaluates e(y_[k-1], t) as a Legendre series in t for a fixed prefix y_[k-1].
class SliceEvaluator {
public:
    explicit SliceEvaluator(const LegendreExpansion& e);

    int dim() const { return k_; }
    /// Largest nu_k in the expansion.
    int slice_degree() const { return last_degree_; }
    /// beta[0..slice_degree()]: the Legendre coefficients in t. prefix has k-1 entries.
    void slice_coefficients(std::span<const double> prefix, std::span<double> beta) const;
    std::vector<double> slice_coefficients(std::span<const double> prefix) const;

    /// Coefficients of the prefix-averaged square int_{U_{k-1}} e(y, t)^2 dmu(y) as a Legendre
    /// series in t; computed from the per-prefix-index slices via orthonormality.
    std::vector<double> averaged_square() const;

private:
    struct Term {
        double coeff;
        int last;
        std::vector<int> prefix;
    };
    int k_;
    int last_degree_ = 0;
    std::vector<int> prefix_degree_;
    std::vector<Term> terms_;
};

/// Legendre coefficients of q(t)^2 (degree 2D) for q = sum_n beta_n L_n, linearized exactly
/// by an (2D+1)-node Gauss rule.
std::vector<double> square_legendre_series(std::span<const double> beta);

double legendre_series_eval(std::span<const double> coeffs, double x);
/// int_{-1}^{y} sum_n g_n L_n(t) dmu(t), exact via P_{n+1} - P_{n-1} antiderivatives.
double legendre_series_partial_integral(std::span<const double> coeffs, double y);

/// (p_k(y_[k-1], t) + 1)^2 as a Legendre series in t for each prefix.
class SquaredSliceMarginal {
public:
    explicit SquaredSliceMarginal(const LegendreExpansion& p_plus_one) : slices_(p_plus_one) {}

    int dim() const { return slices_.dim(); }
    int degree() const { return 2 * slices_.slice_degree(); }
    std::vector<double> operator()(std::span<const double> prefix) const {
        return square_legendre_series(slices_.slice_coefficients(prefix));
    }
    const SliceEvaluator& slices() const { return slices_; }

private:
    SliceEvaluator slices_;
};

SquaredSliceMarginal squared_slice_marginal(const LegendreExpansion& p_plus_one);

} // namespace krt
