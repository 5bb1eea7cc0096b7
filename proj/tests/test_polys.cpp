#include <doctest.h>

#include <cmath>
#include <sstream>

#include "krt/errors.hpp"
#include "krt/polys.hpp"
#include "krt/quad.hpp"
#include "support.hpp"

using namespace krt;

TEST_CASE("legendre_eval examples and bound") {
    CHECK(legendre_eval(0, 0.37) == 1.0);
    CHECK(legendre_eval(1, 1.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(legendre_eval(2, 0.0) == doctest::Approx(-0.5 * std::sqrt(5.0)).epsilon(1e-15));
    auto g = testing::rng(1);
    for (int i = 0; i < 500; ++i) {
        const int n = testing::integer(g, 0, 200);
        const double x = testing::uniform(g);
        CHECK(std::abs(legendre_eval(n, x)) <= std::sqrt(2.0 * n + 1.0) * (1 + 1e-12));
        if (n <= 40) CHECK(std::abs(legendre_eval(n, x) - std::sqrt(2.0 * n + 1) * testing::classical_legendre(n, x)) < 1e-11);
    }
    CHECK_THROWS_AS(legendre_eval(201, 0.0), DomainError);
}

TEST_CASE("orthonormality under exact-degree quadrature") {
    const auto rule = quad::gauss_legendre(21);
    for (int a = 0; a <= 20; ++a)
        for (int b = 0; b <= 20; ++b) {
            const double ip = rule.apply([&](double x) { return legendre_eval(a, x) * legendre_eval(b, x); });
            CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-13);
        }
}

TEST_CASE("expansion_eval examples") {
    LegendreExpansion e(2);
    const std::vector<double> y{1.0, 1.0};
    CHECK(expansion_eval(e, y) == 0.0);
    e.set({0, 0}, 2.0);
    CHECK(expansion_eval(e, std::vector<double>{0.3, -0.9}) == 2.0);
    LegendreExpansion f(2);
    f.set({1, 0}, 1.0);
    f.set({0, 1}, 1.0);
    CHECK(expansion_eval(f, y) == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-15));
    CHECK_THROWS_AS(expansion_eval(f, std::vector<double>{0.1}), DomainError);
    CHECK_THROWS_AS(f.set(MultiIndex{1}, 1.0), DomainError);
}

TEST_CASE("project examples") {
    const std::vector<MultiIndex> lam2{{2, 1}, {0, 0}};
    const auto zero = project([](std::span<const double>) { return 0.0; }, 2, lam2);
    for (const auto& [nu, c] : zero.coefficients()) CHECK(c == 0.0);

    const auto e = project([](std::span<const double> y) { return legendre_eval(2, y[0]) * legendre_eval(1, y[1]); }, 2,
                           lam2);
    CHECK(std::abs(e.coefficient({2, 1}) - 1.0) < 1e-12);
    CHECK(std::abs(e.coefficient({0, 0})) < 1e-12);

    const std::vector<MultiIndex> lam1{{0}, {1}, {2}};
    const auto sq = project([](std::span<const double> y) { return y[0] * y[0]; }, 1, lam1);
    CHECK(std::abs(sq.coefficient({0}) - 1.0 / 3.0) < 1e-14);
    CHECK(std::abs(sq.coefficient({1})) < 1e-14);
    CHECK(std::abs(sq.coefficient({2}) - 2.0 / (3.0 * std::sqrt(5.0))) < 1e-14);
}

TEST_CASE("Monte Carlo projection beyond the tensor threshold") {
    const std::vector<MultiIndex> lam{MultiIndex::zeros(7), MultiIndex{1, 0, 0, 0, 0, 0, 0}};
    ProjectionBudget budget;
    budget.monte_carlo = quad::MonteCarloScheme{9, 200000};
    const auto e = project([](std::span<const double> y) { return 1.0 + y[0]; }, 7, lam, budget);
    CHECK(e.coefficient(MultiIndex::zeros(7)) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(e.coefficient(MultiIndex{1, 0, 0, 0, 0, 0, 0}) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(0.02));
}

TEST_CASE("property: Parseval for random expansions") {
    auto g = testing::rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = testing::integer(g, 1, 3);
        LegendreExpansion e(k);
        const int terms = testing::integer(g, 1, 8);
        for (int t = 0; t < terms; ++t) {
            std::vector<int> nu(k);
            for (int& v : nu) v = testing::integer(g, 0, 5);
            e.set(MultiIndex(nu), testing::uniform(g));
        }
        double sum = 0.0;
        for (const auto& [nu, c] : e.coefficients()) sum += c * c;
        const quad::Integrand sq = [&](std::span<const double> y) { return e(y) * e(y); };
        CHECK(std::abs(quad::integrate(sq, k, quad::TensorScheme{6}) - sum) < 1e-10);
        CHECK(e.l2_norm() == doctest::Approx(std::sqrt(sum)));
    }
}

TEST_CASE("coefficient decay of an analytic function is geometric") {
    std::vector<MultiIndex> lam;
    for (int n = 0; n <= 15; ++n) lam.push_back(MultiIndex{n});
    const auto e = project([](std::span<const double> y) { return 1.0 / (2.0 + y[0]); }, 1, lam);
    // Least squares of log|l_n| against n.
    std::vector<double> xs, ys;
    for (int n = 0; n <= 15; ++n) {
        xs.push_back(n);
        ys.push_back(std::log(std::abs(e.coefficient(MultiIndex{n}))));
    }
    const double mx = 7.5;
    double my = 0.0;
    for (double v : ys) my += v / 16.0;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < 16; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double r2 = sxy * sxy / (sxx * syy);
    CHECK(slope < 0.0);                                             // |l_n| <= C (1 + delta)^-n
    CHECK(std::exp(-slope) == doctest::Approx(2.0 + std::sqrt(3.0)).epsilon(0.05));  // Bernstein ellipse
    CHECK(r2 >= 0.999);
}

TEST_CASE("squared slice marginal") {
    LegendreExpansion one(1);
    one.set({0}, 1.0);
    const auto g1 = squared_slice_marginal(one)(std::span<const double>{});
    CHECK(g1[0] == doctest::Approx(1.0));
    for (std::size_t n = 1; n < g1.size(); ++n) CHECK(g1[n] == 0.0);

    const double c = 0.37;
    LegendreExpansion p(1);
    p.set({0}, 1.0);
    p.set({1}, c);
    const auto g = squared_slice_marginal(p)(std::span<const double>{});
    CHECK(g[0] == doctest::Approx(1.0 + c * c).epsilon(1e-15));

    LegendreExpansion q(2);
    q.set({0, 0}, 1.0);
    q.set({0, 1}, 0.5);
    const auto sq = squared_slice_marginal(q);
    for (double prefix : {-0.8, 0.0, 0.6}) {
        const auto gq = sq(std::vector<double>{prefix});
        CHECK(gq[0] == doctest::Approx(1.25).epsilon(1e-15));
    }
}

TEST_CASE("property: squared slices reproduce (p + 1)^2 pointwise") {
    auto g = testing::rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = testing::integer(g, 1, 3);
        LegendreExpansion e(k);
        for (int t = 0; t < 6; ++t) {
            std::vector<int> nu(k);
            for (int& v : nu) v = testing::integer(g, 0, 4);
            e.set(MultiIndex(nu), testing::uniform(g));
        }
        const auto sq = squared_slice_marginal(e);
        const auto y = testing::point(g, k);
        const auto coeffs = sq(std::span<const double>(y).first(k - 1));
        CHECK(legendre_series_eval(coeffs, y[k - 1]) == doctest::Approx(e(y) * e(y)).epsilon(1e-12));
        CHECK(std::abs(legendre_series_partial_integral(coeffs, 1.0) - coeffs[0]) < 1e-14);
        // Partial integral against quadrature on [-1, y_k].
        const double t = y[k - 1];
        auto slice = [&](double s) {
            auto z = y;
            z[k - 1] = s;
            return e(z) * e(z);
        };
        CHECK(legendre_series_partial_integral(coeffs, t) ==
              doctest::Approx(0.5 * quad::integrate_interval(slice, -1.0, t, 20)).epsilon(1e-12));
    }
}

TEST_CASE("averaged square integrates the prefix out") {
    LegendreExpansion e(2);
    e.set({0, 0}, 1.0);
    e.set({1, 1}, 0.3);
    e.set({0, 2}, -0.2);
    const auto avg = SliceEvaluator(e).averaged_square();
    for (double t : {-0.7, 0.1, 0.9}) {
        auto f = [&](double s) {
            const double v = e(std::vector<double>{s, t});
            return v * v;
        };
        CHECK(legendre_series_eval(avg, t) == doctest::Approx(0.5 * quad::integrate_interval(f, -1.0, 1.0, 10)));
    }
}

TEST_CASE("expansion text round trip is bit-exact") {
    LegendreExpansion e(3);
    e.set({0, 0, 0}, 1.0 / 3.0);
    e.set({2, 0, 1}, -std::sqrt(2.0) * 1e-7);
    e.set({0, 4, 0}, 12345.678901234567);
    std::stringstream ss;
    e.write(ss);
    const auto back = LegendreExpansion::read(ss, 3, e.size());
    CHECK(back.coefficients() == e.coefficients());
}

TEST_CASE("multi-index keeps trailing zeros") {
    const MultiIndex a{1, 0};
    const MultiIndex b{1};
    CHECK(a.size() == 2);
    CHECK(a != b);
    CHECK(MultiIndex{0, 1}.dominated_by(MultiIndex{1, 1}));
    CHECK_FALSE(MultiIndex{2, 0}.dominated_by(MultiIndex{1, 1}));
    CHECK_THROWS_AS(MultiIndex({1, -1}), DomainError);
}
