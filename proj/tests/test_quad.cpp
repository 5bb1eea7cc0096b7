#include <doctest.h>

#include <cmath>

#include "krt/errors.hpp"
#include "krt/quad.hpp"
#include "support.hpp"

using namespace krt;
using namespace krt::quad;

TEST_CASE("gauss_legendre small rules") {
    const auto r1 = gauss_legendre(1);
    REQUIRE(r1.size() == 1);
    CHECK(r1.nodes[0] == 0.0);
    CHECK(r1.weights[0] == 1.0);

    const auto r2 = gauss_legendre(2);
    CHECK(r2.nodes[0] == doctest::Approx(-0.5773503).epsilon(1e-7));
    CHECK(r2.nodes[1] == doctest::Approx(0.5773503).epsilon(1e-7));
    CHECK(r2.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r2.weights[1] == doctest::Approx(0.5).epsilon(1e-14));

    const auto r3 = gauss_legendre(3);
    CHECK(std::abs(r3.apply([](double x) { return x * x * x * x; }) - 0.2) < 1e-15);
}

TEST_CASE("gauss_legendre rejects node counts outside [1, 256]") {
    CHECK_THROWS_AS(gauss_legendre(0), CapabilityError);
    CHECK_THROWS_AS(gauss_legendre(257), CapabilityError);
    CHECK_NOTHROW(gauss_legendre(256));
}

TEST_CASE("rule invariants: weights, ordering, symmetry, exactness") {
    for (int n : {1, 2, 3, 5, 8, 10, 17, 64, 128, 256}) {
        CAPTURE(n);
        const auto r = gauss_legendre(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(r.weights[i] > 0.0);
            CHECK(r.nodes[i] > -1.0);
            CHECK(r.nodes[i] < 1.0);
            if (i) CHECK(r.nodes[i] > r.nodes[i - 1]);
            CHECK(r.nodes[i] == -r.nodes[r.size() - 1 - i]);
            sum += r.weights[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-14);
    }
    // Monomials x^k, k <= 2n - 1, against the moments of mu.
    for (int n = 1; n <= 10; ++n) {
        const auto r = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            const double exact = k % 2 ? 0.0 : 1.0 / (k + 1);
            CHECK(std::abs(r.apply([k](double x) { return std::pow(x, k); }) - exact) < 1e-14);
        }
    }
}

TEST_CASE("nodes match the Legendre roots to 1e-14") {
    for (int n : {7, 40, 200}) {
        const auto r = gauss_legendre(n);
        for (double x : r.nodes) CHECK(std::abs(testing::classical_legendre(n, x)) < 1e-12);
    }
}

TEST_CASE("integrate examples") {
    const Integrand one = [](std::span<const double>) { return 1.0; };
    for (int k : {1, 3, 6}) CHECK(integrate(one, k, TensorScheme{4}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate(one, 9, MonteCarloScheme{3, 5000}) == 1.0);

    const Integrand xy = [](std::span<const double> y) { return y[0] * y[1]; };
    CHECK(std::abs(integrate(xy, 2, TensorScheme{4})) < 1e-16);

    const Integrand sq = [](std::span<const double> y) { return y[0] * y[0] * y[1] * y[1] * y[2] * y[2]; };
    CHECK(std::abs(integrate(sq, 3, TensorScheme{4}) - 1.0 / 27.0) < 1e-15);
}

TEST_CASE("tensor scheme beyond the threshold is a capability error") {
    const Integrand one = [](std::span<const double>) { return 1.0; };
    CHECK_THROWS_AS(integrate(one, 7, TensorScheme{2}), CapabilityError);
    CHECK_THROWS_AS(integrate(one, 3, TensorScheme{2}, 2), CapabilityError);
}

TEST_CASE("property: tensor rules are exact on random tensor polynomials") {
    auto g = testing::rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = testing::integer(g, 1, 4);
        const int n = testing::integer(g, 1, 5);
        // f(y) = prod_j sum_m a_jm y_j^m with degree <= 2n - 1 per coordinate.
        std::vector<std::vector<double>> a(k, std::vector<double>(2 * n));
        double exact = 1.0;
        for (int j = 0; j < k; ++j) {
            double factor = 0.0;
            for (int m = 0; m < 2 * n; ++m) {
                a[j][m] = testing::uniform(g);
                if (m % 2 == 0) factor += a[j][m] / (m + 1);
            }
            exact *= factor;
        }
        const Integrand f = [&](std::span<const double> y) {
            double v = 1.0;
            for (int j = 0; j < k; ++j) {
                double s = 0.0;
                for (int m = 2 * n - 1; m >= 0; --m) s = s * y[j] + a[j][m];
                v *= s;
            }
            return v;
        };
        CAPTURE(k);
        CAPTURE(n);
        CHECK(std::abs(integrate(f, k, TensorScheme{n}) - exact) < 1e-13);
    }
}

TEST_CASE("Monte Carlo is reproducible and seeds agree within 4 standard errors") {
    const Integrand f = [](std::span<const double> y) { return std::exp(0.5 * y[0] + 0.3 * y[1] * y[2]); };
    const auto a = integrate_with_error(f, 8, MonteCarloScheme{1, 40000});
    const auto a2 = integrate_with_error(f, 8, MonteCarloScheme{1, 40000});
    const auto b = integrate_with_error(f, 8, MonteCarloScheme{2, 40000});
    CHECK(a.value == a2.value);
    CHECK(a.std_error > 0.0);
    CHECK(std::abs(a.value - b.value) <= 4.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("TensorGrid flat layout") {
    const TensorGrid grid({gauss_legendre(2), gauss_legendre(3)});
    CHECK(grid.size() == 6);
    std::vector<int> idx(2);
    grid.unflatten(4, idx);
    CHECK(idx[0] == 1);
    CHECK(idx[1] == 1);
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) total += grid.weight(i);
    CHECK(total == doctest::Approx(1.0));
}
