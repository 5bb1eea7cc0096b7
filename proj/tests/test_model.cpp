#include <doctest.h>

#include <cmath>
#include <numbers>

#include "krt/errors.hpp"
#include "krt/model.hpp"
#include "krt/quad.hpp"
#include "support.hpp"

using namespace krt;

namespace {
DensityModel linear_posterior(double weight, int d) {
    // m = 1, forward map 0.5 y_1, unit noise, zero data.
    ForwardMap fm;
    fm.m = 1;
    fm.coefficient = [weight](int, int j) { return j == 1 ? weight : 0.0; };
    fm.apply = [weight](std::span<const double> y, std::span<double> out) { out[0] = y.empty() ? 0.0 : weight * y[0]; };
    auto pm = PosteriorModel::with_noise_variance(fm, {0.0}, 1.0);
    return posterior_model(pm, BasisDecay::algebraic(1.0, 3.0, 0.4), d);
}

DensityModel sensor_posterior(int d, int m = 1) {
    const auto decay = BasisDecay::algebraic(1.0, 3.0, 0.4);
    std::vector<double> data(m, 0.5);
    return posterior_model(PosteriorModel::with_noise_variance(sensor_forward_map(decay, m), data, 0.5), decay, d);
}

double tensor_mass(const DensityModel& f, int nodes) {
    const quad::Integrand g = [&](std::span<const double> y) { return f(y); };
    return quad::integrate(g, f.dim(), quad::TensorScheme{nodes});
}
} // namespace

TEST_CASE("eval_density examples") {
    const auto u = uniform_model(2);
    CHECK(eval_density(u, std::vector<double>{0.3, -0.7}) == 1.0);
    const auto t = tilt_model({0.5}, 1);
    CHECK(eval_density(t, std::vector<double>{0.5}) == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("posterior normalization against a Riemann sum") {
    const auto f = linear_posterior(0.5, 1);
    // Z = int exp(-(0.5 y)^2 / 2) dmu.
    const int n = 1000000;
    double riemann = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = -1.0 + (i + 0.5) * 2.0 / n;
        riemann += std::exp(-0.125 * y * y);
    }
    riemann /= n;
    CHECK(std::abs(f.normalization() - riemann) < 1e-8);
    const double z64 = quad::gauss_legendre(64).apply([](double y) { return std::exp(-0.125 * y * y); });
    CHECK(std::abs(f.normalization() - z64) < 1e-12);
    CHECK(std::abs(tensor_mass(f, 64) - 1.0) < 1e-12);
    CHECK(f.unnormalized(std::vector<double>{1.0}) == doctest::Approx(std::exp(-0.125)));
}

TEST_CASE("eval_density errors") {
    const auto u = uniform_model(2);
    CHECK_THROWS_AS(u(std::vector<double>{0.1, 1.5}), DomainError);
    CHECK_THROWS_AS(u(std::vector<double>{0.1}), DomainError);
    const DensityModel bad("nan", [](std::span<const double> y) { return y[0] > 0.5 ? NAN : 1.0; },
                           [](int) { return DensityBounds{1.0, 1.0}; }, BasisDecay{}, ProductTilt{}, 1);
    CHECK_THROWS_AS(bad(std::vector<double>{0.9}), ModelError);
}

TEST_CASE("truncate examples") {
    const auto u5 = truncate(uniform_model(3), 5);
    CHECK(u5.dim() == 5);
    CHECK(u5.normalization() == 1.0);
    const auto t = truncate(tilt_model({0.5, 0.25}, 4), 2);
    CHECK(t.normalization() == 1.0);
    CHECK(t(std::vector<double>{0.2, -0.4}) == doctest::Approx(1.1 * 0.9));
    CHECK_THROWS_AS(truncate(u5, 0), DomainError);
}

TEST_CASE("normalization of an unstructured model") {
    auto raw = [](std::span<const double> y) { return 2.0 + y[0] * y[y.size() - 1]; };
    auto bounds = [](int) { return DensityBounds{1.0, 3.0}; };
    const DensityModel f3("plain", raw, bounds, BasisDecay{}, std::monostate{}, 3);
    CHECK(f3.normalization() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(DensityModel("plain", raw, bounds, BasisDecay{}, std::monostate{}, 7), CapabilityError);
}

TEST_CASE("built-in models integrate to one") {
    // 32-node rules up to d = 4, 16 nodes for d = 5 and 6 (32^6 points exceed the desk budget).
    for (int d = 1; d <= 6; ++d) {
        CAPTURE(d);
        const int nodes = d <= 4 ? 32 : 16;
        CHECK(std::abs(tensor_mass(uniform_model(d), nodes) - 1.0) < 1e-10);
        CHECK(std::abs(tensor_mass(tilt_model({0.5, -0.3, 0.2, 0.7, -0.1, 0.4}, d), nodes) - 1.0) < 1e-10);
        CHECK(std::abs(tensor_mass(sensor_posterior(d), nodes) - 1.0) < 1e-10);
        if (d <= 4) CHECK(std::abs(tensor_mass(sensor_posterior(d, 3), nodes) - 1.0) < 1e-10);
    }
}

TEST_CASE("property: densities stay above the lower bound") {
    auto g = testing::rng(5);
    for (const auto& f : {tilt_model({0.5, -0.3, 0.2}, 3), sensor_posterior(4), sensor_posterior(3, 2)}) {
        const auto b = f.bounds();
        CHECK(b.lower > 0.0);
        CHECK(b.lower <= b.upper);
        double lowest = INFINITY, highest = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double v = f(testing::point(g, f.dim()));
            lowest = std::min(lowest, v);
            highest = std::max(highest, v);
        }
        CHECK(lowest >= b.lower - 1e-12);
        CHECK(highest <= b.upper + 1e-12);
    }
}

TEST_CASE("truncation consistency of the posterior") {
    auto g = testing::rng(17);
    std::vector<std::vector<double>> sample;
    for (int i = 0; i < 100; ++i) sample.push_back(testing::point(g, 6));
    std::vector<double> gaps;
    for (int d : {2, 4, 6}) {
        const auto fd = sensor_posterior(d);
        const auto fd2 = sensor_posterior(d + 2);
        double gap = 0.0;
        for (const auto& y : sample) {
            std::vector<double> head(y.begin(), y.begin() + d);
            std::vector<double> padded = head;
            padded.resize(d + 2, 0.0);
            gap = std::max(gap, std::abs(fd(head) - fd2(padded)));
        }
        gaps.push_back(gap);
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
}

TEST_CASE("posterior precision must be symmetric positive definite") {
    const auto decay = BasisDecay::algebraic(1.0, 3.0, 0.4);
    PosteriorModel pm{sensor_forward_map(decay, 2), {0.0, 0.0}, Eigen::MatrixXd::Identity(2, 2)};
    pm.noise_precision(0, 1) = 0.5;
    CHECK_THROWS_AS(posterior_model(pm, decay, 2), DomainError);
    pm.noise_precision(1, 0) = 0.5;
    CHECK_NOTHROW(posterior_model(pm, decay, 2));
    pm.noise_precision(0, 1) = pm.noise_precision(1, 0) = 2.0;
    CHECK_THROWS_AS(posterior_model(pm, decay, 2), DomainError);
    CHECK_THROWS_AS(PosteriorModel::with_noise_variance(sensor_forward_map(decay, 1), {0.0}, 0.0), DomainError);
}

TEST_CASE("sensor forward map with one sensor is the weighted sum") {
    const auto decay = BasisDecay::algebraic(1.0, 3.0, 0.4);
    const auto fm = sensor_forward_map(decay, 1);
    const std::vector<double> y{0.3, -0.2, 0.9};
    double out = 0.0;
    fm.apply(y, std::span<double>(&out, 1));
    CHECK(out == doctest::Approx(0.3 - 0.2 / 8.0 + 0.9 / 27.0));
}

TEST_CASE("basis decay") {
    const auto d = BasisDecay::algebraic(2.0, 3.0, 0.4);
    CHECK(d.b(2) == doctest::Approx(0.25));
    CHECK(d.summable());
    CHECK_FALSE(BasisDecay::algebraic(1.0, 2.0, 0.4).summable());
    for (int j = 1; j < 50; ++j) CHECK(d.b(j + 1) <= d.b(j));
    CHECK_THROWS_AS(BasisDecay::algebraic(1.0, 3.0, 1.5), DomainError);
    const auto e = BasisDecay::explicit_values({0.5, 0.25}, 0.5);
    CHECK_THROWS_AS(e.b(3), CapabilityError);
}
