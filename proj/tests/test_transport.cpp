#include <doctest.h>

#include <cmath>
#include <sstream>

#include "krt/errors.hpp"
#include "krt/quad.hpp"
#include "krt/transport.hpp"
#include "support.hpp"

using namespace krt;

namespace {
const BasisDecay decay = BasisDecay::algebraic(1.0, 3.0, 0.4);

DensityModel posterior(int d) {
    return posterior_model(PosteriorModel::with_noise_variance(sensor_forward_map(decay, 1), {0.5}, 0.5), decay, d);
}

IndexSetFamily family(double eps, int d) {
    return build_index_sets(WeightSequence::from_decay(decay, 1.0, required_j_max(decay, 1.0, eps)), eps, d);
}

RationalComponent random_component(std::mt19937_64& g, int k, NormalizationMode mode) {
    LegendreExpansion e(k);
    e.set(MultiIndex::zeros(k), 1.0);
    for (int t = 0; t < 5; ++t) {
        std::vector<int> nu(k);
        for (int& v : nu) v = testing::integer(g, 0, 3);
        e.add(MultiIndex(nu), 0.25 * testing::uniform(g));
    }
    return RationalComponent(e, mode);
}
} // namespace

TEST_CASE("identity component") {
    const auto c = RationalComponent::identity(2);
    CHECK(c.is_identity());
    for (double t : {-1.0, -0.3, 0.0, 0.8, 1.0}) {
        const std::vector<double> y{0.4, t};
        CHECK(eval_component(c, y) == doctest::Approx(t).epsilon(1e-15));
        CHECK(eval_component_derivative(c, y) == 1.0);
    }
}

TEST_CASE("eval_component against the antiderivative") {
    LegendreExpansion e(1);
    e.set({0}, 1.0);
    e.set({1}, 0.2);
    const RationalComponent c(e);
    // (1 + a s)^2 with a = 0.2 sqrt 3; F(t) = ((1 + a t)^3 - (1 - a)^3) / (6 a).
    const double a = 0.2 * std::sqrt(3.0);
    auto F = [a](double t) { return (std::pow(1 + a * t, 3) - std::pow(1 - a, 3)) / (6 * a); };
    CHECK(std::abs(c(std::vector<double>{0.0}) - (-1.0 + 2.0 * F(0.0) / F(1.0))) < 1e-12);
    CHECK(c(std::vector<double>{1.0}) == 1.0);
    CHECK(c(std::vector<double>{-1.0}) == -1.0);
    CHECK_THROWS_AS(c(std::vector<double>{0.0, 0.0}), DomainError);
}

TEST_CASE("property: derivative is consistent and integrates to one") {
    auto g = testing::rng(41);
    for (auto mode : {NormalizationMode::Slice, NormalizationMode::Averaged}) {
        for (int trial = 0; trial < 15; ++trial) {
            const int k = testing::integer(g, 1, 3);
            const auto c = random_component(g, k, mode);
            auto y = testing::point(g, k);
            y[k - 1] = std::clamp(y[k - 1], -0.99, 0.99);
            const double h = 1e-5;
            auto a = y, b = y;
            a[k - 1] -= h;
            b[k - 1] += h;
            CHECK(std::abs((c(b) - c(a)) / (2 * h) - c.derivative(y)) < 1e-6);
            auto slice = [&](double t) {
                auto z = y;
                z[k - 1] = t;
                return c.derivative(z);
            };
            CHECK(0.5 * quad::integrate_interval(slice, -1.0, 1.0, 30) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: endpoint exactness and strict interior monotonicity") {
    auto g = testing::rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = testing::integer(g, 1, 4);
        const auto c = random_component(g, k, NormalizationMode::Slice);
        auto y = testing::point(g, k);
        y[k - 1] = -1.0;
        CHECK(c(y) == -1.0);
        y[k - 1] = 1.0;
        CHECK(c(y) == 1.0);
        double previous = -1.0;
        for (int i = 1; i <= 64; ++i) {
            y[k - 1] = -1.0 + 2.0 * i / 65.0;
            const double v = c(y);
            CHECK(v > previous);
            CHECK(c.derivative(y) > 0.0);
            previous = v;
        }
    }
}

TEST_CASE("averaged mode ignores the prefix") {
    auto g = testing::rng(43);
    const auto c = random_component(g, 3, NormalizationMode::Averaged);
    const double a = c(std::vector<double>{0.1, -0.5, 0.3});
    const double b = c(std::vector<double>{-0.9, 0.7, 0.3});
    CHECK(a == b);
}

TEST_CASE("build_component examples") {
    const ExactTransport same(posterior(2), posterior(2));
    const std::vector<MultiIndex> lam{{0, 0}, {1, 0}, {0, 1}, {2, 1}};
    const auto c = build_component(same, 2, lam);
    for (const auto& [nu, v] : c.p_plus_one().coefficients())
        CHECK(std::abs(v - (nu == MultiIndex{0, 0} ? 1.0 : 0.0)) < 1e-10);

    const ExactTransport tilt(uniform_model(1), tilt_model({0.5}, 1));
    CHECK(build_component(tilt, 1, {}).is_identity());
}

TEST_CASE("degree-six tilt component against the closed form") {
    const ExactTransport tilt(uniform_model(1), tilt_model({0.5}, 1));
    std::vector<MultiIndex> lam;
    for (int n = 0; n <= 6; ++n) lam.push_back(MultiIndex{n});
    const auto c = build_component(tilt, 1, lam);
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double y = -1.0 + 0.02 * i;
        worst = std::max(worst, std::abs(c(std::vector<double>{y}) - testing::tilt_map(0.5, y)));
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("degree-three tilt component matches an independent projection") {
    // Reference values from an independent high-order Legendre projection of (1.25 + y)^(-1/4) - 1.
    const ExactTransport tilt(uniform_model(1), tilt_model({0.5}, 1));
    const std::vector<MultiIndex> lam{{0}, {1}, {2}, {3}};
    const auto c = build_component(tilt, 1, lam);
    CHECK(c.p_plus_one().coefficient({0}) == doctest::Approx(1.0 - 0.010957).epsilon(1e-5));
    CHECK(c.p_plus_one().coefficient({1}) == doctest::Approx(-0.139522).epsilon(1e-5));
    CHECK(c.p_plus_one().coefficient({2}) == doctest::Approx(0.044570).epsilon(1e-4));
    CHECK(c.p_plus_one().coefficient({3}) == doctest::Approx(-0.016851).epsilon(1e-4));
}

TEST_CASE("push and pull") {
    const auto id = ApproxTransport::identity(3);
    const std::vector<double> y{0.2, -0.7, 1.0};
    CHECK(id.push(y) == y);
    CHECK(id.pull(y) == y);

    const ExactTransport oracle(uniform_model(4), posterior(4));
    const auto T = build_transport(oracle, family(1e-3, 4), 1.0);
    auto g = testing::rng(44);
    double push_pull = 0.0, pull_push = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto p = testing::point(g, 4);
        const auto x = T.push(p);
        for (int k = 1; k <= 4; ++k) CHECK(x[k - 1] == T.value(k, p));
        const auto back = T.pull(x);
        const auto fwd = T.push(T.pull(p));
        for (int k = 0; k < 4; ++k) {
            push_pull = std::max(push_pull, std::abs(back[k] - p[k]));
            pull_push = std::max(pull_push, std::abs(fwd[k] - p[k]));
        }
    }
    CHECK(push_pull <= 1e-8);
    CHECK(pull_push <= 1e-8);

    std::vector<double> edge{1.0, -1.0, 1.0, -1.0, 0.3};
    const auto xe = T.push(edge);
    CHECK(xe[0] == 1.0);
    CHECK(xe[1] == -1.0);
    CHECK(xe[2] == 1.0);
    CHECK(xe[3] == -1.0);
    CHECK(xe[4] == 0.3);
}

TEST_CASE("closed-form tilt: pull inverts the closed form") {
    const ExactTransport tilt(uniform_model(1), tilt_model({0.5}, 1));
    std::vector<MultiIndex> lam;
    for (int n = 0; n <= 10; ++n) lam.push_back(MultiIndex{n});
    const ApproxTransport T({build_component(tilt, 1, lam)}, TransportInfo{1e-6, 1.0, 1});
    const std::vector<double> x{0.2360680};
    const double y = T.pull(x)[0];
    CHECK(std::abs(T.value(1, std::vector<double>{y}) - x[0]) < 1e-12);
    CHECK(std::abs(y) < 1e-5);
}

TEST_CASE("pushforward density") {
    const auto id = ApproxTransport::identity(2);
    const auto rho = tilt_model({0.3, -0.6}, 2);
    const std::vector<double> y{0.4, 0.1};
    CHECK(pushforward_density(id, rho, y) == rho(y));

    for (int d = 1; d <= 3; ++d) {
        const ExactTransport oracle(uniform_model(d), posterior(d));
        const auto T = build_transport(oracle, family(1e-2, d), 1.0);
        const quad::Integrand q = [&](std::span<const double> z) { return T.pushforward_density(oracle.reference(), z); };
        CHECK(std::abs(quad::integrate(q, d, quad::TensorScheme{40}) - 1.0) < 1e-8);
    }
}

TEST_CASE("pushforward density approaches the target on the tilt example") {
    const ExactTransport tilt(uniform_model(1), tilt_model({0.5}, 1));
    std::vector<double> gaps;
    for (int degree : {2, 5, 10}) {
        std::vector<MultiIndex> lam;
        for (int n = 0; n <= degree; ++n) lam.push_back(MultiIndex{n});
        const ApproxTransport T({build_component(tilt, 1, lam)}, TransportInfo{1.0, 1.0, 1});
        double gap = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const std::vector<double> x{-1.0 + 0.02 * i};
            gap = std::max(gap, std::abs(T.pushforward_density(tilt.reference(), x) - tilt.target()(x)));
        }
        gaps.push_back(gap);
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
    CHECK(gaps[2] <= 1e-2);
}

TEST_CASE("identity degeneracy for any index set") {
    const ExactTransport same(tilt_model({0.3, -0.2, 0.5}, 3), tilt_model({0.3, -0.2, 0.5}, 3));
    for (double eps : {1e-1, 1e-3}) {
        const auto T = build_transport(same, family(eps, 3), 1.0);
        auto g = testing::rng(45);
        for (int i = 0; i < 100; ++i) {
            const auto y = testing::point(g, 3);
            const auto x = T.push(y);
            for (int k = 0; k < 3; ++k) CHECK(std::abs(x[k] - y[k]) < 1e-10);
        }
    }
}

TEST_CASE("positivity guard falls back to the identity") {
    // A sharply peaked target makes sqrt(dT) - 1 poorly resolved at low degree.
    const auto pi = posterior_model(PosteriorModel::with_noise_variance(sensor_forward_map(decay, 1), {0.0}, 1e-4),
                                    decay, 1);
    const ExactTransport oracle(uniform_model(1), pi);
    std::vector<MultiIndex> lam;
    for (int n = 0; n <= 3; ++n) lam.push_back(MultiIndex{n});
    ComponentDiagnostics diag;
    const auto c = build_component(oracle, 1, lam, {}, &diag);
    CHECK(diag.warned);
    CHECK(diag.min_shifted <= 0.05);
    CHECK(diag.fell_back == (diag.min_shifted <= 0.0));
    CHECK(c.is_identity() == diag.fell_back);
}

TEST_CASE("transport text round trip is bit-stable") {
    const ExactTransport oracle(uniform_model(3), posterior(3));
    for (auto mode : {NormalizationMode::Slice, NormalizationMode::Averaged}) {
        BuildOptions opt;
        opt.mode = mode;
        const auto T = build_transport(oracle, family(1e-2, 3), 1.0, opt);
        std::stringstream ss;
        T.write(ss);
        const auto back = ApproxTransport::read(ss);
        CHECK(back.k_max() == T.k_max());
        CHECK(back.mode() == mode);
        CHECK(back.info().eps == T.info().eps);
        auto g = testing::rng(46);
        for (int i = 0; i < 50; ++i) {
            const auto y = testing::point(g, 3);
            CHECK(back.push(y) == T.push(y));
        }
    }
}

TEST_CASE("malformed transport files") {
    std::stringstream bad("# krt transport v1\neps 0.1\nalpha x\n");
    CHECK_THROWS_AS(ApproxTransport::read(bad), IoError);
    std::stringstream truncated("eps 0.1\nalpha 1\nd 2\nmode slice\nk_max 1\ncomponent 1 2\n0 1\n");
    CHECK_THROWS_AS(ApproxTransport::read(truncated), IoError);
    CHECK_THROWS_AS(ApproxTransport::load("/nonexistent/transport.txt"), IoError);
}
