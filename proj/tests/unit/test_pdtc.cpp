#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "prts/numerics.hpp"
#include "prts/pdtc.hpp"

using namespace prts;

namespace {

// Independent rejection sampler for oracle use: plain normal draws mapped
// through exp, rejecting values above 1 (does not share code with Sampler).
std::vector<double> oracle_draws(const ChannelPdtc& ch, std::size_t n,
                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        const double eta =
            std::exp(ch.log_location() + ch.sigma() * normal(rng));
        if (eta <= 1.0) out.push_back(eta);
    }
    return out;
}

}  // namespace

TEST_CASE("construction rejects out-of-range parameters") {
    CHECK_THROWS_AS(ChannelPdtc(0.0, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(ChannelPdtc(1.0, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(ChannelPdtc(-0.1, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(ChannelPdtc(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ChannelPdtc(0.5, 3.5), std::invalid_argument);
    CHECK_NOTHROW(ChannelPdtc(0.5, 3.0));
}

TEST_CASE("pdf matches the closed-form log-normal mode density") {
    const ChannelPdtc ch(1e-3, 0.7);
    const double s = ch.sigma();
    const double mode = ch.eta0() * std::exp(-1.5 * s * s);
    const double expected =
        std::exp(-0.5 * s * s) / (std::sqrt(2.0 * M_PI) * s * mode);
    CHECK(ch.pdf(mode) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(ch.pdf(0.0), std::domain_error);
    CHECK_THROWS_AS(ch.pdf(-1e-3), std::domain_error);
}

TEST_CASE("density normalizes and has mean eta0 (adaptive quadrature oracle)") {
    const ChannelPdtc ch(std::pow(10.0, -3.7), 0.9);
    // integrate over u = ln(eta): the integrand is a plain Gaussian there
    const double m = ch.log_location();
    const double s = ch.sigma();
    QuadratureOptions opt;
    opt.rel_tol = 1e-11;
    const double lo = m - 16.0 * s, hi = m + 16.0 * s;
    const double norm = integrate(
        [&](double u) {
            const double eta = std::exp(u);
            return ch.pdf(eta) * eta;  // deta = eta du
        },
        lo, hi, {}, opt);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
    const double mean = integrate(
        [&](double u) {
            const double eta = std::exp(u);
            return eta * ch.pdf(eta) * eta;
        },
        lo, hi, {}, opt);
    CHECK(mean == doctest::Approx(ch.eta0()).epsilon(1e-9));
}

TEST_CASE("normalization and mean hold across parameter draws") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> loss(10.0, 45.0), sig(0.1, 2.5);
    for (int i = 0; i < 20; ++i) {
        const ChannelPdtc ch(std::pow(10.0, -loss(rng) / 10.0), sig(rng));
        const double m = ch.log_location(), s = ch.sigma();
        QuadratureOptions opt;
        opt.rel_tol = 1e-11;
        const double norm = integrate(
            [&](double u) { return ch.pdf(std::exp(u)) * std::exp(u); },
            m - 16.0 * s, m + 16.0 * s, {}, opt);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
        const double mean = integrate(
            [&](double u) {
                const double eta = std::exp(u);
                return eta * ch.pdf(eta) * eta;
            },
            m - 18.0 * s, m + 18.0 * s, {}, opt);
        CHECK(mean == doctest::Approx(ch.eta0()).epsilon(1e-9));
    }
}

TEST_CASE("pass_fraction agrees with direct quadrature of the density") {
    const ChannelPdtc ch(std::pow(10.0, -3.7), 0.9);
    const double eta_T = 0.00020;
    const double via_quadrature = integrate(
        [&](double u) {
            const double eta = std::exp(u);
            return ch.pdf(eta) * eta;
        },
        std::log(eta_T), 0.0, {}, QuadratureOptions{1e-11, 1e-20, 4000});
    CHECK(ch.pass_fraction(eta_T) ==
          doctest::Approx(via_quadrature).epsilon(1e-9));

    CHECK(ch.pass_fraction(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(1.0 - ch.pass_fraction(0.0) < 1e-12);  // mass above 1 negligible here
    CHECK(ch.pass_fraction(1.0) == 0.0);
    CHECK_THROWS_AS(ch.pass_fraction(-0.1), std::domain_error);
    CHECK_THROWS_AS(ch.pass_fraction(1.1), std::domain_error);
}

TEST_CASE("pass_fraction and truncated_mean are monotone in the threshold") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> loss(15.0, 45.0), sig(0.2, 1.5),
        tmul(0.0, 8.0);
    for (int i = 0; i < 100; ++i) {
        const ChannelPdtc ch(std::pow(10.0, -loss(rng) / 10.0), sig(rng));
        const double t1 = tmul(rng) * ch.eta0();
        const double t2 = t1 * 1.5 + 1e-6;
        if (t2 >= 1.0 || ch.pass_fraction(t2) < 1e-12) continue;
        CHECK(ch.pass_fraction(t2) <= ch.pass_fraction(t1));
        CHECK(ch.truncated_mean(t2) >= ch.truncated_mean(t1));
        CHECK(ch.truncated_mean(t1) >= t1);
        CHECK(ch.truncated_mean(t1) <= 1.0);
    }
}

TEST_CASE("truncated_mean(0) recovers the full mean") {
    const ChannelPdtc ch(1e-3, 0.9);
    CHECK(ch.truncated_mean(0.0) == doctest::Approx(1e-3).epsilon(1e-9));
}

TEST_CASE("truncated_mean against a 1e7-draw Monte Carlo oracle") {
    const ChannelPdtc ch(std::pow(10.0, -2.9), 0.6);
    const double eta_T = 0.0012;
    const auto draws = oracle_draws(ch, 10000000, 20240601);
    double sum = 0.0, sum2 = 0.0;
    std::size_t kept = 0;
    for (double eta : draws) {
        if (eta >= eta_T) {
            sum += eta;
            sum2 += eta * eta;
            ++kept;
        }
    }
    REQUIRE(kept > 1000);
    const double mc_mean = sum / kept;
    const double mc_var = sum2 / kept - mc_mean * mc_mean;
    const double se = std::sqrt(mc_var / kept);
    CHECK(std::abs(ch.truncated_mean(eta_T) - mc_mean) < 3.0 * se);
}

TEST_CASE("truncated_mean errors out on degenerate selection") {
    const ChannelPdtc ch(1e-4, 0.3);
    CHECK_THROWS_AS(ch.truncated_mean(0.9), std::runtime_error);
}

TEST_CASE("sampler determinism, law of large numbers, pass fraction") {
    const ChannelPdtc ch(std::pow(10.0, -2.9), 0.6);
    const auto a = sample(ch, 10000, 42);
    const auto b = sample(ch, 10000, 42);
    CHECK(a.samples == b.samples);  // same seed, identical stream
    const auto c = sample(ch, 10000, 43);
    CHECK(a.samples != c.samples);

    const std::size_t n = 10000000;
    const auto s = sample(ch, n, 77);
    double sum = 0.0, sum2 = 0.0;
    std::size_t above = 0;
    const double eta_T = 0.0012;
    for (double eta : s.samples) {
        sum += eta;
        sum2 += eta * eta;
        if (eta >= eta_T) ++above;
        CHECK(eta > 0.0);
        CHECK(eta <= 1.0);
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - ch.eta0()) < 4.0 * std::sqrt(var / n));

    const double frac = ch.pass_fraction(eta_T);
    const double se_frac = std::sqrt(frac * (1.0 - frac) / n);
    CHECK(std::abs(double(above) / n - frac) < 4.0 * se_frac);
}

TEST_CASE("sampler empirical CDF passes a Kolmogorov-Smirnov test at 1%") {
    const ChannelPdtc ch(1e-3, 0.9);
    const std::size_t n = 1000000;
    auto s = sample(ch, n, 5);
    std::sort(s.samples.begin(), s.samples.end());
    // analytic CDF conditioned on eta <= 1 (the sampler resamples above 1)
    const double c1 = ch.cdf(1.0);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double F = ch.cdf(s.samples[i]) / c1;
        d = std::max(d, std::abs(F - double(i + 1) / n));
        d = std::max(d, std::abs(F - double(i) / n));
    }
    const double crit_1pct = 1.62762 / std::sqrt(double(n));
    CHECK(d < crit_1pct);
}

TEST_CASE("rytov sigma: power law and frozen direct evaluation") {
    // direct evaluation of sqrt(1.23 cn2 k^(7/6) L^(11/6)) for
    // cn2 = 1e-15, lambda = 800 nm (k = 2 pi / lambda), L = 1e5
    const double k = 2.0 * M_PI / 800e-9;
    const double sigma = rytov_sigma({1e-15, k, 1e5});
    CHECK(sigma == doctest::Approx(14.139096324637107).epsilon(1e-12));

    // doubling L multiplies sigma^2 by 2^(11/6)
    const double s1 = rytov_sigma({1e-16, k, 5e4});
    const double s2 = rytov_sigma({1e-16, k, 1e5});
    CHECK(s2 * s2 / (s1 * s1) ==
          doctest::Approx(std::pow(2.0, 11.0 / 6.0)).epsilon(1e-12));

    CHECK_THROWS_AS(rytov_sigma({0.0, k, 1e5}), std::invalid_argument);
    CHECK_THROWS_AS(rytov_sigma({1e-15, -k, 1e5}), std::invalid_argument);
    CHECK_THROWS_AS(rytov_sigma({1e-15, k, 0.0}), std::invalid_argument);
}

TEST_CASE("mass above unity is flagged only when it matters") {
    CHECK_FALSE(ChannelPdtc(1e-3, 0.9).heavy_upper_tail());
    CHECK(ChannelPdtc(0.9, 2.5).heavy_upper_tail());
}
