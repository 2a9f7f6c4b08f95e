#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "macrobell/coherent.hpp"
#include "oracles.hpp"

using namespace macrobell;

namespace {

int completeness_cutoff(double nbar) {
    return static_cast<int>(std::ceil(nbar + 10.0 * std::sqrt(nbar))) + 20;
}

} // namespace

TEST_CASE("fock amplitude identities") {
    CHECK(coherent_fock_amplitude({Complex{0.0}}, 0) == Complex{1.0});
    CHECK(coherent_fock_amplitude({Complex{0.0}}, 3) == Complex{0.0});
    const Complex a11 = coherent_fock_amplitude({Complex{1.0}}, 1);
    CHECK(std::abs(a11 - std::exp(-0.5)) < 1e-15);
}

TEST_CASE("fock recurrence matches log-space evaluation") {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 10; ++trial) {
        const Complex g = oracles::random_label(gen, 5.0);
        const auto amps = fock_amplitudes({g}, 200);
        for (int n : {0, 1, 5, 37, 120, 200}) {
            const Complex direct = coherent_fock_amplitude({g}, n);
            CHECK(std::abs(amps[n] - direct) < 5e-13);
        }
    }
}

TEST_CASE("fock amplitudes stay normalized up to the cutoff rule") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Complex g = oracles::random_label(gen, std::sqrt(50.0));
        const double nbar = std::norm(g);
        const auto amps = fock_amplitudes({g}, completeness_cutoff(nbar));
        NeumaierSum acc;
        for (const auto& a : amps) acc.add(std::norm(a));
        CHECK(std::abs(acc.value() - 1.0) < 1e-10);
    }
}

TEST_CASE("log-space path handles huge mean photon number") {
    const Complex g = std::polar(30.0, 0.3); // |g|^2 = 900 > 700
    const auto amps = fock_amplitudes({g}, completeness_cutoff(900.0));
    NeumaierSum acc;
    for (const auto& a : amps) acc.add(std::norm(a));
    CHECK(std::abs(acc.value() - 1.0) < 1e-9);
    // ratio test against the defining recurrence
    for (int n : {100, 900, 1200}) {
        const Complex ratio = amps[n + 1] / amps[n];
        CHECK(std::abs(ratio - g / std::sqrt(double(n) + 1.0)) < 1e-9);
    }
}

TEST_CASE("coherent overlap identities") {
    std::mt19937_64 gen(3);
    const Complex g = oracles::random_label(gen, 2.0);
    CHECK(std::abs(coherent_overlap({g}, {g}) - 1.0) < 1e-14);
    CHECK(std::abs(coherent_overlap({Complex{0.0}}, {g}) - std::exp(-0.5 * std::norm(g)))
          < 1e-14);
    const Complex ov = coherent_overlap({Complex{1.0}}, {Complex{0.0, 1.0}});
    CHECK(std::abs(std::norm(ov) - std::exp(-2.0)) < 1e-14);
    for (int trial = 0; trial < 50; ++trial) {
        const Complex g1 = oracles::random_label(gen, 5.0);
        const Complex g2 = oracles::random_label(gen, 5.0);
        CHECK(std::abs(std::norm(coherent_overlap({g1}, {g2})) - std::exp(-std::norm(g1 - g2)))
              < 1e-12);
    }
}

TEST_CASE("fock sum reproduces the overlap") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Complex g1 = oracles::random_label(gen, 3.0);
        const Complex g2 = oracles::random_label(gen, 3.0);
        const int cutoff = completeness_cutoff(std::max(std::norm(g1), std::norm(g2)));
        const auto a1 = fock_amplitudes({g1}, cutoff);
        const auto a2 = fock_amplitudes({g2}, cutoff);
        Complex acc{};
        for (int n = 0; n <= cutoff; ++n) acc += std::conj(a1[n]) * a2[n];
        CHECK(std::abs(acc - coherent_overlap({g1}, {g2})) < 1e-8);
    }
}

TEST_CASE("vacuum quadrature density is standard normal") {
    const Complex psi0 = quadrature_wavefunction({Complex{0.0}}, 0.7, 0.0);
    CHECK(std::abs(std::norm(psi0) - std::pow(two_pi, -0.5)) < 1e-15);
}

TEST_CASE("quadrature density has mean 2 Re(gamma e^{-i theta}) and unit variance") {
    struct Case {
        Complex gamma;
        double theta;
        double want_mean;
    };
    for (const Case& c : {Case{Complex{1.0}, 0.0, 2.0}, Case{Complex{1.0, 1.0}, pi / 2, 2.0},
                          Case{Complex{0.3, -0.8}, 1.1, 0.0}}) {
        const double mean_expected =
            c.want_mean != 0.0 ? c.want_mean
                               : 2.0 * std::real(c.gamma * std::polar(1.0, -c.theta));
        const double h = 0.01;
        NeumaierSum norm, m1, m2;
        for (double x = mean_expected - 8.0; x <= mean_expected + 8.0 + h / 2; x += h) {
            const double w = std::norm(quadrature_wavefunction({c.gamma}, c.theta, x)) * h;
            norm.add(w);
            m1.add(w * x);
            m2.add(w * x * x);
        }
        CHECK(std::abs(norm.value() - 1.0) < 1e-8);
        const double mean = m1.value() / norm.value();
        CHECK(std::abs(mean - mean_expected) < 1e-8);
        CHECK(std::abs(m2.value() / norm.value() - mean * mean - 1.0) < 1e-6);
    }
}

TEST_CASE("quadrature wavefunction matches the Hermite series pointwise") {
    const Complex gamma{1.0, 1.0};
    const double theta = pi / 2;
    for (double x : {-3.0, -0.5, 0.0, 1.0, 2.7}) {
        const Complex lib = quadrature_wavefunction({gamma}, theta, x);
        const Complex oracle = oracles::hermite_series_wavefunction(gamma, theta, x, 80);
        CHECK(std::abs(lib - oracle) < 1e-10);
    }
    // phase matters downstream; check a second label too
    const Complex gamma2{-0.7, 0.4};
    for (double x : {-1.3, 0.8}) {
        CHECK(std::abs(quadrature_wavefunction({gamma2}, 0.3, x)
                       - oracles::hermite_series_wavefunction(gamma2, 0.3, x, 60))
              < 1e-11);
    }
}

TEST_CASE("wavefunction inner products reproduce coherent overlaps") {
    std::mt19937_64 gen(19);
    for (int trial = 0; trial < 4; ++trial) {
        const Complex g1 = oracles::random_label(gen, 1.6);
        const Complex g2 = oracles::random_label(gen, 1.6);
        const double theta = two_pi * oracles::uniform01(gen);
        const double h = 0.005;
        Complex acc{};
        for (double x = -14.0; x <= 14.0 + h / 2; x += h) {
            acc += h * std::conj(quadrature_wavefunction({g1}, theta, x))
                   * quadrature_wavefunction({g2}, theta, x);
        }
        CHECK(std::abs(acc - coherent_overlap({g1}, {g2})) < 1e-8);
    }
}

TEST_CASE("poisson tail bounds") {
    CHECK(poisson_tail_above(0.0, 5) == 0.0);
    CHECK(poisson_tail_above(3.0, -1) == 1.0);
    // against a direct complement sum
    const double lambda = 4.8;
    const int cutoff = 10;
    double head = 0.0;
    for (int n = 0; n <= cutoff; ++n) head += oracles::poisson_pmf(n, lambda);
    CHECK(std::abs(poisson_tail_above(lambda, cutoff) - (1.0 - head)) < 1e-12);
    // monotone in the cutoff
    double prev = 1.0;
    for (int c = 0; c < 40; ++c) {
        const double t = poisson_tail_above(6.0, c);
        CHECK(t <= prev);
        prev = t;
    }
}
