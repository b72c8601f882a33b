#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pseudofit/realization.hpp"

using namespace pseudofit;

namespace {

// Im Σ_k w_k/(λ_k - ω): the density generated by a lower-half-plane quasi model
double halfplane_density(const Vector& poles, const Vector& weights, double omega) {
    Complex acc{0.0, 0.0};
    for (Index k = 0; k < poles.size(); ++k) acc += weights[k] / (poles[k] - omega);
    return acc.imag();
}

FreqSeries lorentzian_samples(double center, double gamma, double amp, double lo, double hi,
                              Index n) {
    RealVector grid = linspace(lo, hi, n);
    RealVector vals(n);
    for (Index i = 0; i < n; ++i)
        vals[i] = amp * gamma / ((center - grid[i]) * (center - grid[i]) + gamma * gamma);
    return FreqSeries(grid, vals);
}

}  // namespace

TEST_CASE("loewner realizes a single Lorentzian") {
    // Im(1/(1 - 0.1i - ω)) = 0.1/((1-ω)² + 0.01)
    auto samples = lorentzian_samples(1.0, 0.1, 1.0, -3.0, 5.0, 200);
    auto out = loewner_realize(samples, {});
    CHECK(out.rank == 2);
    REQUIRE(out.pr.size() == 2);

    // conjugate pair {1 - 0.1i, 1 + 0.1i}
    std::vector<Complex> poles{out.pr.poles[0], out.pr.poles[1]};
    std::sort(poles.begin(), poles.end(), [](Complex a, Complex b) { return a.imag() < b.imag(); });
    CHECK(std::abs(poles[0] - Complex(1.0, -0.1)) <= 1e-7);
    CHECK(std::abs(poles[1] - Complex(1.0, 0.1)) <= 1e-7);

    // held-out points
    for (double w : {-2.345, 0.731, 1.618, 4.2}) {
        const double expect = 0.1 / ((1.0 - w) * (1.0 - w) + 0.01);
        CHECK(std::abs(eval_pole_residue(out.pr, w).real() - expect) <= 1e-8);
        CHECK(std::abs(eval_pole_residue(out.pr, w).imag()) <= 1e-8);
    }
}

TEST_CASE("loewner on all-zero samples returns the empty model") {
    RealVector grid = linspace(-1.0, 1.0, 50);
    auto out = loewner_realize(FreqSeries(grid, RealVector::Zero(50)), {});
    CHECK(out.rank == 0);
    CHECK(out.pr.size() == 0);
}

TEST_CASE("loewner separates two Lorentzians") {
    RealVector grid = linspace(-4.0, 8.0, 400);
    RealVector vals(400);
    auto lor = [](double w, double c, double g) { return g / ((c - w) * (c - w) + g * g); };
    for (Index i = 0; i < 400; ++i)
        vals[i] = lor(grid[i], 1.0, 0.15) + 0.6 * lor(grid[i], 3.0, 0.4);
    auto out = loewner_realize(FreqSeries(grid, vals), {});
    CHECK(out.rank == 4);
    REQUIRE(out.pr.size() == 4);
    Vector expect(4);
    expect << Complex(1.0, -0.15), Complex(1.0, 0.15), Complex(3.0, -0.4), Complex(3.0, 0.4);
    for (Index k = 0; k < 4; ++k) {
        double best = inf;
        for (Index j = 0; j < 4; ++j) best = std::min(best, std::abs(out.pr.poles[j] - expect[k]));
        CHECK(best <= 1e-6);
    }
}

TEST_CASE("loewner rejects bad input") {
    RealVector grid(3);
    grid << 0.0, 1.0, 2.0;
    CHECK_THROWS_AS(loewner_realize(FreqSeries(grid, RealVector::Ones(3)), {}), InputError);
}

TEST_CASE("halfplane weight rule reproduces the time domain") {
    // single coupled mode g = 1, K = 1 - 0.1i: C(t) = e^{(-i - 0.1)t}, C̃ = Im(1/(K - ω))
    auto samples = lorentzian_samples(1.0, 0.1, 1.0, -3.0, 5.0, 240);
    auto out = loewner_realize(samples, {});
    auto reduced = halfplane_reduce(out.pr);
    REQUIRE(reduced.model.size() == 1);
    for (double t : {0.0, 1.0, 2.0}) {
        const Complex expect = std::exp(Complex(-0.1, -1.0) * t);
        CHECK(std::abs(eval_quasi(reduced.model, t) - expect) <= 1e-6);
    }

    // the binding verification invariant: Im Σ w/(λ - ω) reproduces the samples
    for (Index i = 0; i < samples.size(); i += 17)
        CHECK(std::abs(halfplane_density(reduced.model.poles, reduced.model.weights,
                                         samples.grid[i]) -
                       samples.values[i]) <= 10.0 * std::max(out.sigma_next, 1e-9));
}

TEST_CASE("halfplane_reduce on the empty model") {
    PoleResidue empty;
    empty.poles.resize(0);
    empty.residues.resize(0);
    auto reduced = halfplane_reduce(empty);
    CHECK(reduced.model.size() == 0);
}

TEST_CASE("roundtrip: random stable quasi model through C-tilde sampling") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const Index n = 3;
        Vector poles(n), weights(n);
        for (Index k = 0; k < n; ++k) {
            poles[k] = Complex(3.0 * unif(rng) - 0.5, -(0.15 + 1.2 * unif(rng)));
            weights[k] = Complex(unif(rng) + 0.2, 0.6 * (unif(rng) - 0.5));
        }
        RealVector grid = linspace(-12.0, 14.0, 700);
        RealVector vals(700);
        for (Index i = 0; i < 700; ++i) vals[i] = halfplane_density(poles, weights, grid[i]);

        auto out = loewner_realize(FreqSeries(grid, vals), {});
        auto reduced = halfplane_reduce(out.pr);
        REQUIRE(reduced.model.size() == n);

        QuasiModel truth;
        truth.poles = poles;
        truth.weights = weights;
        for (double t = 0.0; t <= 20.0; t += 0.5)
            CHECK(std::abs(eval_quasi(reduced.model, t) - eval_quasi(truth, t)) <= 1e-6);
    }
}

TEST_CASE("partition offset leaves the realization invariant") {
    auto samples = lorentzian_samples(0.8, 0.25, 1.3, -4.0, 6.0, 301);
    LoewnerOptions a, b;
    a.partition_offset = 0;
    b.partition_offset = 1;
    auto ra = loewner_realize(samples, a);
    auto rb = loewner_realize(samples, b);
    REQUIRE(ra.pr.size() == rb.pr.size());
    for (Index k = 0; k < ra.pr.size(); ++k) {
        double best = inf;
        Index arg = 0;
        for (Index j = 0; j < rb.pr.size(); ++j) {
            const double d = std::abs(ra.pr.poles[k] - rb.pr.poles[j]);
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        CHECK(best <= 1e-8);
        CHECK(std::abs(ra.pr.residues[k] - rb.pr.residues[arg]) <= 1e-8);
    }
}
