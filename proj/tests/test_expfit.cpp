#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "pseudofit/expfit.hpp"

using namespace pseudofit;

namespace {

TimeSeries sample_model(const QuasiModel& m, double T, double dt) {
    const Index n = Index(std::llround(T / dt)) + 1;
    RealVector grid(n);
    for (Index i = 0; i < n; ++i) grid[i] = double(i) * dt;
    return TimeSeries(grid, eval_quasi(m, grid));
}

std::vector<Index> match_poles(const Vector& found, const Vector& truth) {
    std::vector<Index> idx(size_t(truth.size()), -1);
    for (Index k = 0; k < truth.size(); ++k) {
        double best = inf;
        for (Index j = 0; j < found.size(); ++j) {
            const double d = std::abs(found[j] - truth[k]);
            if (d < best) {
                best = d;
                idx[size_t(k)] = j;
            }
        }
    }
    return idx;
}

}  // namespace

TEST_CASE("eval_quasi basics") {
    QuasiModel m;
    m.poles.resize(1);
    m.weights.resize(1);
    m.poles[0] = Complex(1.0, -0.5);
    m.weights[0] = 2.0;
    CHECK(eval_quasi(m, 0.0) == Complex(2.0, 0.0));

    m.poles[0] = Complex(0.0, -1.0);
    m.weights[0] = 1.0;
    CHECK(std::abs(eval_quasi(m, 1.0) - Complex(std::exp(-1.0), 0.0)) <= 1e-15);

    QuasiModel empty;
    empty.poles.resize(0);
    empty.weights.resize(0);
    CHECK(eval_quasi(empty, 3.0) == Complex(0.0, 0.0));
}

TEST_CASE("quasi model invariants") {
    QuasiModel bad;
    bad.poles.resize(1);
    bad.weights.resize(1);
    bad.poles[0] = Complex(1.0, 0.5);  // growing exponential
    bad.weights[0] = 1.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("esprit recovers a single exponential") {
    QuasiModel truth;
    truth.poles.resize(1);
    truth.weights.resize(1);
    truth.poles[0] = Complex(1.0, -0.5);
    truth.weights[0] = 2.0;
    auto fit = esprit_fit(sample_model(truth, 10.0, 0.05), {1, 1e-12});
    REQUIRE(fit.model.size() == 1);
    CHECK(std::abs(fit.model.poles[0] - truth.poles[0]) <= 1e-8);
    CHECK(std::abs(fit.model.weights[0] - truth.weights[0]) <= 1e-8);
    CHECK(fit.rms_misfit <= 1e-10 * 2.0);
}

TEST_CASE("esprit recovers two exponentials") {
    QuasiModel truth;
    truth.poles.resize(2);
    truth.weights.resize(2);
    truth.poles[0] = Complex(2.0, -0.1);
    truth.weights[0] = 1.0;
    truth.poles[1] = Complex(-1.0, -1.0);
    truth.weights[1] = Complex(1.0, 1.0);
    auto fit = esprit_fit(sample_model(truth, 10.0, 0.05), {2, 1e-12});
    REQUIRE(fit.model.size() == 2);
    auto idx = match_poles(fit.model.poles, truth.poles);
    for (Index k = 0; k < 2; ++k) {
        CHECK(std::abs(fit.model.poles[idx[size_t(k)]] - truth.poles[k]) <= 1e-8);
        CHECK(std::abs(fit.model.weights[idx[size_t(k)]] - truth.weights[k]) <= 1e-8);
    }
}

TEST_CASE("esprit on zero samples returns the empty model") {
    RealVector grid = linspace(0.0, 5.0, 64);
    TimeSeries zeros(grid, Vector::Zero(64));
    auto fit = esprit_fit(zeros, {});
    CHECK(fit.model.size() == 0);
    CHECK(fit.rms_misfit == 0.0);
}

TEST_CASE("esprit input validation") {
    RealVector grid = linspace(0.0, 1.0, 6);
    TimeSeries s(grid, Vector::Ones(6));
    CHECK_THROWS_AS(esprit_fit(s, {4, 1e-12}), InputError);  // needs 2*order+2 samples
    RealVector bad(3);
    bad << 0.0, 0.2, 0.5;  // non-uniform
    CHECK_THROWS_AS(esprit_fit(TimeSeries(bad, Vector::Ones(3)), {}), InputError);
}

TEST_CASE("order monotonicity on noiseless data") {
    QuasiModel truth;
    truth.poles.resize(3);
    truth.weights.resize(3);
    truth.poles << Complex(0.5, -0.2), Complex(1.5, -0.8), Complex(3.0, -2.0);
    truth.weights << Complex(1.0, 0.0), Complex(0.5, 0.5), Complex(0.25, -0.3);
    TimeSeries samples = sample_model(truth, 12.0, 0.04);
    double prev = inf;
    for (int order = 1; order <= 5; ++order) {
        auto fit = esprit_fit(samples, {order, 1e-12});
        CHECK(fit.rms_misfit <= prev + 1e-12);
        prev = fit.rms_misfit;
    }
}

TEST_CASE("exact recovery property: separated poles up to N = 8") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + int(unif(rng) * 7);  // 2..8
        QuasiModel truth;
        truth.poles.resize(n);
        truth.weights.resize(n);
        // rejection-sample poles with pairwise separation >= 0.1
        for (Index k = 0; k < n;) {
            const Complex cand(4.0 * unif(rng) - 1.0, -(0.05 + 2.0 * unif(rng)));
            bool ok = true;
            for (Index j = 0; j < k; ++j)
                if (std::abs(cand - truth.poles[j]) < 0.1) ok = false;
            if (ok) truth.poles[k++] = cand;
        }
        for (Index k = 0; k < n; ++k)
            truth.weights[k] = Complex(0.3 + unif(rng), unif(rng) - 0.5);
        auto fit = esprit_fit(sample_model(truth, 14.0, 0.05), {n, 1e-12});
        REQUIRE(fit.model.size() == n);
        auto idx = match_poles(fit.model.poles, truth.poles);
        for (Index k = 0; k < n; ++k)
            CHECK(std::abs(fit.model.poles[idx[size_t(k)]] - truth.poles[k]) <= 1e-7);
        // decay invariant on every returned pole
        for (Index k = 0; k < n; ++k) CHECK(fit.model.poles[k].imag() <= 1e-12);
    }
}

TEST_CASE("avg_l2_error trivial and refined-quadrature oracle") {
    RealVector grid = linspace(0.0, 2.0, 201);
    Vector a(201), b(201);
    for (Index i = 0; i < 201; ++i) {
        a[i] = Complex(std::sin(grid[i]), 0.2 * grid[i]);
        b[i] = a[i];
    }
    TimeSeries sa(grid, a), sb(grid, b);
    CHECK(avg_l2_error(sa, sb, 2.0) == 0.0);

    // constant difference d has error |d|
    Vector c = a.array() + Complex(0.3, -0.4);
    CHECK(avg_l2_error(sa, TimeSeries(grid, c), 2.0) == doctest::Approx(0.5).epsilon(1e-12));

    // trapezoid vs 10x-refined Riemann sum on a smooth difference
    auto diff = [](double t) { return Complex(std::sin(1.3 * t), std::cos(0.7 * t) - 1.0); };
    Vector d(201);
    for (Index i = 0; i < 201; ++i) d[i] = a[i] + diff(grid[i]);
    const double got = avg_l2_error(sa, TimeSeries(grid, d), 2.0);
    double riemann = 0.0;
    const Index fine = 2000;
    for (Index i = 0; i < fine; ++i) {
        const double t = 2.0 * (double(i) + 0.5) / double(fine);
        riemann += std::norm(diff(t)) * (2.0 / double(fine));
    }
    const double expect = std::sqrt(riemann / 2.0);
    CHECK(got == doctest::Approx(expect).epsilon(1e-6));

    CHECK_THROWS_AS(avg_l2_error(sa, TimeSeries(linspace(0.0, 2.0, 101), Vector::Zero(101)), 2.0),
                    InputError);
}
