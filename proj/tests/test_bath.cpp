#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pseudofit/bath.hpp"
#include "pseudofit/quadrature.hpp"

using namespace pseudofit;

namespace {

BathSpec ohmic(double s = 1.0, double wc = 1.0, double beta = inf) {
    return BathSpec{OhmicFamily{s, wc}, beta, Statistics::bosonic, 0.0};
}

// closed form for Ohmic s=1, ω_c=1, β=∞: C(t) = 1/(1+it)²
Complex ohmic_closed_form(double t) {
    const Complex z(1.0, t);
    return 1.0 / (z * z);
}

}  // namespace

TEST_CASE("eval_density variants") {
    SpectralDensity j = OhmicFamily{1.0, 1.0};
    CHECK(eval_density(j, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(eval_density(j, -0.5) == 0.0);

    SpectralDensity lor = LorentzianLike{0.25, 0.1, 0.58};
    CHECK(eval_density(lor, -0.3) == 0.0);
    CHECK(eval_density(lor, 0.58) > 0.0);

    SpectralDensity semi = Semicircular{1.0, 10.0};
    CHECK(eval_density(semi, 10.0) == 0.0);
    CHECK(eval_density(semi, -10.0) == 0.0);
    CHECK(eval_density(semi, 0.0) == doctest::Approx(1.0 / M_PI));

    SpectralDensity tab = Tabulated{linspace(0.0, 1.0, 3), RealVector::Ones(3)};
    CHECK(eval_density(tab, 0.25) == doctest::Approx(1.0));
    CHECK(eval_density(tab, 2.0) == 0.0);

    CHECK_THROWS_AS(SpectralDensity(OhmicFamily{-1.0, 1.0}), InputError);
}

TEST_CASE("effective_density thermal extension") {
    // β = ∞: vacuum has no negative-frequency weight
    CHECK(effective_density(ohmic(), -1.0) == 0.0);
    CHECK(effective_density(ohmic(), 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    // detailed balance J_eff(-ω) = e^{-βω} J_eff(ω) at β = 1
    BathSpec thermal = ohmic(1.0, 1.0, 1.0);
    for (double w : {0.5, 1.0, 2.3}) {
        const double plus = effective_density(thermal, w);
        const double minus = effective_density(thermal, -w);
        CHECK(minus == doctest::Approx(std::exp(-w) * plus).epsilon(1e-11));
    }

    // ω → 0 continuous limit: for s=1 Ohmic, J_eff(0) = 1/β
    CHECK(effective_density(thermal, 0.0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("bcf_time closed form for Ohmic at zero temperature") {
    RealVector grid = linspace(0.0, 20.0, 21);
    TimeSeries c = bcf_time(ohmic(), grid, 1e-11);
    for (Index i = 0; i < grid.size(); ++i)
        CHECK(std::abs(c.values[i] - ohmic_closed_form(grid[i])) <= 1e-9);
    CHECK(std::abs(c.values[0].imag()) <= 1e-10);
    CHECK(c.values[0].real() == doctest::Approx(1.0).epsilon(1e-9));
    // t = 1: 1/(1+i)² = -0.5i
    CHECK(std::abs(c.values[1] - Complex(0.0, -0.5)) <= 1e-9);
}

TEST_CASE("bcf_time hermitian symmetry via negative times") {
    // C(-t) = conj(C(t)) since J_eff is real
    BathSpec bath = ohmic(1.0, 1.0, 2.0);
    RealVector pos(3), neg(3);
    pos << 0.5, 1.0, 2.5;
    neg << -2.5, -1.0, -0.5;
    TimeSeries cp = bcf_time(bath, pos, 1e-10);
    TimeSeries cn = bcf_time(bath, neg, 1e-10);
    for (Index i = 0; i < 3; ++i)
        CHECK(std::abs(cn.values[i] - std::conj(cp.values[2 - i])) <= 1e-9);
}

TEST_CASE("bcf_time matches brute-force thermal discretization") {
    // Gauss-Legendre bath discretization: C(t) = Σ c_j²[(1+n_B)e^{-iω_j t} + n_B e^{iω_j t}]
    const double beta = 1.0;
    BathSpec bath = ohmic(1.0, 1.0, beta);
    const int n_modes = 2000;
    const double w_max = 40.0;
    // Gauss-Legendre nodes via Newton on Legendre polynomials (test-side oracle)
    RealVector nodes(n_modes), weights(n_modes);
    for (int i = 0; i < n_modes; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n_modes + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n_modes; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double dp = n_modes * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n_modes; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double dp = n_modes * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = 0.5 * w_max * (x + 1.0);
        weights[i] = w_max / ((1.0 - x * x) * dp * dp);
    }
    RealVector grid = linspace(0.0, 5.0, 11);
    TimeSeries c = bcf_time(bath, grid, 1e-10);
    for (Index i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        Complex brute{0.0, 0.0};
        for (int j = 0; j < n_modes; ++j) {
            const double w = nodes[j];
            const double jw = eval_density(bath.density, w) * weights[j];
            const double nb = bose_occupation(beta, w);
            brute += jw * ((1.0 + nb) * std::exp(Complex(0.0, -w * t)) +
                           nb * std::exp(Complex(0.0, w * t)));
        }
        CHECK(std::abs(c.values[i] - brute) <= 1e-5);
    }
}

TEST_CASE("bcf_freq is pi times J_eff and consistent with the half-Fourier of C(t)") {
    BathSpec bath = ohmic();
    RealVector w(3);
    w << -1.0, 1.0, 2.0;
    FreqSeries ct = bcf_freq(bath, w);
    CHECK(ct.values[0] == 0.0);
    CHECK(ct.values[1] == doctest::Approx(M_PI * std::exp(-1.0)).epsilon(1e-12));

    // Re ∫_0^∞ C(t) e^{iωt} dt reproduces C̃(ω): integrate the closed form numerically
    // (algebraic 1/t² decay: truncation error ~ |C(T)|/ω, so T = 2·10⁴ reaches ~4e-9)
    for (double omega : {0.6, 1.0, 1.7}) {
        auto f = [&](double t) { return ohmic_closed_form(t) * std::exp(Complex(0.0, omega * t)); };
        auto got = quad::integrate_adaptive(f, 0.0, 2.0e4, 1e-8, 0.5 * 2.0 * M_PI / omega);
        const double expect = M_PI * effective_density(bath, omega);
        CHECK(std::abs(got.value.real() - expect) <= 1e-6);
    }
}

TEST_CASE("quadrature convergence: halving tolerance moves values less than the bound") {
    BathSpec bath = ohmic(0.5, 1.0, 2.0);  // sub-Ohmic, finite temperature
    RealVector grid(2);
    grid << 0.7, 3.0;
    TimeSeries a = bcf_time(bath, grid, 1e-8);
    TimeSeries b = bcf_time(bath, grid, 5e-9);
    for (Index i = 0; i < 2; ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-8);
}

TEST_CASE("hybridization of the semicircular bath") {
    BathSpec bath{Semicircular{1.0, 10.0}, 100.0, Statistics::fermionic, 0.0};
    RealVector grid = linspace(0.0, 2.0, 5);
    auto hyb = hybridization(bath, grid, 1e-10);

    // Δ^<(0) + Δ^>(0) = ∫ J = ΓW/2
    const Complex total = hyb.lesser.values[0] + hyb.greater.values[0];
    CHECK(total.real() == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(std::abs(total.imag()) <= 1e-9);

    // particle-hole symmetry at μ = 0: Δ^<(t) = conj(Δ^>(t))
    for (Index i = 0; i < grid.size(); ++i)
        CHECK(std::abs(hyb.lesser.values[i] - std::conj(hyb.greater.values[i])) <= 1e-8);

    // β → ∞ half filling: Δ^<(0) = Δ^>(0)
    BathSpec cold{Semicircular{1.0, 10.0}, inf, Statistics::fermionic, 0.0};
    auto hyb0 = hybridization(cold, grid, 1e-10);
    CHECK(std::abs(hyb0.lesser.values[0] - hyb0.greater.values[0]) <= 1e-9);
}

TEST_CASE("zero density gives zero BCF") {
    SpectralDensity tiny = Tabulated{linspace(0.0, 1.0, 4), RealVector::Zero(4)};
    BathSpec bath{tiny, inf, Statistics::bosonic, 0.0};
    RealVector grid = linspace(0.0, 3.0, 4);
    TimeSeries c = bcf_time(bath, grid, 1e-12);
    CHECK(c.values.cwiseAbs().maxCoeff() <= 1e-12);
}
