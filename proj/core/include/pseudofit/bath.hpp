// bath.hpp — Spectral density catalog and numerically exact bath correlation functions
//
// Conventions:
//   C(t)  = ∫_{-∞}^{∞} J_eff(ω) e^{-iωt} dω          (bosonic BCF)
//   C̃(ω) = Re ∫_0^∞ C(t) e^{iωt} dt = π J_eff(ω)    (frequency-domain target)
//   Δ^<(t) = ∫ J(ω) f_FD(ω) e^{-iωt} dω,  Δ^>(t) = ∫ J(ω)(1 - f_FD(ω)) e^{-iωt} dω
// with J_eff(ω) = J(ω)(1 + n_B(ω)) for ω > 0 and J(-ω) n_B(-ω) for ω < 0.

#pragma once

#include <variant>
#include <vector>

#include "pseudofit/types.hpp"

namespace pseudofit {

// J(ω) = ω^s e^{-ω/ω_c} for ω ≥ 0
struct OhmicFamily {
    double s = 1.0;
    double omega_c = 1.0;
};

// J(ω) = (2 g² κ ω_c ω / π) / ((ω_c² - ω²)² + κ² ω²) for ω ≥ 0
struct LorentzianLike {
    double g = 1.0;
    double kappa = 1.0;
    double omega_c = 1.0;
};

// J(ω) = (Γ/π) √(1 - ω²/W²) for |ω| ≤ W (two-sided; used for fermionic baths)
struct Semicircular {
    double gamma = 1.0;
    double half_width = 1.0;  // W
};

// J(ω) = S · 8 Γ Ω (4Ω² + Γ²) ω / ((4(ω-Ω)² + Γ²)(4(ω+Ω)² + Γ²)) for ω ≥ 0
struct AntisymLorentzian {
    double strength = 1.0;  // S
    double width = 1.0;     // Γ
    double center = 1.0;    // Ω
};

// Linear interpolation on an ascending grid, zero outside
struct Tabulated {
    RealVector grid;
    RealVector values;
};

class SpectralDensity;
struct DensitySum {
    std::vector<SpectralDensity> terms;
};

class SpectralDensity {
  public:
    using Variant =
        std::variant<OhmicFamily, LorentzianLike, Semicircular, AntisymLorentzian, DensitySum, Tabulated>;

    SpectralDensity(OhmicFamily d);  // NOLINT: implicit by design, mirrors the tagged union
    SpectralDensity(LorentzianLike d);
    SpectralDensity(Semicircular d);
    SpectralDensity(AntisymLorentzian d);
    SpectralDensity(DensitySum d);
    SpectralDensity(Tabulated d);

    const Variant& get() const { return v_; }

    // [lo, hi] outside of which J vanishes; hi may be +inf, lo may be -inf
    double support_lo() const;
    double support_hi() const;
    // bound on ∫_L^∞ J(ω) dω (resp. ∫_{-∞}^{-L} for the mirrored call)
    double tail_bound(double L) const;
    // frequency scale used for limits and default grids
    double scale() const;

  private:
    void validate() const;
    Variant v_;
};

double eval_density(const SpectralDensity& j, double omega);

enum class Statistics { bosonic, fermionic };

struct BathSpec {
    SpectralDensity density;
    double beta = inf;  // inverse temperature, +inf for zero temperature
    Statistics statistics = Statistics::bosonic;
    double mu = 0.0;  // chemical potential (fermionic only)

    void validate() const;
};

// Thermally weighted effective density (bosonic); continuous ω → 0 limit by interpolation.
double effective_density(const BathSpec& bath, double omega);

// C(t) on the given grid; per-point absolute accuracy abs_tol (AccuracyError on failure).
TimeSeries bcf_time(const BathSpec& bath, const RealVector& t_grid, double abs_tol = 1e-10);

// C̃(ω) = π J_eff(ω)
FreqSeries bcf_freq(const BathSpec& bath, const RealVector& omega_grid);

struct Hybridization {
    TimeSeries lesser;
    TimeSeries greater;
};
Hybridization hybridization(const BathSpec& bath, const RealVector& t_grid, double abs_tol = 1e-10);

double bose_occupation(double beta, double omega);
double fermi_occupation(double beta, double mu, double omega);

}  // namespace pseudofit
