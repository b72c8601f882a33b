#include "pseudofit/bath.hpp"

#include <algorithm>
#include <cmath>

#include "pseudofit/quadrature.hpp"

namespace pseudofit {

namespace {

double interp_linear(const RealVector& x, const RealVector& y, double xi) {
    if (xi < x[0] || xi > x[x.size() - 1]) return 0.0;
    auto it = std::upper_bound(x.data(), x.data() + x.size(), xi);
    Index hi = std::min<Index>(it - x.data(), x.size() - 1);
    if (hi == 0) return y[0];
    Index lo = hi - 1;
    const double w = (xi - x[lo]) / (x[hi] - x[lo]);
    return (1.0 - w) * y[lo] + w * y[hi];
}

}  // namespace

double eval_density(const SpectralDensity& j, double omega) {
    return std::visit(
        [omega](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, OhmicFamily>) {
                if (omega < 0.0) return 0.0;
                if (omega == 0.0) return d.s == 0.0 ? 1.0 : 0.0;
                return std::pow(omega, d.s) * std::exp(-omega / d.omega_c);
            } else if constexpr (std::is_same_v<T, LorentzianLike>) {
                if (omega < 0.0) return 0.0;
                const double wc2 = d.omega_c * d.omega_c;
                const double den = (wc2 - omega * omega) * (wc2 - omega * omega) +
                                   d.kappa * d.kappa * omega * omega;
                return 2.0 * d.g * d.g * d.kappa * d.omega_c * omega / (M_PI * den);
            } else if constexpr (std::is_same_v<T, Semicircular>) {
                const double u = omega / d.half_width;
                if (std::abs(u) > 1.0) return 0.0;
                return d.gamma / M_PI * std::sqrt(std::max(0.0, 1.0 - u * u));
            } else if constexpr (std::is_same_v<T, AntisymLorentzian>) {
                if (omega < 0.0) return 0.0;
                const double g2 = d.width * d.width;
                const double dm = 4.0 * (omega - d.center) * (omega - d.center) + g2;
                const double dp = 4.0 * (omega + d.center) * (omega + d.center) + g2;
                return d.strength * 8.0 * d.width * d.center * (4.0 * d.center * d.center + g2) *
                       omega / (dm * dp);
            } else if constexpr (std::is_same_v<T, DensitySum>) {
                double acc = 0.0;
                for (const auto& term : d.terms) acc += eval_density(term, omega);
                return acc;
            } else {
                return interp_linear(d.grid, d.values, omega);
            }
        },
        j.get());
}

SpectralDensity::SpectralDensity(OhmicFamily d) : v_(d) { validate(); }
SpectralDensity::SpectralDensity(LorentzianLike d) : v_(d) { validate(); }
SpectralDensity::SpectralDensity(Semicircular d) : v_(d) { validate(); }
SpectralDensity::SpectralDensity(AntisymLorentzian d) : v_(d) { validate(); }
SpectralDensity::SpectralDensity(DensitySum d) : v_(std::move(d)) { validate(); }
SpectralDensity::SpectralDensity(Tabulated d) : v_(std::move(d)) { validate(); }

void SpectralDensity::validate() const {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            auto positive = [](double x, const char* name) {
                if (!(x > 0.0) || !std::isfinite(x))
                    throw InputError(std::string("SpectralDensity: parameter '") + name +
                                     "' must be positive and finite");
            };
            if constexpr (std::is_same_v<T, OhmicFamily>) {
                positive(d.s, "s");
                positive(d.omega_c, "omega_c");
            } else if constexpr (std::is_same_v<T, LorentzianLike>) {
                positive(d.g, "g");
                positive(d.kappa, "kappa");
                positive(d.omega_c, "omega_c");
            } else if constexpr (std::is_same_v<T, Semicircular>) {
                positive(d.gamma, "gamma");
                positive(d.half_width, "W");
            } else if constexpr (std::is_same_v<T, AntisymLorentzian>) {
                positive(d.strength, "S");
                positive(d.width, "Gamma");
                positive(d.center, "Omega");
            } else if constexpr (std::is_same_v<T, DensitySum>) {
                if (d.terms.empty()) throw InputError("SpectralDensity: empty sum");
            } else {
                if (d.grid.size() != d.values.size() || d.grid.size() < 2)
                    throw InputError("SpectralDensity: tabulated grid/values mismatch");
                for (Index i = 1; i < d.grid.size(); ++i)
                    if (!(d.grid[i] > d.grid[i - 1]))
                        throw InputError("SpectralDensity: tabulated grid must ascend");
                for (Index i = 0; i < d.values.size(); ++i)
                    if (d.values[i] < 0.0)
                        throw InputError("SpectralDensity: tabulated values must be >= 0");
            }
        },
        v_);
    // nonnegativity spot check over the characteristic window
    const double hi = std::isfinite(support_hi()) ? support_hi() : 16.0 * scale();
    const double lo = std::isfinite(support_lo()) ? support_lo() : -16.0 * scale();
    for (int i = 0; i <= 256; ++i) {
        const double w = lo + (hi - lo) * double(i) / 256.0;
        if (eval_density(*this, w) < 0.0)
            throw InputError("SpectralDensity: J(omega) < 0 detected on its support");
    }
}

double SpectralDensity::support_lo() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Semicircular>) return -d.half_width;
            else if constexpr (std::is_same_v<T, DensitySum>) {
                double lo = inf;
                for (const auto& term : d.terms) lo = std::min(lo, term.support_lo());
                return lo;
            } else if constexpr (std::is_same_v<T, Tabulated>) return d.grid[0];
            else return 0.0;
        },
        v_);
}

double SpectralDensity::support_hi() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Semicircular>) return d.half_width;
            else if constexpr (std::is_same_v<T, DensitySum>) {
                double hi = -inf;
                for (const auto& term : d.terms) hi = std::max(hi, term.support_hi());
                return hi;
            } else if constexpr (std::is_same_v<T, Tabulated>) return d.grid[d.grid.size() - 1];
            else return inf;
        },
        v_);
}

double SpectralDensity::tail_bound(double L) const {
    return std::visit(
        [L, this](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, OhmicFamily>) {
                // ∫_L^∞ ω^s e^{-ω/ω_c} dω ≤ 2 ω_c J(L) for L ≥ 2 s ω_c
                if (L < 2.0 * d.s * d.omega_c) return inf;
                return 2.0 * d.omega_c * eval_density(*this, L);
            } else if constexpr (std::is_same_v<T, LorentzianLike>) {
                // J ≤ (32 g²κω_c / 9π) ω^{-3} for ω ≥ 2 max(ω_c, κ)
                if (L < 2.0 * std::max(d.omega_c, d.kappa)) return inf;
                return 16.0 * d.g * d.g * d.kappa * d.omega_c / (9.0 * M_PI * L * L);
            } else if constexpr (std::is_same_v<T, AntisymLorentzian>) {
                // J ≤ S·8ΓΩ(4Ω²+Γ²) ω^{-3} for ω ≥ 2Ω + Γ
                if (L < 2.0 * d.center + d.width) return inf;
                return 4.0 * d.strength * d.width * d.center *
                       (4.0 * d.center * d.center + d.width * d.width) / (L * L);
            } else if constexpr (std::is_same_v<T, DensitySum>) {
                double acc = 0.0;
                for (const auto& term : d.terms) acc += term.tail_bound(L);
                return acc;
            } else {
                return L >= support_hi() ? 0.0 : inf;
            }
        },
        v_);
}

double SpectralDensity::scale() const {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, OhmicFamily>) return d.omega_c * std::max(1.0, d.s);
            else if constexpr (std::is_same_v<T, LorentzianLike>) return d.omega_c + d.kappa;
            else if constexpr (std::is_same_v<T, Semicircular>) return d.half_width;
            else if constexpr (std::is_same_v<T, AntisymLorentzian>) return d.center + d.width;
            else if constexpr (std::is_same_v<T, DensitySum>) {
                double s = 0.0;
                for (const auto& term : d.terms) s = std::max(s, term.scale());
                return s;
            } else {
                return std::max(std::abs(d.grid[0]), std::abs(d.grid[d.grid.size() - 1]));
            }
        },
        v_);
}

void BathSpec::validate() const {
    if (!(beta > 0.0)) throw InputError("BathSpec: beta must be positive (or +inf)");
    if (statistics == Statistics::fermionic && !std::isfinite(mu))
        throw InputError("BathSpec: fermionic bath requires finite mu");
}

double bose_occupation(double beta, double omega) {
    if (!std::isfinite(beta)) return 0.0;
    const double x = beta * omega;
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

double fermi_occupation(double beta, double mu, double omega) {
    if (!std::isfinite(beta)) return omega < mu ? 1.0 : (omega > mu ? 0.0 : 0.5);
    const double x = beta * (omega - mu);
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double effective_density(const BathSpec& bath, double omega) {
    if (bath.statistics != Statistics::bosonic)
        throw InputError("effective_density: bosonic baths only");
    const double w_scale = bath.density.scale();
    if (std::abs(omega) < 1e-12 * w_scale || omega == 0.0) {
        // continuous limit at ω = 0 by two-sided interpolation
        const double h = 1e-7 * w_scale;
        return 0.5 * (effective_density(bath, h) + effective_density(bath, -h));
    }
    if (omega > 0.0) return eval_density(bath.density, omega) * (1.0 + bose_occupation(bath.beta, omega));
    if (!std::isfinite(bath.beta)) return 0.0;
    return eval_density(bath.density, -omega) * bose_occupation(bath.beta, -omega);
}

namespace {

// core window [0, L0] integrated with oscillation-aware panels, then geometric
// extension with the density's analytic tail bound; occ_bound(L) must dominate
// the occupation factor on [L, ∞)
template <typename G, typename OccBound>
quad::QuadResult halfline_fourier(const SpectralDensity& j, G&& g, double t, double abs_tol,
                                  OccBound&& occ_bound) {
    const double hi = j.support_hi();
    if (std::isfinite(hi)) return quad::fourier_panel(g, 0.0, hi, t, abs_tol);
    const double L0 = std::max(16.0 * j.scale(), 1.0);
    auto core = quad::fourier_panel(g, 0.0, L0, t, 0.5 * abs_tol);
    auto tail_bound = [&](double L) { return occ_bound(L) * j.tail_bound(L); };
    auto tail = quad::fourier_semi_infinite(g, L0, t, 0.5 * abs_tol, tail_bound, L0);
    return {core.value + tail.value, core.error + tail.error, core.converged && tail.converged};
}

}  // namespace

TimeSeries bcf_time(const BathSpec& bath, const RealVector& t_grid, double abs_tol) {
    if (bath.statistics != Statistics::bosonic) throw InputError("bcf_time: bosonic baths only");
    bath.validate();
    Vector values(t_grid.size());
    const bool thermal = std::isfinite(bath.beta);
    for (Index i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        // ω > 0 branch: J(ω)(1 + n_B) e^{-iωt}
        auto plus = [&](double w) { return w <= 0.0 ? 0.0 : eval_density(bath.density, w) *
                                                             (1.0 + bose_occupation(bath.beta, w)); };
        auto plus_occ = [&](double L) { return 1.0 + bose_occupation(bath.beta, L); };
        auto res = halfline_fourier(bath.density, plus, t, thermal ? 0.5 * abs_tol : abs_tol, plus_occ);
        Complex c = res.value;
        double err = res.error;
        bool ok = res.converged;
        if (thermal) {
            // ω < 0 branch folded to ν = -ω > 0: J(ν) n_B(ν) e^{+iνt}
            auto minus = [&](double w) {
                return w <= 0.0 ? 0.0 : eval_density(bath.density, w) * bose_occupation(bath.beta, w);
            };
            auto minus_occ = [&](double L) { return bose_occupation(bath.beta, L); };
            auto resm = halfline_fourier(bath.density, minus, -t, 0.5 * abs_tol, minus_occ);
            c += resm.value;
            err += resm.error;
            ok = ok && resm.converged;
        }
        if (!ok) throw AccuracyError("bcf_time: quadrature failed to reach tolerance", err);
        values[i] = c;
    }
    return TimeSeries(t_grid, std::move(values));
}

FreqSeries bcf_freq(const BathSpec& bath, const RealVector& omega_grid) {
    if (bath.statistics != Statistics::bosonic) throw InputError("bcf_freq: bosonic baths only");
    bath.validate();
    RealVector values(omega_grid.size());
    for (Index i = 0; i < omega_grid.size(); ++i)
        values[i] = M_PI * effective_density(bath, omega_grid[i]);
    return FreqSeries(omega_grid, std::move(values));
}

Hybridization hybridization(const BathSpec& bath, const RealVector& t_grid, double abs_tol) {
    if (bath.statistics != Statistics::fermionic)
        throw InputError("hybridization: fermionic baths only");
    bath.validate();
    const double lo = bath.density.support_lo();
    const double hi = bath.density.support_hi();
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw InputError("hybridization: density support must be finite (use Semicircular/Tabulated)");

    Vector lesser(t_grid.size()), greater(t_grid.size());
    for (Index i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        auto fl = [&](double w) {
            return eval_density(bath.density, w) * fermi_occupation(bath.beta, bath.mu, w);
        };
        auto fg = [&](double w) {
            return eval_density(bath.density, w) * (1.0 - fermi_occupation(bath.beta, bath.mu, w));
        };
        // split at the Fermi edge so the near-step occupation does not defeat the error estimate
        double split = std::clamp(bath.mu, lo, hi);
        auto run = [&](auto&& f) {
            auto a = quad::fourier_panel(f, lo, split, t, 0.5 * abs_tol);
            auto b = quad::fourier_panel(f, split, hi, t, 0.5 * abs_tol);
            if (!(a.converged && b.converged))
                throw AccuracyError("hybridization: quadrature failed to reach tolerance",
                                    a.error + b.error);
            return a.value + b.value;
        };
        lesser[i] = run(fl);
        greater[i] = run(fg);
    }
    return {TimeSeries(t_grid, std::move(lesser)), TimeSeries(t_grid, std::move(greater))};
}

}  // namespace pseudofit
