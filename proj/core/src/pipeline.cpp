#include "pseudofit/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace pseudofit {

FitOutcome finish_fit(QuasiModel quasi, const TimeSeries& target, const FitOptions& opts) {
    FitOutcome out;
    out.target = target;
    out.quasi = std::move(quasi);
    const double T = target.grid[target.size() - 1];
    out.epsilon_quasi = avg_l2_error(target, eval_quasi(out.quasi, target.grid), T);

    SdpOptions sdp_opts = opts.sdp;
    if (sdp_opts.horizon <= 0.0) sdp_opts.horizon = T;
    try {
        out.gauge = solve_gauge_sdp(out.quasi, sdp_opts);
    } catch (const SdpConvergenceError& e) {
        out.gauge = e.best;
        out.sdp_converged = false;
    }
    out.model = extract_coupled(out.gauge, out.quasi);
    out.model_extracted = out.model;
    if (opts.refine) {
        auto refined = refine_time_domain(out.model, target, {opts.refine_iters});
        out.model = refined.model;
    }
    out.epsilon = avg_l2_error(target, eval_coupled_bcf(out.model, target.grid).values, T);
    out.phys = physicality_check(out.model);

    // negative-frequency weight of the fitted density on a bracketing grid
    double radius = 1.0;
    if (out.model.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(out.model.H, Eigen::EigenvaluesOnly);
        radius = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    out.negative_weight =
        fitted_density(out.model, linspace(-2.5 * radius, 2.5 * radius, 4001)).negative_weight;
    return out;
}

FitOutcome fit_series(const TimeSeries& target, const FitOptions& opts) {
    EspritOptions eo{opts.order, opts.sigma_rel};
    auto fit = esprit_fit(target, eo);
    return finish_fit(std::move(fit.model), target, opts);
}

FitOutcome fit_bath(const BathSpec& bath, const FitOptions& opts) {
    if (bath.statistics != Statistics::bosonic)
        throw InputError("fit_bath: bosonic baths only (use hybridization + fit_series)");
    const RealVector t_grid = linspace(0.0, opts.horizon, opts.n_samples);
    TimeSeries target = bcf_time(bath, t_grid, opts.quad_tol);

    if (opts.method == FitMethod::time_domain) return fit_series(target, opts);

    // frequency path: sample C̃ = π J_eff, realize, reduce to the physical half-plane
    double lo = opts.omega_lo, hi = opts.omega_hi;
    if (!(hi > lo)) {
        const double s = bath.density.scale();
        lo = -8.0 * s;
        hi = std::isfinite(bath.density.support_hi())
                 ? 1.5 * bath.density.support_hi()
                 : 24.0 * s;
    }
    FreqSeries ctilde = bcf_freq(bath, linspace(lo, hi, opts.n_omega));
    LoewnerOptions lopts;
    lopts.sigma_rel = opts.sigma_rel;
    // the doubled realization carries a conjugate pole pair per physical mode
    if (opts.order > 0) lopts.rank_cap = 2 * opts.order;
    auto real_out = loewner_realize(ctilde, lopts);
    auto reduced = halfplane_reduce(real_out.pr);

    FitOutcome out = finish_fit(std::move(reduced.model), target, opts);
    out.loewner_rank = real_out.rank;
    return out;
}

}  // namespace pseudofit
