// expfit.hpp — Decaying-exponential-sum fitting of sampled correlation functions (ESPRIT)
//
// A fitted model is C(t) ≈ Σ_k w_k e^{-iλ_k t} with Im λ_k ≤ 0 (every term decays).
// Poles come from the rotational invariance of the Hankel signal subspace; weights
// from a Vandermonde least-squares solve.

#pragma once

#include "pseudofit/types.hpp"

namespace pseudofit {

struct QuasiModel {
    Vector poles;    // λ_k = ω_k - iγ_k with γ_k ≥ 0 (within 1e-12)
    Vector weights;  // w_k = conj(l_k) r_k
    Vector l, r;     // optional factorization; empty when only weights are known

    Index size() const { return poles.size(); }
    bool has_factorization() const { return l.size() == poles.size() && l.size() > 0; }
    void validate() const;
};

Complex eval_quasi(const QuasiModel& m, double t);
Vector eval_quasi(const QuasiModel& m, const RealVector& t_grid);

struct EspritOptions {
    int target_order = -1;    // fixed model order; -1 selects by singular-value threshold
    double sigma_rel = 1e-12; // σ_{N+1}/σ_1 threshold when target_order < 0
};

struct EspritFit {
    QuasiModel model;
    double rms_misfit = 0.0;   // RMS residual on the input samples
    int discarded_poles = 0;   // unstable poles dropped (|z| - 1 > 1e-8)
};

// samples must be uniform with at least 2·order + 2 points
EspritFit esprit_fit(const TimeSeries& samples, const EspritOptions& opts = {});

// ε = sqrt((1/T) ∫_0^T |C_ref - C_fit|² dt), trapezoid on the common grid
double avg_l2_error(const TimeSeries& c_ref, const TimeSeries& c_fit, double T);
double avg_l2_error(const TimeSeries& c_ref, const Vector& fit_values, double T);

}  // namespace pseudofit
